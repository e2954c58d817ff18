#include "fairsynth/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "fairsynth/common.hpp"
#include "json.hpp"

namespace fairsynth {

using json = nlohmann::json;
using nn::Matrix;

namespace {

constexpr int kMaxEpochs = 200;
constexpr double kPlateauTol = 1e-4;
constexpr int kPlateauPatience = 10;

std::vector<double> rank_with_ties(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

DownstreamClassifier DownstreamClassifier::train(const Table& data, const std::string& target,
                                                 uint64_t seed) {
    const std::size_t y_col = data.column_index(target);
    if (data.schema()[y_col].kind != ColumnKind::Binary) {
        throw ValidationError("downstream target '" + target + "' must be binary");
    }
    const std::size_t n = data.rows();
    if (n < 2) throw ValidationError("downstream training needs at least two rows");

    DownstreamClassifier clf;
    std::vector<std::size_t> feat_cols;
    for (std::size_t c = 0; c < data.cols(); ++c) {
        if (c == y_col) continue;
        clf.features_.push_back(data.schema()[c].name);
        feat_cols.push_back(c);
    }
    const std::size_t m = feat_cols.size();
    if (m == 0) throw ValidationError("downstream training needs at least one feature");

    std::vector<double> labels(n);
    bool saw0 = false, saw1 = false;
    for (std::size_t r = 0; r < n; ++r) {
        labels[r] = data.at(r, y_col);
        (labels[r] == 1.0 ? saw1 : saw0) = true;
    }
    if (!saw0 || !saw1) {
        throw ValidationError("degenerate label: target '" + target + "' has a single class");
    }

    clf.mean_.assign(m, 0.0);
    clf.scale_.assign(m, 1.0);
    Matrix x(n, m);
    for (std::size_t f = 0; f < m; ++f) {
        double mu = 0.0;
        for (std::size_t r = 0; r < n; ++r) mu += data.at(r, feat_cols[f]);
        mu /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double d = data.at(r, feat_cols[f]) - mu;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n));
        clf.mean_[f] = mu;
        clf.scale_[f] = sd > 0.0 ? sd : 1.0;
        for (std::size_t r = 0; r < n; ++r) {
            x(r, f) = (data.at(r, feat_cols[f]) - mu) / clf.scale_[f];
        }
    }

    clf.net_ = nn::Mlp({m, 100, 1}, 0.0);  // rectified hidden units
    std::mt19937_64 init_rng(mix_seed(seed, "downstream-init"));
    std::mt19937_64 batch_rng(mix_seed(seed, "downstream-batch"));
    clf.net_.init_uniform(init_rng);

    const std::size_t batch = std::min<std::size_t>(200, n);
    std::vector<std::size_t> index(n);
    std::iota(index.begin(), index.end(), 0);
    nn::Mlp::Grads grads;

    double best_loss = std::numeric_limits<double>::infinity();
    int stagnant = 0;
    for (int epoch = 0; epoch < kMaxEpochs; ++epoch) {
        std::shuffle(index.begin(), index.end(), batch_rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t offset = 0; offset + batch <= n; offset += batch) {
            Matrix xb(batch, m);
            Eigen::VectorXd yb(batch);
            for (std::size_t i = 0; i < batch; ++i) {
                xb.row(i) = x.row(index[offset + i]);
                yb(i) = labels[index[offset + i]];
            }
            nn::Mlp::Cache cache;
            const Matrix logit = clf.net_.forward(xb, &cache);
            double loss = 0.0;
            Matrix grad(batch, 1);
            for (std::size_t i = 0; i < batch; ++i) {
                const double l = logit(i, 0);
                loss += yb(i) == 1.0 ? nn::softplus(-l) : nn::softplus(l);
                grad(i, 0) = (nn::stable_sigmoid(l) - yb(i)) / batch;
            }
            grads.zero(clf.net_);
            clf.net_.backward(cache, grad, grads);
            clf.net_.adam_update(grads, 0.001, 1e-4);
            epoch_loss += loss / batch;
            ++batches;
        }
        const double mean_loss = batches ? epoch_loss / batches : 0.0;
        if (mean_loss < best_loss - kPlateauTol) {
            best_loss = mean_loss;
            stagnant = 0;
        } else if (++stagnant >= kPlateauPatience) {
            break;
        }
    }
    return clf;
}

double DownstreamClassifier::predict_proba(std::span<const double> features) const {
    if (features.size() != features_.size()) {
        throw ValidationError("feature vector width mismatch");
    }
    Matrix x(1, features.size());
    for (std::size_t f = 0; f < features.size(); ++f) {
        x(0, f) = (features[f] - mean_[f]) / scale_[f];
    }
    return nn::stable_sigmoid(net_.forward(x)(0, 0));
}

DownstreamClassifier train_downstream(const Table& data, const std::string& target,
                                      uint64_t seed) {
    return DownstreamClassifier::train(data, target, seed);
}

namespace {

std::vector<std::size_t> feature_columns(const Classifier& clf, const Table& table) {
    std::vector<std::size_t> cols;
    cols.reserve(clf.feature_names().size());
    for (const auto& name : clf.feature_names()) cols.push_back(table.column_index(name));
    return cols;
}

}  // namespace

double predict_row(const Classifier& clf, const Table& table, std::size_t row) {
    const auto cols = feature_columns(clf, table);
    std::vector<double> features(cols.size());
    for (std::size_t f = 0; f < cols.size(); ++f) features[f] = table.at(row, cols[f]);
    return clf.predict_proba(features);
}

FtuResult ftu_details(const Classifier& clf, const Table& eval_table,
                      const std::string& protected_col) {
    if (!eval_table.has_column(protected_col)) {
        throw ValidationError("protected column '" + protected_col + "' absent from eval table");
    }
    const auto cols = feature_columns(clf, eval_table);
    // The intervention happens on the classifier's own protected slot; a
    // classifier that never reads it (e.g. protected-removal) scores 0.
    std::ptrdiff_t a_slot = -1;
    for (std::size_t f = 0; f < clf.feature_names().size(); ++f) {
        if (clf.feature_names()[f] == protected_col) a_slot = static_cast<std::ptrdiff_t>(f);
    }
    FtuResult result;
    if (eval_table.rows() == 0) return result;
    if (a_slot < 0) return result;

    std::vector<double> features(cols.size());
    double total = 0.0;
    for (std::size_t r = 0; r < eval_table.rows(); ++r) {
        for (std::size_t f = 0; f < cols.size(); ++f) features[f] = eval_table.at(r, cols[f]);
        features[a_slot] = 0.0;
        const double p0 = clf.predict_proba(features);
        features[a_slot] = 1.0;
        const double p1 = clf.predict_proba(features);
        const double gap = std::abs(p0 - p1);
        total += gap;
        result.max_gap = std::max(result.max_gap, gap);
    }
    result.mean_gap = total / static_cast<double>(eval_table.rows());
    return result;
}

double ftu_metric(const Classifier& clf, const Table& eval_table,
                  const std::string& protected_col) {
    return ftu_details(clf, eval_table, protected_col).mean_gap;
}

double dp_metric(const Classifier& clf, const Table& eval_table,
                 const std::string& protected_col, double threshold) {
    const std::size_t a_col = eval_table.column_index(protected_col);
    double pos0 = 0.0, pos1 = 0.0;
    std::size_t n0 = 0, n1 = 0;
    for (std::size_t r = 0; r < eval_table.rows(); ++r) {
        const bool positive = predict_row(clf, eval_table, r) >= threshold;
        if (eval_table.at(r, a_col) == 0.0) {
            ++n0;
            pos0 += positive;
        } else {
            ++n1;
            pos1 += positive;
        }
    }
    if (n0 == 0 || n1 == 0) {
        throw ValidationError("dp metric needs both protected groups in the eval table");
    }
    return std::abs(pos0 / static_cast<double>(n0) - pos1 / static_cast<double>(n1));
}

std::pair<double, double> precision_recall(const Table& real, const Table& synth, int k) {
    if (real.schema() != synth.schema()) {
        throw ValidationError("precision/recall requires identical schemas");
    }
    const std::size_t nr = real.rows();
    const std::size_t ns = synth.rows();
    if (k < 1 || static_cast<std::size_t>(k) >= nr || static_cast<std::size_t>(k) >= ns) {
        throw ValidationError("k must be >= 1 and smaller than each table's row count");
    }
    const std::size_t m = real.cols();

    // Shared standardization from the real table.
    std::vector<double> mu(m, 0.0), sd(m, 1.0);
    for (std::size_t c = 0; c < m; ++c) {
        mu[c] = column_mean(real, c);
        const double s = column_stddev(real, c);
        sd[c] = s > 0.0 ? s : 1.0;
    }
    auto standardized = [&](const Table& t) {
        Matrix x(t.rows(), m);
        for (std::size_t r = 0; r < t.rows(); ++r) {
            for (std::size_t c = 0; c < m; ++c) x(r, c) = (t.at(r, c) - mu[c]) / sd[c];
        }
        return x;
    };
    const Matrix r_pts = standardized(real);
    const Matrix s_pts = standardized(synth);

    auto knn_radius_sq = [&](const Matrix& pts, int kk) {
        const std::size_t n = pts.rows();
        std::vector<double> radius(n);
        std::vector<double> dists(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t w = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                dists[w++] = (pts.row(i) - pts.row(j)).squaredNorm();
            }
            std::nth_element(dists.begin(), dists.begin() + (kk - 1), dists.end());
            radius[i] = dists[kk - 1];
        }
        return radius;
    };
    const auto r_radius = knn_radius_sq(r_pts, k);
    const auto s_radius = knn_radius_sq(s_pts, k);

    auto coverage = [&](const Matrix& probes, const Matrix& anchors,
                        const std::vector<double>& radius_sq) {
        std::size_t covered = 0;
        for (Eigen::Index p = 0; p < probes.rows(); ++p) {
            for (Eigen::Index a = 0; a < anchors.rows(); ++a) {
                if ((probes.row(p) - anchors.row(a)).squaredNorm() <= radius_sq[a]) {
                    ++covered;
                    break;
                }
            }
        }
        return static_cast<double>(covered) / static_cast<double>(probes.rows());
    };
    const double precision = coverage(s_pts, r_pts, r_radius);
    const double recall = coverage(r_pts, s_pts, s_radius);
    return {precision, recall};
}

double auroc_from_scores(std::span<const double> scores, std::span<const double> labels) {
    if (scores.size() != labels.size() || scores.empty()) {
        throw ValidationError("auroc needs matching, non-empty scores and labels");
    }
    const auto ranks = rank_with_ties(scores);
    double rank_sum_pos = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1.0) {
            rank_sum_pos += ranks[i];
            ++n_pos;
        }
    }
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw ValidationError("auroc needs both classes present");
    }
    const double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auroc(const Classifier& clf, const Table& labeled, const std::string& target) {
    const std::size_t y_col = labeled.column_index(target);
    std::vector<double> scores(labeled.rows()), labels(labeled.rows());
    for (std::size_t r = 0; r < labeled.rows(); ++r) {
        scores[r] = predict_row(clf, labeled, r);
        labels[r] = labeled.at(r, y_col);
    }
    return auroc_from_scores(scores, labels);
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw ValidationError("spearman needs two equal-length series");
    }
    const auto rx = rank_with_ties(xs);
    const auto ry = rank_with_ties(ys);
    const std::size_t n = rx.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    const double denom = std::sqrt(sxx * syy);
    return denom > 0.0 ? sxy / denom : 0.0;
}

void MetricStats::finalize() {
    if (values.empty()) {
        mean = 0.0;
        stddev = 0.0;
        return;
    }
    mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    stddev = std::sqrt(ss / values.size());
}

void EvalReport::finalize() {
    precision.finalize();
    recall.finalize();
    auroc.finalize();
    ftu.finalize();
    dp.finalize();
    ftu_max.finalize();
    n_runs = static_cast<int>(ftu.values.size());
}

namespace {

json stats_to_json(const MetricStats& s) {
    return json{{"mean", s.mean}, {"std", s.stddev}, {"values", s.values}};
}

MetricStats stats_from_json(const json& doc) {
    MetricStats s;
    s.mean = doc.at("mean").get<double>();
    s.stddev = doc.at("std").get<double>();
    s.values = doc.at("values").get<std::vector<double>>();
    return s;
}

}  // namespace

EvalReport EvalReport::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("invalid report JSON: ") + e.what());
    }
    EvalReport report;
    report.precision = stats_from_json(doc.at("precision"));
    report.recall = stats_from_json(doc.at("recall"));
    report.auroc = stats_from_json(doc.at("auroc"));
    report.ftu = stats_from_json(doc.at("ftu"));
    report.dp = stats_from_json(doc.at("dp"));
    report.ftu_max = stats_from_json(doc.at("ftu_max"));
    report.n_runs = doc.at("n_runs").get<int>();
    report.seeds = doc.at("seeds").get<std::vector<uint64_t>>();
    report.fingerprint = doc.at("fingerprint").get<std::string>();
    return report;
}

std::string EvalReport::to_json() const {
    return json{{"precision", stats_to_json(precision)},
                {"recall", stats_to_json(recall)},
                {"auroc", stats_to_json(auroc)},
                {"ftu", stats_to_json(ftu)},
                {"dp", stats_to_json(dp)},
                {"ftu_max", stats_to_json(ftu_max)},
                {"n_runs", n_runs},
                {"seeds", seeds},
                {"fingerprint", fingerprint}}
        .dump(2);
}

}  // namespace fairsynth
