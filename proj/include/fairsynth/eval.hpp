#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fairsynth/nn.hpp"
#include "fairsynth/table.hpp"

namespace fairsynth {

/// Probabilistic binary classifier over named features.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual double predict_proba(std::span<const double> features) const = 0;
    virtual const std::vector<std::string>& feature_names() const = 0;
};

/// Single-hidden-layer network (100 rectified units, sigmoid output,
/// cross-entropy loss, adaptive-moment steps at rate 0.001). Features are
/// taken raw and standardized internally, so callers can intervene on raw
/// values.
class DownstreamClassifier final : public Classifier {
public:
    static DownstreamClassifier train(const Table& data, const std::string& target,
                                      uint64_t seed);

    double predict_proba(std::span<const double> features) const override;
    const std::vector<std::string>& feature_names() const override { return features_; }

private:
    std::vector<std::string> features_;
    std::vector<double> mean_, scale_;
    nn::Mlp net_;
};

DownstreamClassifier train_downstream(const Table& data, const std::string& target,
                                      uint64_t seed);

/// Scores a table row by feature name lookup (throws if a feature is absent).
double predict_row(const Classifier& clf, const Table& table, std::size_t row);

struct FtuResult {
    double mean_gap = 0.0;
    double max_gap = 0.0;  // secondary diagnostic
};

/// Mean |p(row, A=0) - p(row, A=1)| over the evaluation rows, all other
/// features held fixed.
double ftu_metric(const Classifier& clf, const Table& eval_table,
                  const std::string& protected_col);
FtuResult ftu_details(const Classifier& clf, const Table& eval_table,
                      const std::string& protected_col);

/// |positive-prediction rate at A=0 - rate at A=1| with threshold 0.5.
double dp_metric(const Classifier& clf, const Table& eval_table,
                 const std::string& protected_col, double threshold = 0.5);

/// k-NN hypersphere estimator on standardized columns: precision is the
/// fraction of synthetic points inside some real point's k-NN ball, recall
/// the same with roles swapped.
std::pair<double, double> precision_recall(const Table& real, const Table& synth, int k);

/// Rank-based area under the ROC curve, ties averaged.
double auroc(const Classifier& clf, const Table& labeled, const std::string& target);
double auroc_from_scores(std::span<const double> scores, std::span<const double> labels);

/// Rank correlation with tie-averaged ranks.
double spearman(std::span<const double> xs, std::span<const double> ys);

struct MetricStats {
    std::vector<double> values;
    double mean = 0.0;
    double stddev = 0.0;

    void add(double v) { values.push_back(v); }
    void finalize();
};

struct EvalReport {
    MetricStats precision, recall, auroc, ftu, dp;
    MetricStats ftu_max;
    int n_runs = 0;
    std::vector<uint64_t> seeds;
    std::string fingerprint;

    void finalize();
    static EvalReport from_json(const std::string& text);
    std::string to_json() const;
};

}  // namespace fairsynth
