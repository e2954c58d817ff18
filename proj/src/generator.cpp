#include "fairsynth/generator.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <random>

#include "json.hpp"

namespace fairsynth {

using json = nlohmann::json;

GeneratorWeights::GeneratorWeights(std::size_t columns, std::size_t hidden)
    : l1(columns + 1, hidden),
      l2(hidden, hidden),
      head_w(nn::Matrix::Zero(hidden, columns)),
      head_b(nn::RowVector::Zero(columns)),
      binary(columns, 0) {}

GeneratorWeights::GeneratorWeights(const CausalDag& dag, std::size_t hidden)
    : GeneratorWeights(dag.node_count(), hidden) {
    for (std::size_t i = 0; i < dag.node_count(); ++i) {
        binary[i] = dag.node(i).kind == ColumnKind::Binary ? 1 : 0;
    }
}

void GeneratorWeights::init_uniform(std::mt19937_64& rng) {
    l1.init_uniform(rng);
    l2.init_uniform(rng);
    const double bound = 1.0 / std::sqrt(static_cast<double>(head_w.rows()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index i = 0; i < head_w.rows(); ++i) {
        for (Eigen::Index j = 0; j < head_w.cols(); ++j) head_w(i, j) = u(rng);
    }
    for (Eigen::Index j = 0; j < head_b.size(); ++j) head_b(j) = u(rng);
}

void GeneratorWeights::flatten(std::vector<double>& out) const {
    out.insert(out.end(), l1.w.data(), l1.w.data() + l1.w.size());
    out.insert(out.end(), l1.b.data(), l1.b.data() + l1.b.size());
    out.insert(out.end(), l2.w.data(), l2.w.data() + l2.w.size());
    out.insert(out.end(), l2.b.data(), l2.b.data() + l2.b.size());
    out.insert(out.end(), head_w.data(), head_w.data() + head_w.size());
    out.insert(out.end(), head_b.data(), head_b.data() + head_b.size());
}

void GeneratorWeights::unflatten(const std::vector<double>& in) {
    if (in.size() != parameter_count()) {
        throw IoError("weight blob size does not match generator architecture");
    }
    std::size_t off = 0;
    auto take = [&](double* dst, std::size_t count) {
        std::copy(in.begin() + off, in.begin() + off + count, dst);
        off += count;
    };
    take(l1.w.data(), l1.w.size());
    take(l1.b.data(), l1.b.size());
    take(l2.w.data(), l2.w.size());
    take(l2.b.data(), l2.b.size());
    take(head_w.data(), head_w.size());
    take(head_b.data(), head_b.size());
}

std::size_t GeneratorWeights::parameter_count() const {
    return l1.parameter_count() + l2.parameter_count() + head_w.size() + head_b.size();
}

GeneratorModel::GeneratorModel(CausalDag dag, Standardizer stats, GeneratorWeights weights,
                               Table marginal_pool)
    : dag_(std::move(dag)),
      stats_(std::move(stats)),
      weights_(std::move(weights)),
      marginal_pool_(std::move(marginal_pool)) {
    validate();
}

GeneratorModel GeneratorModel::with_custom(CausalDag dag, std::vector<NodeFn> node_fns,
                                           Table marginal_pool) {
    if (node_fns.size() != dag.node_count()) {
        throw ValidationError("one node function per DAG node is required");
    }
    std::vector<Column> schema;
    for (const auto& n : dag.nodes()) schema.push_back({n.name, n.kind});
    GeneratorWeights weights(dag, 2 * schema.size());
    GeneratorModel model(std::move(dag), Standardizer::identity(schema), std::move(weights),
                         std::move(marginal_pool));
    model.custom_ = std::move(node_fns);
    return model;
}

void GeneratorModel::validate() const {
    const std::size_t d = dag_.node_count();
    if (stats_.stats().size() != d) {
        throw ValidationError("preprocessing stats must cover every column");
    }
    for (std::size_t i = 0; i < d; ++i) {
        if (stats_.stats()[i].name != dag_.node(i).name) {
            throw ValidationError("preprocessing stats order must match the DAG nodes");
        }
    }
    if (weights_.columns() != d ||
        static_cast<std::size_t>(weights_.l1.w.rows()) != d + 1 ||
        weights_.binary.size() != d) {
        throw ValidationError("generator weight shapes do not match the DAG");
    }
    if (marginal_pool_.rows() > 0 && marginal_pool_.cols() != d) {
        throw ValidationError("marginal pool schema does not match the DAG");
    }
}

namespace {

struct ResolvedSub {
    std::size_t parent_col;
    SurrogatePolicy::Kind kind;
    double fixed_value;  // raw space
};

}  // namespace

Table GeneratorModel::generate(std::size_t n, const EdgeRemovalSet& removed,
                               const SurrogatePolicy& policy, uint64_t seed) const {
    if (n < 1) throw ValidationError("sample size must be >= 1");
    for (const auto& r : removed.removed) {
        if (!dag_.has_edge(r.from, r.to)) {
            throw ValidationError("removed edge " + r.from + " -> " + r.to +
                                  " does not exist in the model DAG");
        }
    }
    policy.validate(dag_, removed);
    const bool needs_pool = std::any_of(
        removed.removed.begin(), removed.removed.end(), [&](const RemovedEdge& r) {
            return policy.entry_for({r.from, r.to}).kind == SurrogatePolicy::Kind::MarginalSample;
        });
    if (needs_pool && marginal_pool_.rows() == 0) {
        throw ValidationError("marginal surrogate requested but the model holds no "
                              "empirical marginal pool");
    }

    const std::size_t d = dag_.node_count();
    const auto topo = topological_order(dag_);

    std::vector<std::vector<ResolvedSub>> subs_for(d);
    for (const auto& r : removed.removed) {
        const auto& entry = policy.entry_for({r.from, r.to});
        subs_for[dag_.node_index(r.to)].push_back(
            {dag_.node_index(r.from), entry.kind, entry.value});
    }

    // Noise drawn up front, one N(0,1) per (row, column); the surrogate stream
    // is separate so substitutions leave other columns' randomness untouched.
    std::mt19937_64 noise_rng(mix_seed(seed, "gen-noise"));
    std::normal_distribution<double> normal(0.0, 1.0);
    nn::Matrix z(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) z(r, c) = normal(noise_rng);
    }
    std::mt19937_64 surrogate_rng(mix_seed(seed, "gen-surrogate"));

    // Standardized-space sweep (identity transform for plug-in models).
    nn::Matrix values(n, d);
    values.setZero();
    std::vector<double> sub_col(n);
    std::vector<double> raw_parents;
    for (const auto& name : topo) {
        const std::size_t j = dag_.node_index(name);
        const auto& parents = dag_.parents(j);

        // Resolve surrogate columns for removed incoming edges (ordered by
        // parent name via the sorted removal set).
        std::vector<std::pair<std::size_t, std::vector<double>>> substituted;
        for (const auto& sub : subs_for[j]) {
            if (sub.kind == SurrogatePolicy::Kind::FixedValue) {
                std::fill(sub_col.begin(), sub_col.end(),
                          stats_.standardize(sub.parent_col, sub.fixed_value));
            } else {
                std::uniform_int_distribution<std::size_t> pick(0, marginal_pool_.rows() - 1);
                for (std::size_t r = 0; r < n; ++r) {
                    sub_col[r] = stats_.standardize(
                        sub.parent_col, marginal_pool_.at(pick(surrogate_rng), sub.parent_col));
                }
            }
            substituted.emplace_back(sub.parent_col, sub_col);
        }
        auto substituted_value = [&](std::size_t parent_col, std::size_t row,
                                     double fallback) -> double {
            for (const auto& [col, vals] : substituted) {
                if (col == parent_col) return vals[row];
            }
            return fallback;
        };

        if (!custom_.empty()) {
            raw_parents.resize(parents.size());
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t p = 0; p < parents.size(); ++p) {
                    raw_parents[p] =
                        substituted_value(parents[p], r, values(r, parents[p]));
                }
                values(r, j) = custom_[j](raw_parents, z(r, j));
            }
        } else {
            nn::Matrix v = nn::Matrix::Zero(n, d + 1);
            for (std::size_t p : parents) {
                for (std::size_t r = 0; r < n; ++r) {
                    v(r, p) = substituted_value(p, r, values(r, p));
                }
            }
            v.col(d) = z.col(j);
            const nn::Matrix h1 = nn::leaky_relu(weights_.l1.forward(v), weights_.leak);
            const nn::Matrix h2 = nn::leaky_relu(weights_.l2.forward(h1), weights_.leak);
            values.col(j) = h2 * weights_.head_w.col(j);
            values.col(j).array() += weights_.head_b(j);
        }
    }

    // De-standardize continuous columns, round binary ones.
    std::vector<Column> schema;
    for (const auto& node : dag_.nodes()) schema.push_back({node.name, node.kind});
    std::vector<double> data;
    data.reserve(n * d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            double v = stats_.destandardize(c, values(r, c));
            if (schema[c].kind == ColumnKind::Binary) v = v >= 0.5 ? 1.0 : 0.0;
            data.push_back(v);
        }
    }
    return Table(std::move(schema), std::move(data));
}

std::vector<double> GeneratorModel::generate_node(
    const std::string& node, const std::map<std::string, std::vector<double>>& parent_values,
    const std::map<std::string, std::vector<double>>& substitutions,
    std::span<const double> noise) const {
    const std::size_t j = dag_.node_index(node);
    const std::size_t n = noise.size();
    const auto parent_names = dag_.parent_names(node);

    // Substitutions override parent columns; after overrides every parent
    // must be covered with a column of the right length.
    std::vector<const std::vector<double>*> cols(parent_names.size(), nullptr);
    for (std::size_t p = 0; p < parent_names.size(); ++p) {
        auto sub = substitutions.find(parent_names[p]);
        if (sub != substitutions.end()) {
            cols[p] = &sub->second;
        } else {
            auto it = parent_values.find(parent_names[p]);
            if (it == parent_values.end()) {
                throw ValidationError("generate_node: parent '" + parent_names[p] +
                                      "' of '" + node + "' has no value column");
            }
            cols[p] = &it->second;
        }
        if (cols[p]->size() != n) {
            throw ValidationError("generate_node: column for parent '" + parent_names[p] +
                                  "' has length " + std::to_string(cols[p]->size()) +
                                  ", expected " + std::to_string(n));
        }
    }

    std::vector<double> out(n);
    if (!custom_.empty()) {
        std::vector<double> raw(parent_names.size());
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t p = 0; p < parent_names.size(); ++p) raw[p] = (*cols[p])[r];
            out[r] = custom_[j](raw, noise[r]);
        }
        return out;
    }

    const std::size_t d = dag_.node_count();
    nn::Matrix v = nn::Matrix::Zero(n, d + 1);
    const auto& parents = dag_.parents(j);
    for (std::size_t p = 0; p < parents.size(); ++p) {
        for (std::size_t r = 0; r < n; ++r) {
            v(r, parents[p]) = stats_.standardize(parents[p], (*cols[p])[r]);
        }
    }
    for (std::size_t r = 0; r < n; ++r) v(r, d) = noise[r];
    const nn::Matrix h1 = nn::leaky_relu(weights_.l1.forward(v), weights_.leak);
    const nn::Matrix h2 = nn::leaky_relu(weights_.l2.forward(h1), weights_.leak);
    for (std::size_t r = 0; r < n; ++r) {
        out[r] = stats_.destandardize(j, h2.row(r) * weights_.head_w.col(j) + weights_.head_b(j));
    }
    return out;
}

namespace {

constexpr char kMagic[8] = {'F', 'S', 'G', 'M', '0', '0', '0', '1'};

void write_u32(std::ostream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& out, uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

uint32_t read_u32(std::istream& in) {
    uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw IoError("model file truncated");
    }
    return v;
}

uint64_t read_u64(std::istream& in) {
    uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw IoError("model file truncated");
    }
    return v;
}

std::string read_block(std::istream& in, std::size_t len) {
    std::string buf(len, '\0');
    if (!in.read(buf.data(), static_cast<std::streamsize>(len))) {
        throw IoError("model file truncated");
    }
    return buf;
}

}  // namespace

void GeneratorModel::save(const std::string& path) const {
    if (!custom_.empty()) {
        throw ValidationError("models with plugged-in node functions cannot be serialized");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file '" + path + "'");

    const std::string dag_json = dag_.to_json();
    const std::string stats_json = stats_.to_json();
    const uint64_t dag_hash = fnv1a64(dag_json);

    std::vector<double> weights;
    weights_.flatten(weights);

    json header{{"version", 1},
                {"dag_hash", dag_hash},
                {"columns", dag_.node_count()},
                {"hidden", weights_.hidden()},
                {"weight_count", weights.size()},
                {"pool_rows", marginal_pool_.rows()}};
    const std::string header_json = header.dump();

    out.write(kMagic, sizeof kMagic);
    write_u32(out, static_cast<uint32_t>(header_json.size()));
    out.write(header_json.data(), static_cast<std::streamsize>(header_json.size()));
    write_u32(out, static_cast<uint32_t>(dag_json.size()));
    out.write(dag_json.data(), static_cast<std::streamsize>(dag_json.size()));
    write_u32(out, static_cast<uint32_t>(stats_json.size()));
    out.write(stats_json.data(), static_cast<std::streamsize>(stats_json.size()));

    // The weights section repeats the DAG hash so a spliced file is caught.
    write_u64(out, dag_hash);
    write_u64(out, weights.size());
    out.write(reinterpret_cast<const char*>(weights.data()),
              static_cast<std::streamsize>(weights.size() * sizeof(double)));

    write_u64(out, static_cast<uint64_t>(marginal_pool_.rows() * marginal_pool_.cols()));
    for (std::size_t r = 0; r < marginal_pool_.rows(); ++r) {
        out.write(reinterpret_cast<const char*>(marginal_pool_.row(r).data()),
                  static_cast<std::streamsize>(marginal_pool_.cols() * sizeof(double)));
    }
    if (!out) throw IoError("failed writing model file '" + path + "'");
}

GeneratorModel GeneratorModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file '" + path + "'");

    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw IoError("'" + path + "' is not a generator model file");
    }

    json header;
    try {
        header = json::parse(read_block(in, read_u32(in)));
    } catch (const json::exception& e) {
        throw IoError(std::string("model header corrupt: ") + e.what());
    }
    if (header.value("version", 0) != 1) {
        throw IoError("unsupported model file version");
    }

    const std::string dag_json = read_block(in, read_u32(in));
    const std::string stats_json = read_block(in, read_u32(in));
    if (fnv1a64(dag_json) != header.at("dag_hash").get<uint64_t>()) {
        throw IntegrityError("dag hash mismatch between header and dag section");
    }

    CausalDag dag = CausalDag::from_json(dag_json);
    Standardizer stats = Standardizer::from_json(stats_json);

    const uint64_t weights_dag_hash = read_u64(in);
    if (weights_dag_hash != header.at("dag_hash").get<uint64_t>()) {
        throw IntegrityError("dag hash mismatch between file sections");
    }
    const uint64_t weight_count = read_u64(in);
    if (weight_count != header.at("weight_count").get<uint64_t>()) {
        throw IntegrityError("weight count mismatch between header and weights section");
    }
    std::vector<double> weights(weight_count);
    if (!in.read(reinterpret_cast<char*>(weights.data()),
                 static_cast<std::streamsize>(weight_count * sizeof(double)))) {
        throw IoError("model file truncated");
    }

    GeneratorWeights gw(dag, header.at("hidden").get<std::size_t>());
    gw.unflatten(weights);
    const std::size_t d = dag.node_count();

    const uint64_t pool_count = read_u64(in);
    if (pool_count % std::max<std::size_t>(d, 1) != 0) {
        throw IoError("marginal pool size does not match column count");
    }
    std::vector<double> pool(pool_count);
    if (pool_count > 0 &&
        !in.read(reinterpret_cast<char*>(pool.data()),
                 static_cast<std::streamsize>(pool_count * sizeof(double)))) {
        throw IoError("model file truncated");
    }
    std::vector<Column> schema;
    for (const auto& n : dag.nodes()) schema.push_back({n.name, n.kind});

    return GeneratorModel(std::move(dag), std::move(stats), std::move(gw),
                          Table(std::move(schema), std::move(pool)));
}

uint64_t GeneratorModel::weights_hash() const {
    std::vector<double> weights;
    weights_.flatten(weights);
    return fnv1a64({reinterpret_cast<const char*>(weights.data()),
                    weights.size() * sizeof(double)});
}

}  // namespace fairsynth
