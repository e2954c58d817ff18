#include "fairsynth/sem.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace fairsynth {

using json = nlohmann::json;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

SemSpec::SemSpec(CausalDag dag_in, std::map<std::string, Mechanism> mechanisms_in)
    : dag(std::move(dag_in)), mechanisms(std::move(mechanisms_in)) {
    for (const auto& node : dag.nodes()) {
        auto it = mechanisms.find(node.name);
        if (it == mechanisms.end()) {
            throw ValidationError("no mechanism for node '" + node.name + "'");
        }
        const Mechanism& m = it->second;
        const bool continuous = node.kind == ColumnKind::Continuous;
        if (continuous && m.type != Mechanism::Type::Linear) {
            throw ValidationError("continuous node '" + node.name + "' needs a linear mechanism");
        }
        if (!continuous && m.type != Mechanism::Type::Logistic) {
            throw ValidationError("binary node '" + node.name + "' needs a logistic mechanism");
        }
        if (continuous && !(m.sigma > 0.0)) {
            throw ValidationError("node '" + node.name + "' needs sigma > 0");
        }
        auto parents = dag.parent_names(node.name);
        if (parents.size() != m.weights.size()) {
            throw ValidationError("mechanism parents of '" + node.name +
                                  "' do not match DAG parents");
        }
        for (const auto& p : parents) {
            if (!m.weights.count(p)) {
                throw ValidationError("mechanism of '" + node.name + "' misses weight for parent '" +
                                      p + "'");
            }
        }
    }
    if (mechanisms.size() != dag.node_count()) {
        throw ValidationError("mechanisms reference nodes outside the DAG");
    }
}

SemSpec SemSpec::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("invalid SEM JSON: ") + e.what());
    }
    CausalDag dag = CausalDag::from_json(doc.at("dag").dump());
    std::map<std::string, Mechanism> mechanisms;
    for (const auto& [name, spec] : doc.at("mechanisms").items()) {
        Mechanism m;
        const std::string type = spec.at("type").get<std::string>();
        if (type == "linear") {
            m.type = Mechanism::Type::Linear;
            m.sigma = spec.at("sigma").get<double>();
        } else if (type == "logistic") {
            m.type = Mechanism::Type::Logistic;
        } else {
            throw ValidationError("unknown mechanism type '" + type + "'");
        }
        m.intercept = spec.value("intercept", 0.0);
        if (spec.contains("weights")) {
            for (const auto& [pname, w] : spec["weights"].items()) {
                m.weights[pname] = w.get<double>();
            }
        }
        mechanisms.emplace(name, std::move(m));
    }
    return SemSpec(std::move(dag), std::move(mechanisms));
}

SemSpec SemSpec::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open SEM file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::string SemSpec::to_json() const {
    json doc;
    doc["dag"] = json::parse(dag.to_json());
    json mechs = json::object();
    for (const auto& [name, m] : mechanisms) {
        json spec;
        spec["type"] = m.type == Mechanism::Type::Linear ? "linear" : "logistic";
        spec["intercept"] = m.intercept;
        if (m.type == Mechanism::Type::Linear) spec["sigma"] = m.sigma;
        spec["weights"] = m.weights;
        mechs[name] = spec;
    }
    doc["mechanisms"] = mechs;
    return doc.dump(2);
}

std::vector<Column> SemSpec::schema() const {
    std::vector<Column> out;
    for (const auto& node : dag.nodes()) out.push_back({node.name, node.kind});
    return out;
}

namespace {

struct NodePlan {
    std::size_t column = 0;  // index in the dag/table schema
    const Mechanism* mechanism = nullptr;
    bool binary = false;
    std::vector<std::pair<std::size_t, double>> parent_weights;  // (column, weight)
};

std::vector<NodePlan> build_plan(const SemSpec& sem, const std::vector<std::string>& topo) {
    std::vector<NodePlan> plan;
    plan.reserve(topo.size());
    for (const auto& name : topo) {
        NodePlan p;
        p.column = sem.dag.node_index(name);
        p.mechanism = &sem.mechanisms.at(name);
        p.binary = sem.dag.node(p.column).kind == ColumnKind::Binary;
        for (const auto& [pname, w] : p.mechanism->weights) {
            p.parent_weights.emplace_back(sem.dag.node_index(pname), w);
        }
        plan.push_back(std::move(p));
    }
    return plan;
}

double eval_mechanism(const NodePlan& plan, const std::vector<double>& values, double noise) {
    double lin = plan.mechanism->intercept;
    for (const auto& [col, w] : plan.parent_weights) lin += w * values[col];
    if (plan.binary) {
        return noise < sigmoid(lin) ? 1.0 : 0.0;  // noise is U(0,1)
    }
    return lin + plan.mechanism->sigma * noise;  // noise is N(0,1)
}

// Same evaluation but with surrogate substitutions for severed parent edges.
double eval_mechanism_substituted(const NodePlan& plan, const std::vector<double>& values,
                                  const std::vector<std::pair<std::size_t, double>>& subs,
                                  double noise) {
    double lin = plan.mechanism->intercept;
    for (const auto& [col, w] : plan.parent_weights) {
        double v = values[col];
        for (const auto& [sub_col, sub_v] : subs) {
            if (sub_col == col) {
                v = sub_v;
                break;
            }
        }
        lin += w * v;
    }
    if (plan.binary) {
        return noise < sigmoid(lin) ? 1.0 : 0.0;
    }
    return lin + plan.mechanism->sigma * noise;
}

// Exact marginal of one node: independent ancestral draw over its ancestor
// closure with fresh noise.
double sample_marginal(const SemSpec& sem, const std::vector<NodePlan>& plan,
                       const std::vector<char>& needed, std::size_t target_col,
                       std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> values(sem.dag.node_count(), 0.0);
    for (const auto& p : plan) {
        if (!needed[p.column]) continue;
        const double noise = p.binary ? uniform(rng) : normal(rng);
        values[p.column] = eval_mechanism(p, values, noise);
        if (p.column == target_col) break;
    }
    return values[target_col];
}

}  // namespace

Table sem_sample(const SemSpec& sem, std::size_t n, uint64_t seed) {
    return interventional_sample(sem, EdgeRemovalSet{}, SurrogatePolicy{}, n, seed);
}

Table interventional_sample(const SemSpec& sem, const EdgeRemovalSet& removed,
                            const SurrogatePolicy& policy, std::size_t n, uint64_t seed) {
    if (n < 1) throw ValidationError("sample size must be >= 1");
    for (const auto& r : removed.removed) {
        if (!sem.dag.has_edge(r.from, r.to)) {
            throw ValidationError("removed edge " + r.from + " -> " + r.to +
                                  " does not exist in the SEM DAG");
        }
    }
    policy.validate(sem.dag, removed);

    const auto topo = topological_order(sem.dag);
    const auto plan = build_plan(sem, topo);
    const std::size_t d = sem.dag.node_count();

    // Substitution lists per child column, ordered by parent name for a fixed
    // surrogate draw order.
    struct Sub {
        std::size_t parent_col;
        const SurrogatePolicy::Entry* entry;
    };
    std::vector<std::vector<Sub>> subs_for(d);
    for (const auto& r : removed.removed) {  // removal sets are sorted by (from, to)
        subs_for[sem.dag.node_index(r.to)].push_back(
            {sem.dag.node_index(r.from), &policy.entry_for({r.from, r.to})});
    }

    // Ancestor closures needed for marginal draws.
    std::vector<std::vector<char>> marginal_closure(d);
    for (std::size_t col = 0; col < d; ++col) {
        bool needed = false;
        for (const auto& subs : subs_for) {
            for (const auto& s : subs) {
                if (s.parent_col == col && s.entry->kind == SurrogatePolicy::Kind::MarginalSample) {
                    needed = true;
                }
            }
        }
        if (!needed) continue;
        std::vector<char> mask(d, 0);
        mask[col] = 1;
        for (const auto& a : ancestors(sem.dag, sem.dag.node(col).name)) {
            mask[sem.dag.node_index(a)] = 1;
        }
        marginal_closure[col] = std::move(mask);
    }

    // One noise value per (row, node). The block is drawn up front so that
    // surrogate draws never shift a node's own noise stream.
    std::mt19937_64 noise_rng(mix_seed(seed, "sem-noise"));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> noise(n * d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < d; ++j) {
            noise[r * d + j] = plan[j].binary ? uniform(noise_rng) : normal(noise_rng);
        }
    }

    std::mt19937_64 surrogate_rng(mix_seed(seed, "sem-surrogate"));

    std::vector<Column> schema = sem.schema();
    std::vector<double> data;
    data.reserve(n * d);
    std::vector<double> values(d, 0.0);
    std::vector<std::pair<std::size_t, double>> row_subs;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < d; ++j) {
            const NodePlan& p = plan[j];
            const double z = noise[r * d + j];
            const auto& subs = subs_for[p.column];
            if (subs.empty()) {
                values[p.column] = eval_mechanism(p, values, z);
            } else {
                row_subs.clear();
                for (const auto& s : subs) {
                    double v;
                    if (s.entry->kind == SurrogatePolicy::Kind::FixedValue) {
                        v = s.entry->value;
                    } else {
                        v = sample_marginal(sem, plan, marginal_closure[s.parent_col],
                                            s.parent_col, surrogate_rng);
                    }
                    row_subs.emplace_back(s.parent_col, v);
                }
                values[p.column] = eval_mechanism_substituted(p, values, row_subs, z);
            }
        }
        data.insert(data.end(), values.begin(), values.end());
    }
    return Table(std::move(schema), std::move(data));
}

Table inject_direct_bias(const Table& table, const std::string& protected_col,
                         const std::string& target_col, double disadvantaged, double beta,
                         uint64_t seed) {
    const std::size_t a = table.column_index(protected_col);
    const std::size_t y = table.column_index(target_col);
    if (table.schema()[y].kind != ColumnKind::Binary) {
        throw ValidationError("bias injection target '" + target_col + "' must be binary");
    }
    if (beta < 0.0 || beta > 1.0) {
        throw ValidationError("bias probability must lie in [0, 1]");
    }
    std::mt19937_64 rng(mix_seed(seed, "bias"));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Table out = table;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        if (out.at(r, a) == disadvantaged && out.at(r, y) == 1.0) {
            if (uniform(rng) < beta) out.at(r, y) = 0.0;
        }
    }
    return out;
}

}  // namespace fairsynth
