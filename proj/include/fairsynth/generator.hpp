#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fairsynth/dag.hpp"
#include "fairsynth/nn.hpp"
#include "fairsynth/preprocess.hpp"
#include "fairsynth/surrogate.hpp"
#include "fairsynth/table.hpp"

namespace fairsynth {

/// Weights of the sequential generator: a hidden block shared by every node
/// (two layers) and one private affine head per node. Node j's sub-generator
/// reads its parents (other input slots stay zero) plus its own noise slot,
/// so the effective arity is |parents| + 1. Binary nodes squash the head
/// through a sigmoid so their scores live in (0, 1).
struct GeneratorWeights {
    nn::Dense l1;          // (d+1) x H
    nn::Dense l2;          // H x H
    nn::Matrix head_w;     // H x d
    nn::RowVector head_b;  // d
    double leak = 0.2;
    std::vector<char> binary;  // per column; not serialized, derived from the DAG

    GeneratorWeights() = default;
    GeneratorWeights(std::size_t columns, std::size_t hidden);
    GeneratorWeights(const CausalDag& dag, std::size_t hidden);

    std::size_t columns() const { return static_cast<std::size_t>(head_w.cols()); }
    std::size_t hidden() const { return static_cast<std::size_t>(head_w.rows()); }

    void init_uniform(std::mt19937_64& rng);
    void flatten(std::vector<double>& out) const;
    void unflatten(const std::vector<double>& in);
    std::size_t parameter_count() const;
};

/// Trained (or plugged-in) sequential causal generator. Immutable after
/// construction; generation is const and owns its random state, so one model
/// serves many debiased datasets without retraining.
class GeneratorModel {
public:
    /// Raw-space structural function of one node: f(parents, z). Used to plug
    /// ground-truth mechanisms into the generation path for oracle checks.
    using NodeFn = std::function<double(std::span<const double>, double)>;

    GeneratorModel(CausalDag dag, Standardizer stats, GeneratorWeights weights,
                   Table marginal_pool);

    static GeneratorModel with_custom(CausalDag dag, std::vector<NodeFn> node_fns,
                                      Table marginal_pool);

    const CausalDag& dag() const { return dag_; }
    const Standardizer& stats() const { return stats_; }
    const GeneratorWeights& weights() const { return weights_; }
    const Table& marginal_pool() const { return marginal_pool_; }
    bool has_custom_nodes() const { return !custom_.empty(); }

    /// Topological sweep; roots from noise alone, children from generated
    /// parents with surrogate substitutions on removed incoming edges. Binary
    /// columns are rounded after generation, continuous de-standardized.
    Table generate(std::size_t n, const EdgeRemovalSet& removed, const SurrogatePolicy& policy,
                   uint64_t seed) const;

    /// One node's sub-generator applied to explicit (possibly substituted)
    /// parent columns and noise. Raw-space in and out, no rounding; pure.
    std::vector<double> generate_node(
        const std::string& node, const std::map<std::string, std::vector<double>>& parent_values,
        const std::map<std::string, std::vector<double>>& substitutions,
        std::span<const double> noise) const;

    void save(const std::string& path) const;
    static GeneratorModel load(const std::string& path);

    /// Hash over architecture + weights, for reproducibility checks.
    uint64_t weights_hash() const;

private:
    CausalDag dag_;
    Standardizer stats_;
    GeneratorWeights weights_;
    Table marginal_pool_;           // raw-space empirical sample per column
    std::vector<NodeFn> custom_;    // non-empty only for plug-in models

    void validate() const;
};

}  // namespace fairsynth
