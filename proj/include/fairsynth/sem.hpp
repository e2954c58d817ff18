#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fairsynth/dag.hpp"
#include "fairsynth/surrogate.hpp"
#include "fairsynth/table.hpp"

namespace fairsynth {

/// Ground-truth structural equation for one node. Continuous nodes are
/// linear-Gaussian, binary nodes logistic-Bernoulli; the restriction buys
/// closed-form checks for everything downstream.
struct Mechanism {
    enum class Type { Linear, Logistic };

    Type type = Type::Linear;
    std::map<std::string, double> weights;  // one entry per DAG parent
    double intercept = 0.0;
    double sigma = 1.0;  // Linear only, > 0
};

struct SemSpec {
    CausalDag dag;
    std::map<std::string, Mechanism> mechanisms;

    SemSpec(CausalDag dag, std::map<std::string, Mechanism> mechanisms);

    static SemSpec from_json(const std::string& text);
    static SemSpec load_file(const std::string& path);
    std::string to_json() const;

    std::vector<Column> schema() const;
};

/// n rows by topological-order ancestral sampling; deterministic under seed.
Table sem_sample(const SemSpec& sem, std::size_t n, uint64_t seed);

/// For each row with protected == disadvantaged and target == 1, the target
/// is flipped to 0 independently with probability beta (never 0 -> 1).
Table inject_direct_bias(const Table& table, const std::string& protected_col,
                         const std::string& target_col, double disadvantaged, double beta,
                         uint64_t seed);

/// Ancestral sampling where each removed edge (i -> j) feeds the surrogate
/// value into f_j in place of the sampled parent; the sampled X_i itself is
/// left untouched. MarginalSample draws an exact independent realization of
/// the parent (fresh ancestral sub-sample).
Table interventional_sample(const SemSpec& sem, const EdgeRemovalSet& removed,
                            const SurrogatePolicy& policy, std::size_t n, uint64_t seed);

}  // namespace fairsynth
