#pragma once

#include <map>
#include <string>

#include "fairsynth/dag.hpp"
#include "fairsynth/fairness.hpp"

namespace fairsynth {

/// Per removed edge (i -> j): where the child's generator gets the value that
/// stands in for the severed parent. Either a fresh draw from the parent's
/// marginal per generated row, or one fixed value for all rows.
struct SurrogatePolicy {
    enum class Kind { MarginalSample, FixedValue };

    struct Entry {
        Kind kind = Kind::MarginalSample;
        double value = 0.0;  // FixedValue only
    };

    std::map<Edge, Entry> entries;

    static SurrogatePolicy marginal_for(const EdgeRemovalSet& removal);
    static SurrogatePolicy fixed_for(const EdgeRemovalSet& removal, double value);

    void set_fixed(const Edge& edge, double value);
    void set_marginal(const Edge& edge);
    const Entry& entry_for(const Edge& edge) const;  // throws if missing

    /// Exactly one entry per removed edge; FixedValue entries must respect
    /// the parent column's kind (binary parents take only 0/1).
    void validate(const CausalDag& dag, const EdgeRemovalSet& removal) const;
};

}  // namespace fairsynth
