#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "fairsynth/dag.hpp"

namespace fairsynth {

/// Supported fairness definitions. The first three constrain conditional
/// independence of the prediction and the protected attribute; the rest
/// constrain directed causal paths only.
enum class FairnessDefinition {
    Ftu,             // protected attribute never used directly
    Dp,              // prediction independent of protected attribute
    Cf,              // independent given explanatory factors R
    NoDirect,        // no protected -> target edge
    NoIndirect,      // no directed protected-to-target path
    NoUnresolved,    // no such path unless it runs through R
    NoProxy,         // no such path through the proxy set P
};

std::string to_string(FairnessDefinition definition);
FairnessDefinition fairness_definition_from_string(const std::string& text);

struct FairnessSpec {
    FairnessDefinition definition = FairnessDefinition::Ftu;
    std::string protected_attr;
    std::string target;
    std::set<std::string> explanatory;  // R; Cf / NoUnresolved only (may be empty)
    std::set<std::string> proxies;      // P; NoProxy only

    /// Checks node existence, protected != target, and that R / P are only
    /// supplied for definitions that use them and exclude protected / target.
    void validate(const CausalDag& dag) const;

    static FairnessSpec from_json(const std::string& text);
    std::string to_json() const;
};

struct RemovedEdge {
    std::string from;
    std::string to;
    std::string rationale;

    bool operator==(const RemovedEdge& o) const { return from == o.from && to == o.to; }
    bool operator<(const RemovedEdge& o) const {
        return std::tie(from, to) < std::tie(o.from, o.to);
    }
};

struct EdgeRemovalSet {
    std::vector<RemovedEdge> removed;  // kept sorted, unique by (from, to)

    bool contains(const std::string& from, const std::string& to) const;
    void add(std::string from, std::string to, std::string rationale);
    std::vector<Edge> edges() const;
    std::size_t size() const { return removed.size(); }
    bool empty() const { return removed.empty(); }

    static EdgeRemovalSet from_json(const std::string& text);
    std::string to_json() const;
};

/// Computes the edges whose removal makes data generated under the modified
/// graph fair per the requested definition, with the original `dag` acting
/// as the evaluation graph for all independence checks.
///
/// For Cf/Dp this removes every edge between the target and a Markov-boundary
/// member that is dependent on the protected attribute given R, and breaks
/// remaining spouse links of dependent members by dropping the target-side
/// edge to the shared child (the same tie-break Ftu uses). The procedure
/// iterates to a fixed point so that no dependent member survives in the
/// post-removal boundary.
EdgeRemovalSet edges_to_remove(const CausalDag& dag, const FairnessSpec& spec);

/// Convenience: dag with the removal set applied.
CausalDag apply_removal(const CausalDag& dag, const EdgeRemovalSet& removal);

enum class PerturbMode { Remove, Add, Reverse };

std::string to_string(PerturbMode mode);
PerturbMode perturb_mode_from_string(const std::string& text);

/// Randomly removes / adds / reverses `count` edges. Additions preserve
/// acyclicity and never run from the protected attribute to the target or
/// one of its ancestors (no new indirect bias); reversals preserve
/// acyclicity. Deterministic under seed; throws InfeasiblePerturbationError
/// when no admissible edge exists at some step.
CausalDag perturb_dag(const CausalDag& dag, PerturbMode mode, int count,
                      const FairnessSpec& guard, uint64_t seed);

}  // namespace fairsynth
