#include "fairsynth/surrogate.hpp"

namespace fairsynth {

SurrogatePolicy SurrogatePolicy::marginal_for(const EdgeRemovalSet& removal) {
    SurrogatePolicy policy;
    for (const auto& r : removal.removed) {
        policy.entries[{r.from, r.to}] = {Kind::MarginalSample, 0.0};
    }
    return policy;
}

SurrogatePolicy SurrogatePolicy::fixed_for(const EdgeRemovalSet& removal, double value) {
    SurrogatePolicy policy;
    for (const auto& r : removal.removed) {
        policy.entries[{r.from, r.to}] = {Kind::FixedValue, value};
    }
    return policy;
}

void SurrogatePolicy::set_fixed(const Edge& edge, double value) {
    entries[edge] = {Kind::FixedValue, value};
}

void SurrogatePolicy::set_marginal(const Edge& edge) {
    entries[edge] = {Kind::MarginalSample, 0.0};
}

const SurrogatePolicy::Entry& SurrogatePolicy::entry_for(const Edge& edge) const {
    auto it = entries.find(edge);
    if (it == entries.end()) {
        throw ValidationError("surrogate policy misses entry for removed edge " + edge.first +
                              " -> " + edge.second);
    }
    return it->second;
}

void SurrogatePolicy::validate(const CausalDag& dag, const EdgeRemovalSet& removal) const {
    for (const auto& r : removal.removed) {
        const Entry& entry = entry_for({r.from, r.to});
        if (entry.kind == Kind::FixedValue) {
            const auto& parent = dag.node(dag.node_index(r.from));
            if (parent.kind == ColumnKind::Binary && entry.value != 0.0 && entry.value != 1.0) {
                throw ValidationError("fixed surrogate for binary parent '" + r.from +
                                      "' must be 0 or 1");
            }
        }
    }
    for (const auto& [edge, _] : entries) {
        if (!removal.contains(edge.first, edge.second)) {
            throw ValidationError("surrogate policy entry " + edge.first + " -> " + edge.second +
                                  " does not match any removed edge");
        }
    }
}

}  // namespace fairsynth
