#include "fairsynth/fairness.hpp"

#include <algorithm>
#include <random>

#include "json.hpp"

namespace fairsynth {

using json = nlohmann::json;

std::string to_string(FairnessDefinition definition) {
    switch (definition) {
        case FairnessDefinition::Ftu: return "ftu";
        case FairnessDefinition::Dp: return "dp";
        case FairnessDefinition::Cf: return "cf";
        case FairnessDefinition::NoDirect: return "no_direct";
        case FairnessDefinition::NoIndirect: return "no_indirect";
        case FairnessDefinition::NoUnresolved: return "no_unresolved";
        case FairnessDefinition::NoProxy: return "no_proxy";
    }
    return "ftu";
}

FairnessDefinition fairness_definition_from_string(const std::string& text) {
    if (text == "ftu") return FairnessDefinition::Ftu;
    if (text == "dp") return FairnessDefinition::Dp;
    if (text == "cf") return FairnessDefinition::Cf;
    if (text == "no_direct") return FairnessDefinition::NoDirect;
    if (text == "no_indirect") return FairnessDefinition::NoIndirect;
    if (text == "no_unresolved") return FairnessDefinition::NoUnresolved;
    if (text == "no_proxy") return FairnessDefinition::NoProxy;
    throw ValidationError("unknown fairness definition '" + text + "'");
}

void FairnessSpec::validate(const CausalDag& dag) const {
    dag.node_index(protected_attr);
    dag.node_index(target);
    if (protected_attr == target) {
        throw ValidationError("protected attribute and target must differ");
    }
    const bool uses_r = definition == FairnessDefinition::Cf ||
                        definition == FairnessDefinition::NoUnresolved;
    const bool uses_p = definition == FairnessDefinition::NoProxy;
    if (!uses_r && !explanatory.empty()) {
        throw ValidationError("explanatory set only applies to cf / no_unresolved");
    }
    if (!uses_p && !proxies.empty()) {
        throw ValidationError("proxy set only applies to no_proxy");
    }
    for (const auto& r : explanatory) {
        dag.node_index(r);
        if (r == protected_attr || r == target) {
            throw ValidationError("explanatory set must exclude protected and target");
        }
    }
    for (const auto& p : proxies) {
        dag.node_index(p);
        if (p == protected_attr || p == target) {
            throw ValidationError("proxy set must exclude protected and target");
        }
    }
}

FairnessSpec FairnessSpec::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("invalid fairness spec JSON: ") + e.what());
    }
    FairnessSpec spec;
    spec.definition = fairness_definition_from_string(doc.at("definition").get<std::string>());
    spec.protected_attr = doc.at("protected").get<std::string>();
    spec.target = doc.at("target").get<std::string>();
    if (doc.contains("explanatory")) {
        for (const auto& r : doc["explanatory"]) spec.explanatory.insert(r.get<std::string>());
    }
    if (doc.contains("proxies")) {
        for (const auto& p : doc["proxies"]) spec.proxies.insert(p.get<std::string>());
    }
    return spec;
}

std::string FairnessSpec::to_json() const {
    json doc;
    doc["definition"] = to_string(definition);
    doc["protected"] = protected_attr;
    doc["target"] = target;
    doc["explanatory"] = explanatory;
    doc["proxies"] = proxies;
    return doc.dump();
}

bool EdgeRemovalSet::contains(const std::string& from, const std::string& to) const {
    RemovedEdge probe{from, to, ""};
    auto it = std::lower_bound(removed.begin(), removed.end(), probe);
    return it != removed.end() && *it == probe;
}

void EdgeRemovalSet::add(std::string from, std::string to, std::string rationale) {
    RemovedEdge entry{std::move(from), std::move(to), std::move(rationale)};
    auto it = std::lower_bound(removed.begin(), removed.end(), entry);
    if (it != removed.end() && *it == entry) return;  // first rationale wins
    removed.insert(it, std::move(entry));
}

std::vector<Edge> EdgeRemovalSet::edges() const {
    std::vector<Edge> out;
    out.reserve(removed.size());
    for (const auto& r : removed) out.emplace_back(r.from, r.to);
    return out;
}

EdgeRemovalSet EdgeRemovalSet::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("invalid removal set JSON: ") + e.what());
    }
    EdgeRemovalSet set;
    for (const auto& r : doc.at("removed")) {
        set.add(r.at("from").get<std::string>(), r.at("to").get<std::string>(),
                r.value("rationale", ""));
    }
    return set;
}

std::string EdgeRemovalSet::to_json() const {
    json doc;
    doc["removed"] = json::array();
    for (const auto& r : removed) {
        doc["removed"].push_back({{"from", r.from}, {"to", r.to}, {"rationale", r.rationale}});
    }
    return doc.dump(2);
}

CausalDag apply_removal(const CausalDag& dag, const EdgeRemovalSet& removal) {
    return dag.with_edges_removed(removal.edges());
}

namespace {

// Dependence of a boundary member on the protected attribute given R,
// evaluated in the original graph. The protected attribute itself can never
// be separated from itself; R members are separated by convention.
bool dependent_on_protected(const CausalDag& eval_graph, const std::string& member,
                            const FairnessSpec& spec, const std::set<std::string>& r) {
    if (member == spec.protected_attr) return true;
    if (r.count(member)) return false;
    return !d_separated(eval_graph, {spec.protected_attr}, {member}, r);
}

// Conditional-independence removal (cf with explicit R; dp is R = {}).
// Iterates: drop direct edges between the target and dependent boundary
// members, then break surviving dependent spouse links by dropping the
// target-side edge into the shared child, until the boundary is clean.
EdgeRemovalSet remove_for_conditional(const CausalDag& dag, const FairnessSpec& spec,
                                      const std::set<std::string>& r,
                                      const std::string& tag) {
    EdgeRemovalSet removal;
    CausalDag current = dag;
    const std::string& y = spec.target;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& member : markov_boundary(current, y)) {
            if (!dependent_on_protected(dag, member, spec, r)) continue;
            if (current.has_edge(member, y)) {
                removal.add(member, y, tag + ": boundary member '" + member +
                                           "' depends on protected attribute");
                changed = true;
            }
            if (current.has_edge(y, member)) {
                removal.add(y, member, tag + ": boundary member '" + member +
                                           "' depends on protected attribute");
                changed = true;
            }
        }
        if (changed) {
            current = apply_removal(dag, removal);
            continue;
        }
        // No direct edges left to drop; surviving dependent members are pure
        // spouses. Sever them at the shared child, keeping the member's own
        // mechanism intact.
        for (const auto& member : markov_boundary(current, y)) {
            if (!dependent_on_protected(dag, member, spec, r)) continue;
            const std::size_t m = current.node_index(member);
            const std::size_t yi = current.node_index(y);
            for (std::size_t c : current.children(yi)) {
                const auto& kids = current.children(m);
                if (std::binary_search(kids.begin(), kids.end(), c)) {
                    removal.add(y, current.node(c).name,
                                tag + ": severs spouse link of '" + member +
                                    "' via shared child '" + current.node(c).name + "'");
                    changed = true;
                }
            }
        }
        if (changed) current = apply_removal(dag, removal);
    }
    return removal;
}

EdgeRemovalSet remove_for_ftu(const CausalDag& dag, const FairnessSpec& spec) {
    EdgeRemovalSet removal;
    const std::string& a = spec.protected_attr;
    const std::string& y = spec.target;
    if (dag.has_edge(a, y)) {
        removal.add(a, y, "ftu: direct edge between protected attribute and target");
    }
    if (dag.has_edge(y, a)) {
        removal.add(y, a, "ftu: direct edge between protected attribute and target");
    }
    // Shared children: drop the target-side edge so the protected attribute's
    // own mechanism is left untouched.
    const std::size_t ai = dag.node_index(a);
    const std::size_t yi = dag.node_index(y);
    for (std::size_t c : dag.children(yi)) {
        const auto& kids = dag.children(ai);
        if (std::binary_search(kids.begin(), kids.end(), c)) {
            removal.add(y, dag.node(c).name,
                        "ftu: shared child '" + dag.node(c).name +
                            "', target-side edge removed");
        }
    }
    return removal;
}

// Path-based definitions: remove the final edge of each offending directed
// protected-to-target path.
enum class PathFilter { All, NotBlockedByR, BlockedByP };

EdgeRemovalSet remove_for_paths(const CausalDag& dag, const FairnessSpec& spec,
                                PathFilter filter, const std::string& tag) {
    EdgeRemovalSet removal;
    for (const auto& path : directed_paths(dag, spec.protected_attr, spec.target)) {
        bool offending = true;
        if (filter != PathFilter::All) {
            bool blocked = false;
            const std::set<std::string>& blockers =
                filter == PathFilter::NotBlockedByR ? spec.explanatory : spec.proxies;
            for (std::size_t i = 1; i + 1 < path.size(); ++i) {
                if (blockers.count(path[i])) {
                    blocked = true;
                    break;
                }
            }
            offending = filter == PathFilter::NotBlockedByR ? !blocked : blocked;
        }
        if (offending) {
            removal.add(path[path.size() - 2], path.back(),
                        tag + ": final edge of directed path from protected attribute");
        }
    }
    return removal;
}

}  // namespace

EdgeRemovalSet edges_to_remove(const CausalDag& dag, const FairnessSpec& spec) {
    spec.validate(dag);
    switch (spec.definition) {
        case FairnessDefinition::Ftu:
            return remove_for_ftu(dag, spec);
        case FairnessDefinition::Dp:
            return remove_for_conditional(dag, spec, {}, "dp");
        case FairnessDefinition::Cf:
            return remove_for_conditional(dag, spec, spec.explanatory, "cf");
        case FairnessDefinition::NoDirect: {
            EdgeRemovalSet removal;
            if (dag.has_edge(spec.protected_attr, spec.target)) {
                removal.add(spec.protected_attr, spec.target,
                            "no_direct: direct edge from protected attribute to target");
            }
            return removal;
        }
        case FairnessDefinition::NoIndirect:
            return remove_for_paths(dag, spec, PathFilter::All, "no_indirect");
        case FairnessDefinition::NoUnresolved:
            return remove_for_paths(dag, spec, PathFilter::NotBlockedByR, "no_unresolved");
        case FairnessDefinition::NoProxy:
            return remove_for_paths(dag, spec, PathFilter::BlockedByP, "no_proxy");
    }
    throw ValidationError("unreachable fairness definition");
}

std::string to_string(PerturbMode mode) {
    switch (mode) {
        case PerturbMode::Remove: return "remove";
        case PerturbMode::Add: return "add";
        case PerturbMode::Reverse: return "reverse";
    }
    return "remove";
}

PerturbMode perturb_mode_from_string(const std::string& text) {
    if (text == "remove") return PerturbMode::Remove;
    if (text == "add") return PerturbMode::Add;
    if (text == "reverse") return PerturbMode::Reverse;
    throw ValidationError("unknown perturbation mode '" + text + "'");
}

namespace {

bool creates_cycle(const CausalDag& dag, const std::string& from, const std::string& to) {
    // Adding from -> to closes a cycle iff `from` is reachable from `to`.
    return from == to || descendants(dag, to).count(from) > 0;
}

std::vector<Edge> addable_edges(const CausalDag& dag, const FairnessSpec& guard) {
    // No new indirect bias: reject any edge that would lie on a fresh
    // directed path from the protected attribute to the target. The
    // protected -> ancestor(target) ban is the u == protected case; the
    // general form keeps the invariant under sequential additions.
    std::set<std::string> reaches_target = ancestors(dag, guard.target);
    reaches_target.insert(guard.target);
    std::set<std::string> reached_by_protected = descendants(dag, guard.protected_attr);
    reached_by_protected.insert(guard.protected_attr);
    std::vector<Edge> out;
    for (const auto& u : dag.nodes()) {
        for (const auto& v : dag.nodes()) {
            if (u.name == v.name || dag.has_edge(u.name, v.name)) continue;
            if (creates_cycle(dag, u.name, v.name)) continue;
            if (reached_by_protected.count(u.name) && reaches_target.count(v.name)) continue;
            out.emplace_back(u.name, v.name);
        }
    }
    return out;
}

}  // namespace

CausalDag perturb_dag(const CausalDag& dag, PerturbMode mode, int count,
                      const FairnessSpec& guard, uint64_t seed) {
    if (count < 1) throw ValidationError("perturbation count must be >= 1");
    guard.validate(dag);
    std::mt19937_64 rng(mix_seed(seed, "perturb"));
    CausalDag current = dag;

    for (int step = 0; step < count; ++step) {
        switch (mode) {
            case PerturbMode::Remove: {
                const auto& edges = current.edges();
                if (edges.empty()) {
                    throw InfeasiblePerturbationError(
                        "cannot remove an edge from an empty-edge graph");
                }
                std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
                current = current.with_edges_removed({edges[pick(rng)]});
                break;
            }
            case PerturbMode::Add: {
                auto candidates = addable_edges(current, guard);
                if (candidates.empty()) {
                    throw InfeasiblePerturbationError(
                        "no admissible edge to add (acyclicity / bias guard)");
                }
                std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
                const Edge chosen = candidates[pick(rng)];
                auto edges = current.edges();
                edges.push_back(chosen);
                current = CausalDag(current.nodes(), std::move(edges));
                break;
            }
            case PerturbMode::Reverse: {
                std::vector<Edge> reversible;
                for (const auto& [from, to] : current.edges()) {
                    CausalDag without = current.with_edges_removed({{from, to}});
                    if (!creates_cycle(without, to, from)) reversible.emplace_back(from, to);
                }
                if (reversible.empty()) {
                    throw InfeasiblePerturbationError(
                        "no edge can be reversed without creating a cycle");
                }
                std::uniform_int_distribution<std::size_t> pick(0, reversible.size() - 1);
                const auto [from, to] = reversible[pick(rng)];
                auto edges = current.with_edges_removed({{from, to}}).edges();
                edges.emplace_back(to, from);
                current = CausalDag(current.nodes(), std::move(edges));
                break;
            }
        }
    }
    return current;
}

}  // namespace fairsynth
