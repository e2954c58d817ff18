#include "fairsynth/dag.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace fairsynth {

namespace {

using json = nlohmann::json;

// Walks backwards through not-yet-emitted nodes until one repeats.
std::vector<std::string> extract_cycle(const CausalDag& dag, const std::vector<bool>& emitted) {
    std::size_t start = 0;
    for (std::size_t i = 0; i < dag.node_count(); ++i) {
        if (!emitted[i]) start = i;
    }
    std::vector<std::size_t> trail;
    std::vector<int> seen_at(dag.node_count(), -1);
    std::size_t cur = start;
    while (seen_at[cur] < 0) {
        seen_at[cur] = static_cast<int>(trail.size());
        trail.push_back(cur);
        for (std::size_t p : dag.parents(cur)) {
            if (!emitted[p]) {
                cur = p;
                break;
            }
        }
    }
    std::vector<std::string> cycle;
    for (std::size_t i = seen_at[cur]; i < trail.size(); ++i) {
        cycle.push_back(dag.node(trail[i]).name);
    }
    std::reverse(cycle.begin(), cycle.end());
    return cycle;
}

}  // namespace

CausalDag::CausalDag(std::vector<DagNode> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].name.empty()) throw ValidationError("node name must be non-empty");
        if (!index_.emplace(nodes_[i].name, i).second) {
            throw ValidationError("duplicate node name '" + nodes_[i].name + "'");
        }
    }
    parents_.resize(nodes_.size());
    children_.resize(nodes_.size());

    std::sort(edges_.begin(), edges_.end());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto& [from, to] = edges_[e];
        if (!has_node(from) || !has_node(to)) {
            throw ValidationError("edge " + from + " -> " + to + " references unknown node");
        }
        if (from == to) throw ValidationError("self-loop on node '" + from + "'");
        if (e > 0 && edges_[e] == edges_[e - 1]) {
            throw ValidationError("duplicate edge " + from + " -> " + to);
        }
        children_[index_.at(from)].push_back(index_.at(to));
        parents_[index_.at(to)].push_back(index_.at(from));
    }
    for (auto& v : parents_) std::sort(v.begin(), v.end());
    for (auto& v : children_) std::sort(v.begin(), v.end());

    // Acyclicity via Kahn's algorithm; on failure report an actual cycle.
    std::vector<std::size_t> indegree(nodes_.size());
    std::deque<std::size_t> ready;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        indegree[i] = parents_[i].size();
        if (indegree[i] == 0) ready.push_back(i);
    }
    std::vector<bool> emitted(nodes_.size(), false);
    std::size_t emitted_count = 0;
    while (!ready.empty()) {
        std::size_t v = ready.front();
        ready.pop_front();
        emitted[v] = true;
        ++emitted_count;
        for (std::size_t c : children_[v]) {
            if (--indegree[c] == 0) ready.push_back(c);
        }
    }
    if (emitted_count != nodes_.size()) {
        throw CycleError(extract_cycle(*this, emitted));
    }
}

bool CausalDag::has_node(const std::string& name) const { return index_.count(name) > 0; }

bool CausalDag::has_edge(const std::string& from, const std::string& to) const {
    return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to});
}

std::size_t CausalDag::node_index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("unknown node '" + name + "'");
    return it->second;
}

std::vector<std::string> CausalDag::parent_names(const std::string& name) const {
    std::vector<std::string> out;
    for (std::size_t p : parents_[node_index(name)]) out.push_back(nodes_[p].name);
    return out;
}

CausalDag CausalDag::with_edges_removed(const std::vector<Edge>& removed) const {
    for (const auto& [from, to] : removed) {
        if (!has_edge(from, to)) {
            throw ValidationError("cannot remove absent edge " + from + " -> " + to);
        }
    }
    std::vector<Edge> kept;
    for (const auto& e : edges_) {
        if (std::find(removed.begin(), removed.end(), e) == removed.end()) kept.push_back(e);
    }
    return CausalDag(nodes_, std::move(kept));
}

CausalDag CausalDag::with_node_removed(const std::string& name) const {
    node_index(name);
    std::vector<DagNode> kept_nodes;
    for (const auto& n : nodes_) {
        if (n.name != name) kept_nodes.push_back(n);
    }
    std::vector<Edge> kept_edges;
    for (const auto& e : edges_) {
        if (e.first != name && e.second != name) kept_edges.push_back(e);
    }
    return CausalDag(std::move(kept_nodes), std::move(kept_edges));
}

bool CausalDag::operator==(const CausalDag& other) const {
    if (edges_ != other.edges_ || nodes_.size() != other.nodes_.size()) return false;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].name != other.nodes_[i].name || nodes_[i].kind != other.nodes_[i].kind) {
            return false;
        }
    }
    return true;
}

CausalDag CausalDag::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("invalid DAG JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("DAG JSON must be an object");
    for (const auto& [key, _] : doc.items()) {
        if (key != "nodes" && key != "edges" && key != "source") {
            throw ValidationError("unexpected key '" + key + "' in DAG JSON");
        }
    }
    if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
        throw ValidationError("DAG JSON requires a 'nodes' array");
    }
    if (!doc.contains("edges") || !doc["edges"].is_array()) {
        throw ValidationError("DAG JSON requires an 'edges' array");
    }
    std::vector<DagNode> nodes;
    for (const auto& n : doc["nodes"]) {
        if (!n.is_object() || !n.contains("name") || !n.contains("kind")) {
            throw ValidationError("each node needs 'name' and 'kind'");
        }
        nodes.push_back({n["name"].get<std::string>(),
                         column_kind_from_string(n["kind"].get<std::string>())});
    }
    std::vector<Edge> edges;
    for (const auto& e : doc["edges"]) {
        if (!e.is_array() || e.size() != 2) {
            throw ValidationError("each edge must be a [from, to] pair");
        }
        edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    return CausalDag(std::move(nodes), std::move(edges));
}

CausalDag CausalDag::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open DAG file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::string CausalDag::to_json() const {
    json doc;
    doc["nodes"] = json::array();
    for (const auto& n : nodes_) {
        doc["nodes"].push_back({{"name", n.name}, {"kind", to_string(n.kind)}});
    }
    doc["edges"] = json::array();
    for (const auto& [from, to] : edges_) {
        doc["edges"].push_back({from, to});
    }
    return doc.dump(2);
}

void CausalDag::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write DAG file '" + path + "'");
    out << to_json() << "\n";
}

std::vector<std::string> topological_order(const CausalDag& dag) {
    // Construction already guarantees acyclicity; min-heap gives the
    // lexicographic tie-break among ready nodes.
    std::vector<std::size_t> indegree(dag.node_count());
    auto cmp = [&dag](std::size_t a, std::size_t b) {
        return dag.node(a).name > dag.node(b).name;
    };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> ready(cmp);
    for (std::size_t i = 0; i < dag.node_count(); ++i) {
        indegree[i] = dag.parents(i).size();
        if (indegree[i] == 0) ready.push(i);
    }
    std::vector<std::string> order;
    order.reserve(dag.node_count());
    while (!ready.empty()) {
        std::size_t v = ready.top();
        ready.pop();
        order.push_back(dag.node(v).name);
        for (std::size_t c : dag.children(v)) {
            if (--indegree[c] == 0) ready.push(c);
        }
    }
    return order;
}

namespace {

std::vector<bool> membership(const CausalDag& dag, const std::set<std::string>& names) {
    std::vector<bool> in(dag.node_count(), false);
    for (const auto& n : names) in[dag.node_index(n)] = true;
    return in;
}

}  // namespace

bool d_separated(const CausalDag& dag, const std::set<std::string>& xs,
                 const std::set<std::string>& ys, const std::set<std::string>& zs) {
    for (const auto& s : {xs, ys, zs}) {
        for (const auto& n : s) dag.node_index(n);
    }
    for (const auto& x : xs) {
        if (ys.count(x)) {
            throw ValidationError("d-separation query sets overlap on node '" + x + "'");
        }
    }
    // Conditioned nodes are separated from everything by convention, so they
    // drop out of the query sets.
    std::set<std::string> x_eff, y_eff;
    for (const auto& x : xs) {
        if (!zs.count(x)) x_eff.insert(x);
    }
    for (const auto& y : ys) {
        if (!zs.count(y)) y_eff.insert(y);
    }
    if (x_eff.empty() || y_eff.empty()) return true;

    const auto in_z = membership(dag, zs);
    const auto in_y = membership(dag, y_eff);

    // Ancestors of the conditioning set (inclusive) — opened colliders.
    std::vector<bool> anc_z = in_z;
    {
        std::deque<std::size_t> frontier;
        for (std::size_t i = 0; i < dag.node_count(); ++i) {
            if (anc_z[i]) frontier.push_back(i);
        }
        while (!frontier.empty()) {
            std::size_t v = frontier.front();
            frontier.pop_front();
            for (std::size_t p : dag.parents(v)) {
                if (!anc_z[p]) {
                    anc_z[p] = true;
                    frontier.push_back(p);
                }
            }
        }
    }

    // Reachability over (node, arrival-direction) states. "up" = arrived from
    // a child, "down" = arrived from a parent.
    enum : int { kUp = 0, kDown = 1 };
    std::vector<std::array<bool, 2>> visited(dag.node_count(), {false, false});
    std::deque<std::pair<std::size_t, int>> frontier;
    for (const auto& x : x_eff) frontier.push_back({dag.node_index(x), kUp});

    while (!frontier.empty()) {
        auto [v, dir] = frontier.front();
        frontier.pop_front();
        if (visited[v][dir]) continue;
        visited[v][dir] = true;
        if (in_y[v]) return false;

        if (dir == kUp) {
            if (!in_z[v]) {
                for (std::size_t p : dag.parents(v)) frontier.push_back({p, kUp});
                for (std::size_t c : dag.children(v)) frontier.push_back({c, kDown});
            }
        } else {
            if (!in_z[v]) {
                for (std::size_t c : dag.children(v)) frontier.push_back({c, kDown});
            }
            if (anc_z[v]) {
                for (std::size_t p : dag.parents(v)) frontier.push_back({p, kUp});
            }
        }
    }
    return true;
}

std::set<std::string> markov_boundary(const CausalDag& dag, const std::string& name) {
    const std::size_t y = dag.node_index(name);
    std::set<std::string> boundary;
    for (std::size_t p : dag.parents(y)) boundary.insert(dag.node(p).name);
    for (std::size_t c : dag.children(y)) {
        boundary.insert(dag.node(c).name);
        for (std::size_t s : dag.parents(c)) {
            if (s != y) boundary.insert(dag.node(s).name);
        }
    }
    boundary.erase(name);
    return boundary;
}

std::vector<std::vector<std::string>> directed_paths(const CausalDag& dag,
                                                     const std::string& from,
                                                     const std::string& to) {
    const std::size_t src = dag.node_index(from);
    const std::size_t dst = dag.node_index(to);
    std::vector<std::vector<std::string>> paths;
    std::vector<std::size_t> stack{src};
    std::function<void()> dfs = [&]() {
        std::size_t v = stack.back();
        if (v == dst) {
            std::vector<std::string> path;
            for (std::size_t i : stack) path.push_back(dag.node(i).name);
            paths.push_back(std::move(path));
            return;
        }
        for (std::size_t c : dag.children(v)) {
            stack.push_back(c);
            dfs();
            stack.pop_back();
        }
    };
    dfs();
    return paths;
}

namespace {

std::set<std::string> closure(const CausalDag& dag, const std::string& name, bool upward) {
    std::set<std::string> out;
    std::deque<std::size_t> frontier{dag.node_index(name)};
    std::vector<bool> seen(dag.node_count(), false);
    seen[frontier.front()] = true;
    while (!frontier.empty()) {
        std::size_t v = frontier.front();
        frontier.pop_front();
        const auto& next = upward ? dag.parents(v) : dag.children(v);
        for (std::size_t u : next) {
            if (!seen[u]) {
                seen[u] = true;
                out.insert(dag.node(u).name);
                frontier.push_back(u);
            }
        }
    }
    out.erase(name);
    return out;
}

}  // namespace

std::set<std::string> ancestors(const CausalDag& dag, const std::string& name) {
    return closure(dag, name, true);
}

std::set<std::string> descendants(const CausalDag& dag, const std::string& name) {
    return closure(dag, name, false);
}

}  // namespace fairsynth
