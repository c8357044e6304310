#include "treeid/graph.hpp"

#include <algorithm>
#include <unordered_map>

#include "treeid/error.hpp"
#include "treeid/union_find.hpp"

namespace treeid {

EdgeSet make_edge_set(std::vector<EdgeId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

Graph::Graph(std::vector<std::string> vertex_names,
             std::vector<std::pair<VertexIndex, VertexIndex>> endpoints,
             std::optional<VertexIndex> root)
    : names_(std::move(vertex_names)), incident_(names_.size()), root_(root) {
    std::unordered_map<std::string, VertexIndex> seen;
    for (VertexIndex v = 0; v < names_.size(); ++v) {
        if (names_[v].empty())
            throw MalformedGraph("empty vertex id");
        if (!seen.emplace(names_[v], v).second)
            throw MalformedGraph("duplicate vertex id '" + names_[v] + "'");
    }
    if (root_ && *root_ >= names_.size())
        throw MalformedGraph("root vertex out of range");

    edges_.reserve(endpoints.size());
    for (const auto& [from, to] : endpoints) {
        const EdgeId id = edges_.size();
        if (from >= names_.size() || to >= names_.size())
            throw MalformedGraph("edge " + std::to_string(id) + " references an unknown vertex");
        if (from == to)
            throw MalformedGraph("edge " + std::to_string(id) + " is a self-loop at '" +
                                 names_[from] + "'");
        edges_.push_back({id, from, to});
        incident_[from].push_back(id);
        incident_[to].push_back(id);
    }
}

const Edge& Graph::edge(EdgeId id) const {
    if (id >= edges_.size())
        throw LookupError("unknown edge id " + std::to_string(id));
    return edges_[id];
}

std::optional<VertexIndex> Graph::find_vertex(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end())
        return std::nullopt;
    return static_cast<VertexIndex>(it - names_.begin());
}

VertexIndex Graph::vertex(const std::string& name) const {
    if (auto v = find_vertex(name))
        return *v;
    throw LookupError("unknown vertex id '" + name + "'");
}

Graph Graph::with_reversed_edge(EdgeId id) const {
    edge(id);
    std::vector<std::pair<VertexIndex, VertexIndex>> endpoints;
    endpoints.reserve(edges_.size());
    for (const auto& e : edges_)
        endpoints.emplace_back(e.id == id ? e.to : e.from, e.id == id ? e.from : e.to);
    return Graph(names_, std::move(endpoints), root_);
}

EdgeSet root_edges(const Graph& graph) {
    if (!graph.has_root())
        return {};
    const auto inc = graph.incident(graph.root());
    return make_edge_set({inc.begin(), inc.end()});
}

std::size_t connected_components(const Graph& graph, std::span<const EdgeId> edges) {
    UnionFind uf(graph.num_vertices());
    for (EdgeId id : edges) {
        const auto& e = graph.edge(id);
        uf.unite(e.from, e.to);
    }
    return uf.components();
}

std::size_t connected_components(const Graph& graph) {
    UnionFind uf(graph.num_vertices());
    for (const auto& e : graph.edges())
        uf.unite(e.from, e.to);
    return uf.components();
}

std::size_t circuit_rank(const Graph& graph) {
    return graph.num_edges() + connected_components(graph) - graph.num_vertices();
}

IncidenceMatrix build_incidence(const Graph& graph) {
    IncidenceMatrix b = IncidenceMatrix::Zero(static_cast<Eigen::Index>(graph.num_vertices()),
                                              static_cast<Eigen::Index>(graph.num_edges()));
    for (const auto& e : graph.edges()) {
        if (e.from == e.to)
            throw MalformedGraph("self-loop on edge " + std::to_string(e.id));
        b(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.id)) = 1.0;
        b(static_cast<Eigen::Index>(e.to), static_cast<Eigen::Index>(e.id)) = -1.0;
    }
    return b;
}

void check_edge_ids(const Graph& graph, std::span<const EdgeId> ids) {
    for (EdgeId id : ids)
        graph.edge(id);
}

} // namespace treeid
