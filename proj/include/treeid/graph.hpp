#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace treeid {

using VertexIndex = std::size_t;
using EdgeId = std::size_t;

// Sorted, duplicate-free list of edge ids.
using EdgeSet = std::vector<EdgeId>;

EdgeSet make_edge_set(std::vector<EdgeId> ids);

// An undirected edge with a fixed reference direction `from -> to`. Signed
// flows are positive when they follow this direction.
struct Edge {
    EdgeId id;
    VertexIndex from;
    VertexIndex to;

    VertexIndex other(VertexIndex v) const { return v == from ? to : from; }
};

// Undirected multigraph with named vertices and dense edge ids [0, |E|).
//
// Parallel edges are allowed, self-loops are not. The graph is immutable once
// built; vertex and edge order never changes after construction.
class Graph {
public:
    Graph() = default;

    // Edges are given as (from, to) vertex indices; edge i gets id i.
    Graph(std::vector<std::string> vertex_names,
          std::vector<std::pair<VertexIndex, VertexIndex>> endpoints,
          std::optional<VertexIndex> root = std::nullopt);

    std::size_t num_vertices() const noexcept { return names_.size(); }
    std::size_t num_edges() const noexcept { return edges_.size(); }

    const Edge& edge(EdgeId id) const;
    std::span<const Edge> edges() const noexcept { return edges_; }
    std::span<const EdgeId> incident(VertexIndex v) const { return incident_.at(v); }

    const std::string& vertex_name(VertexIndex v) const { return names_.at(v); }
    std::span<const std::string> vertex_names() const noexcept { return names_; }
    std::optional<VertexIndex> find_vertex(const std::string& name) const;
    VertexIndex vertex(const std::string& name) const;

    bool has_root() const noexcept { return root_.has_value(); }
    std::optional<VertexIndex> designated_root() const noexcept { return root_; }
    // The designated root, or vertex 0 when none was given. Its incidence row
    // is the one dropped from the reduced flow equations.
    VertexIndex root() const noexcept { return root_.value_or(0); }

    // Same graph with the reference direction of `id` flipped.
    Graph with_reversed_edge(EdgeId id) const;

private:
    std::vector<std::string> names_;
    std::vector<Edge> edges_;
    std::vector<std::vector<EdgeId>> incident_;
    std::optional<VertexIndex> root_;
};

// Edges incident to the designated root: the virtual subtree every valid
// switch configuration must contain.
EdgeSet root_edges(const Graph& graph);

std::size_t connected_components(const Graph& graph);
std::size_t connected_components(const Graph& graph, std::span<const EdgeId> edges);

// |E| - |V| + number of connected components.
std::size_t circuit_rank(const Graph& graph);

// |V| x |E| node-edge incidence: +1 at the originating vertex, -1 at the
// terminal vertex of each edge.
using IncidenceMatrix = Eigen::MatrixXd;

IncidenceMatrix build_incidence(const Graph& graph);

void check_edge_ids(const Graph& graph, std::span<const EdgeId> ids);

} // namespace treeid
