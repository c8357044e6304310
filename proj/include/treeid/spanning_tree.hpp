#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "treeid/graph.hpp"

namespace treeid {

// Edge subset of a graph certified to be a spanning tree. Carries both the
// sorted edge list and the indicator over all edges of the graph.
class SpanningTree {
public:
    // Throws PreconditionError unless `edges` spans `graph` without cycles.
    static SpanningTree certify(const Graph& graph, std::vector<EdgeId> edges);

    const EdgeSet& edges() const noexcept { return edges_; }
    const std::vector<bool>& indicator() const noexcept { return indicator_; }
    bool contains(EdgeId id) const { return id < indicator_.size() && indicator_[id]; }
    std::size_t size() const noexcept { return edges_.size(); }

    // Edges of the graph outside the tree, ascending.
    EdgeSet cotree() const;

    bool operator==(const SpanningTree& other) const { return edges_ == other.edges_; }
    // Lexicographic on the sorted edge tuple; used for every tie-break.
    std::strong_ordering operator<=>(const SpanningTree& other) const {
        return edges_ <=> other.edges_;
    }

private:
    SpanningTree(EdgeSet edges, std::vector<bool> indicator)
        : edges_(std::move(edges)), indicator_(std::move(indicator)) {}

    EdgeSet edges_;
    std::vector<bool> indicator_;
};

bool is_spanning_tree(const Graph& graph, std::span<const EdgeId> edges);

// Visits every spanning tree containing `required` exactly once, in
// lexicographic order of the sorted edge tuple. The visitor returns false to
// stop early. Returns the number of trees visited.
std::size_t for_each_spanning_tree(const Graph& graph, std::span<const EdgeId> required,
                                   const std::function<bool(const SpanningTree&)>& visit);

std::vector<SpanningTree> enumerate_spanning_trees(const Graph& graph,
                                                   std::span<const EdgeId> required = {});

using TreeCount = boost::multiprecision::cpp_int;

// Matrix-tree theorem: determinant of the Laplacian with the row and column of
// `removed_vertex` deleted, evaluated with fraction-free elimination.
TreeCount count_spanning_trees(const Graph& graph, VertexIndex removed_vertex = 0);

// Kruskal over `required` first, then by descending weight with ties broken by
// ascending edge id. Throws InfeasibleConstraint when `required` has a cycle
// and PreconditionError when the graph is disconnected.
SpanningTree max_weight_spanning_tree(const Graph& graph, std::span<const double> weights,
                                      std::span<const EdgeId> required = {});

} // namespace treeid
