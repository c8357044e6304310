#include "treeid/placement.hpp"

#include <algorithm>
#include <cmath>

#include "treeid/error.hpp"
#include "treeid/flow.hpp"
#include "treeid/union_find.hpp"

namespace treeid {

Placement::Placement(std::vector<EdgeId> sensor_edges) : edges_(std::move(sensor_edges)) {
    auto sorted = edges_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw PreconditionError("placement measures an edge twice");
}

std::optional<std::size_t> Placement::sensor_on(EdgeId id) const {
    auto it = std::find(edges_.begin(), edges_.end(), id);
    if (it == edges_.end())
        return std::nullopt;
    return static_cast<std::size_t>(it - edges_.begin());
}

bool is_valid_placement(const Graph& graph, const Placement& placement) {
    std::vector<bool> measured(graph.num_edges(), false);
    for (EdgeId id : placement.sensor_edges()) {
        if (id >= graph.num_edges())
            return false;
        measured[id] = true;
    }
    if (graph.num_edges() - placement.size() + 1 != graph.num_vertices())
        return false;
    UnionFind uf(graph.num_vertices());
    for (const auto& e : graph.edges())
        if (!measured[e.id] && !uf.unite(e.from, e.to))
            return false;
    return uf.components() == 1;
}

Placement placement_from_tree(const Graph& graph, const SpanningTree& tree) {
    if (tree.indicator().size() != graph.num_edges())
        throw PreconditionError("tree does not belong to this graph");
    return Placement(tree.cotree());
}

SpanningTree tree_from_placement(const Graph& graph, const Placement& placement) {
    if (!is_valid_placement(graph, placement))
        throw InvalidPlacement("unmeasured edges do not form a spanning tree");
    std::vector<bool> measured(graph.num_edges(), false);
    for (EdgeId id : placement.sensor_edges())
        measured[id] = true;
    std::vector<EdgeId> edges;
    for (EdgeId id = 0; id < graph.num_edges(); ++id)
        if (!measured[id])
            edges.push_back(id);
    return SpanningTree::certify(graph, std::move(edges));
}

PlacementFamily enumerate_valid_placements(const Graph& graph, std::span<const EdgeId> forbidden) {
    PlacementFamily family;
    family.restriction = make_edge_set({forbidden.begin(), forbidden.end()});
    for_each_spanning_tree(graph, family.restriction, [&](const SpanningTree& tree) {
        family.placements.push_back(placement_from_tree(graph, tree));
        return true;
    });
    return family;
}

IdentifiabilityVerdict naive_identifiability_oracle(const Graph& graph, const Placement& placement,
                                                    const Eigen::VectorXd& consumption) {
    if (static_cast<std::size_t>(consumption.size()) != graph.num_vertices())
        throw PreconditionError("one consumption value per vertex required");
    check_edge_ids(graph, placement.sensor_edges());

    IdentifiabilityVerdict verdict;
    double scale = 1.0;
    for (VertexIndex v = 0; v < graph.num_vertices(); ++v) {
        if (v == graph.root())
            continue;
        if (!(consumption[static_cast<Eigen::Index>(v)] > 0.0))
            verdict.degenerate_loads = true;
        scale = std::max(scale, std::abs(consumption[static_cast<Eigen::Index>(v)]));
    }
    const double tol = 1e-9 * scale * static_cast<double>(graph.num_vertices());

    std::vector<Eigen::VectorXd> observations;
    for (const auto& tree : enumerate_spanning_trees(graph))
        observations.push_back(tree_flow_observation(graph, tree, placement, consumption));
    verdict.trees = observations.size();

    for (std::size_t i = 0; i < observations.size() && verdict.identifiable; ++i) {
        for (std::size_t j = i + 1; j < observations.size(); ++j) {
            const bool equal = observations[i].size() == 0 ||
                               (observations[i] - observations[j]).cwiseAbs().maxCoeff() <= tol;
            if (equal) {
                verdict.identifiable = false;
                verdict.collision = std::pair{i, j};
                break;
            }
        }
    }
    return verdict;
}

} // namespace treeid
