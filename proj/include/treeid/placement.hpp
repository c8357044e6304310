#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "treeid/graph.hpp"
#include "treeid/spanning_tree.hpp"

namespace treeid {

// Measured edges. Sensor k sits on edge sensor_edge(k); the order is fixed at
// construction and defines the order of observation vectors.
class Placement {
public:
    Placement() = default;
    explicit Placement(std::vector<EdgeId> sensor_edges);

    std::size_t size() const noexcept { return edges_.size(); }
    bool empty() const noexcept { return edges_.empty(); }
    EdgeId sensor_edge(std::size_t k) const { return edges_.at(k); }
    std::span<const EdgeId> sensor_edges() const noexcept { return edges_; }
    // Sensor index on `id`, if measured.
    std::optional<std::size_t> sensor_on(EdgeId id) const;

    bool operator==(const Placement&) const = default;

private:
    std::vector<EdgeId> edges_;
};

struct PlacementFamily {
    std::vector<Placement> placements;
    // Edges no member measures (the virtual root subtree in practice).
    EdgeSet restriction;
};

// True when the unmeasured edges form a spanning tree.
bool is_valid_placement(const Graph& graph, const Placement& placement);

// Set complement in both directions. Sensors of the returned placement are in
// ascending edge order.
Placement placement_from_tree(const Graph& graph, const SpanningTree& tree);
SpanningTree tree_from_placement(const Graph& graph, const Placement& placement);

// Complements of every spanning tree containing `forbidden`, in tree
// enumeration order.
PlacementFamily enumerate_valid_placements(const Graph& graph, std::span<const EdgeId> forbidden);

struct IdentifiabilityVerdict {
    bool identifiable = true;
    // Some load was zero or negative; observations may collide even for a
    // valid placement.
    bool degenerate_loads = false;
    // First pair of tree indices (enumeration order) with equal observations.
    std::optional<std::pair<std::size_t, std::size_t>> collision;
    std::size_t trees = 0;
};

// Pairwise comparison of signed observations over all spanning trees.
// `consumption` holds one load per vertex (the root entry is ignored).
IdentifiabilityVerdict naive_identifiability_oracle(const Graph& graph, const Placement& placement,
                                                    const Eigen::VectorXd& consumption);

} // namespace treeid
