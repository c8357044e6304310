#pragma once

#include <cstddef>
#include <vector>

#include "treeid/graph.hpp"
#include "treeid/spanning_tree.hpp"

namespace treeid {

class Placement;

// Edge set in which every touched vertex has degree two and which is connected.
struct Cycle {
    EdgeSet edges;

    bool contains(EdgeId id) const;
    bool operator==(const Cycle&) const = default;
};

bool is_cycle(const Graph& graph, std::span<const EdgeId> edges);

// Result of a symmetric difference. The cycle space is closed under it but a
// single cycle is not: two cycles sharing a vertex but no path can sum to an
// edge-disjoint union of cycles, and equal cycles sum to the empty set.
struct CycleSum {
    EdgeSet edges;
    bool single_cycle = false;
};

CycleSum cycle_xor(const Graph& graph, const Cycle& a, const Cycle& b);

// Unique cycle of tree + generator for every co-tree edge. Cycle k contains
// generator k and no other generator. Generators ascend by edge id.
struct FundamentalCycleBasis {
    std::vector<Cycle> cycles;
    std::vector<EdgeId> generators;

    std::size_t size() const noexcept { return cycles.size(); }
    // Index of the cycle generated by `generator`, or size() when absent.
    std::size_t index_of(EdgeId generator) const;
};

FundamentalCycleBasis fundamental_cycle_basis(const Graph& graph, const SpanningTree& tree);

// Tree path between the endpoints of `generator` plus the generator itself.
Cycle fundamental_cycle(const Graph& graph, const SpanningTree& tree, EdgeId generator);

// For every basis cycle, the sensor indices k whose edge lies on it.
struct CycleMeasurementMap {
    std::vector<std::vector<std::size_t>> sensors;

    // Union of the sensor sets of the cycles in `subset`, ascending.
    std::vector<std::size_t> union_over(std::span<const std::size_t> subset) const;
};

CycleMeasurementMap cycle_measurement_map(const FundamentalCycleBasis& basis,
                                          const Placement& placement);

// One exchange per basis cycle of the source tree: the cycle's generator
// (removed from the source) is swapped for `target_removed`, an edge removed
// from the target. Identity moves have both fields equal.
struct ExchangeMove {
    EdgeId source_removed;
    EdgeId target_removed;
    std::size_t cycle;

    bool identity() const noexcept { return source_removed == target_removed; }
};

struct EdgeExchange {
    std::vector<ExchangeMove> moves;
    SpanningTree source;
    SpanningTree target;
};

EdgeExchange encode_edge_exchange(const Graph& graph, const SpanningTree& source,
                                  const SpanningTree& target);

// Applies every move of `exchange` to its source tree.
SpanningTree apply_edge_exchange(const Graph& graph, const EdgeExchange& exchange);

} // namespace treeid
