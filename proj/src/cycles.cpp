#include "treeid/cycles.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

#include "treeid/error.hpp"
#include "treeid/placement.hpp"
#include "treeid/union_find.hpp"

namespace treeid {

bool Cycle::contains(EdgeId id) const {
    return std::binary_search(edges.begin(), edges.end(), id);
}

bool is_cycle(const Graph& graph, std::span<const EdgeId> edges) {
    if (edges.empty())
        return false;
    std::map<VertexIndex, int> degree;
    UnionFind uf(graph.num_vertices());
    for (EdgeId id : edges) {
        const auto& e = graph.edge(id);
        ++degree[e.from];
        ++degree[e.to];
        uf.unite(e.from, e.to);
    }
    const VertexIndex first = degree.begin()->first;
    for (const auto& [v, d] : degree)
        if (d != 2 || !uf.connected(v, first))
            return false;
    return true;
}

CycleSum cycle_xor(const Graph& graph, const Cycle& a, const Cycle& b) {
    CycleSum out;
    std::set_symmetric_difference(a.edges.begin(), a.edges.end(), b.edges.begin(), b.edges.end(),
                                  std::back_inserter(out.edges));
    out.single_cycle = is_cycle(graph, out.edges);
    return out;
}

std::size_t FundamentalCycleBasis::index_of(EdgeId generator) const {
    auto it = std::find(generators.begin(), generators.end(), generator);
    return static_cast<std::size_t>(it - generators.begin());
}

Cycle fundamental_cycle(const Graph& graph, const SpanningTree& tree, EdgeId generator) {
    const Edge& gen = graph.edge(generator);
    if (tree.contains(generator))
        throw PreconditionError("generator must be a co-tree edge");
    if (tree.indicator().size() != graph.num_edges())
        throw PreconditionError("tree does not belong to this graph");

    // BFS over tree edges from one endpoint of the generator to the other.
    constexpr EdgeId none = static_cast<EdgeId>(-1);
    std::vector<EdgeId> via(graph.num_vertices(), none);
    std::vector<bool> seen(graph.num_vertices(), false);
    std::queue<VertexIndex> queue;
    queue.push(gen.from);
    seen[gen.from] = true;
    while (!queue.empty() && !seen[gen.to]) {
        const VertexIndex v = queue.front();
        queue.pop();
        for (EdgeId id : graph.incident(v)) {
            if (!tree.contains(id))
                continue;
            const VertexIndex w = graph.edge(id).other(v);
            if (seen[w])
                continue;
            seen[w] = true;
            via[w] = id;
            queue.push(w);
        }
    }
    if (!seen[gen.to])
        throw PreconditionError("tree does not span the generator's endpoints");

    Cycle cycle;
    cycle.edges.push_back(generator);
    for (VertexIndex v = gen.to; v != gen.from; v = graph.edge(via[v]).other(v))
        cycle.edges.push_back(via[v]);
    std::sort(cycle.edges.begin(), cycle.edges.end());
    return cycle;
}

FundamentalCycleBasis fundamental_cycle_basis(const Graph& graph, const SpanningTree& tree) {
    if (tree.indicator().size() != graph.num_edges() ||
        tree.size() + 1 != graph.num_vertices())
        throw PreconditionError("tree does not span the graph");
    FundamentalCycleBasis basis;
    for (EdgeId g : tree.cotree()) {
        basis.generators.push_back(g);
        basis.cycles.push_back(fundamental_cycle(graph, tree, g));
    }
    return basis;
}

std::vector<std::size_t> CycleMeasurementMap::union_over(std::span<const std::size_t> subset) const {
    std::vector<std::size_t> out;
    for (std::size_t k : subset)
        out.insert(out.end(), sensors.at(k).begin(), sensors.at(k).end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

CycleMeasurementMap cycle_measurement_map(const FundamentalCycleBasis& basis,
                                          const Placement& placement) {
    CycleMeasurementMap map;
    map.sensors.resize(basis.size());
    for (std::size_t c = 0; c < basis.size(); ++c)
        for (std::size_t k = 0; k < placement.size(); ++k)
            if (basis.cycles[c].contains(placement.sensor_edge(k)))
                map.sensors[c].push_back(k);
    return map;
}

namespace {

// Kuhn's augmenting-path matching of basis cycles to target co-tree edges.
class ExchangeMatcher {
public:
    explicit ExchangeMatcher(std::vector<std::vector<EdgeId>> candidates)
        : candidates_(std::move(candidates)) {}

    std::vector<EdgeId> solve() {
        for (std::size_t k = 0; k < candidates_.size(); ++k) {
            visited_.clear();
            if (!augment(k))
                throw InternalInvariantViolation(
                    "edge exchange assignment exhausted on cycle " + std::to_string(k));
        }
        std::vector<EdgeId> assigned(candidates_.size());
        for (const auto& [edge, cycle] : owner_)
            assigned[cycle] = edge;
        return assigned;
    }

private:
    bool augment(std::size_t k) {
        for (EdgeId e : candidates_[k]) {
            if (!visited_.insert(e).second)
                continue;
            auto it = owner_.find(e);
            if (it == owner_.end() || augment(it->second)) {
                owner_[e] = k;
                return true;
            }
        }
        return false;
    }

    std::vector<std::vector<EdgeId>> candidates_;
    std::map<EdgeId, std::size_t> owner_;
    std::set<EdgeId> visited_;
};

} // namespace

EdgeExchange encode_edge_exchange(const Graph& graph, const SpanningTree& source,
                                  const SpanningTree& target) {
    if (source.indicator().size() != graph.num_edges() ||
        target.indicator().size() != graph.num_edges())
        throw PreconditionError("trees must span the same graph");
    const FundamentalCycleBasis basis = fundamental_cycle_basis(graph, source);

    // Cycle k may take any target co-tree edge on it; its own generator first
    // so unchanged co-tree edges become identity moves.
    std::vector<std::vector<EdgeId>> candidates(basis.size());
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const EdgeId gen = basis.generators[k];
        if (!target.contains(gen))
            candidates[k].push_back(gen);
        for (EdgeId e : basis.cycles[k].edges)
            if (e != gen && !target.contains(e))
                candidates[k].push_back(e);
    }
    const std::vector<EdgeId> assigned = ExchangeMatcher(std::move(candidates)).solve();

    EdgeExchange exchange{{}, source, target};
    for (std::size_t k = 0; k < basis.size(); ++k)
        exchange.moves.push_back({basis.generators[k], assigned[k], k});
    return exchange;
}

SpanningTree apply_edge_exchange(const Graph& graph, const EdgeExchange& exchange) {
    std::vector<bool> in_tree = exchange.source.indicator();
    for (const auto& move : exchange.moves) {
        in_tree.at(move.source_removed) = true;
    }
    for (const auto& move : exchange.moves) {
        in_tree.at(move.target_removed) = false;
    }
    std::vector<EdgeId> edges;
    for (EdgeId id = 0; id < in_tree.size(); ++id)
        if (in_tree[id])
            edges.push_back(id);
    return SpanningTree::certify(graph, std::move(edges));
}

} // namespace treeid
