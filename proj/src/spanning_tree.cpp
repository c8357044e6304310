#include "treeid/spanning_tree.hpp"

#include <algorithm>
#include <numeric>

#include "treeid/error.hpp"
#include "treeid/union_find.hpp"

namespace treeid {

namespace {

bool spans_acyclic(const Graph& graph, std::span<const EdgeId> edges) {
    if (edges.size() + 1 != graph.num_vertices())
        return false;
    UnionFind uf(graph.num_vertices());
    for (EdgeId id : edges) {
        const auto& e = graph.edge(id);
        if (!uf.unite(e.from, e.to))
            return false;
    }
    return uf.components() == 1;
}

} // namespace

SpanningTree SpanningTree::certify(const Graph& graph, std::vector<EdgeId> edges) {
    check_edge_ids(graph, edges);
    EdgeSet set = make_edge_set(std::move(edges));
    if (!spans_acyclic(graph, set))
        throw PreconditionError("edge set is not a spanning tree");
    std::vector<bool> indicator(graph.num_edges(), false);
    for (EdgeId id : set)
        indicator[id] = true;
    return SpanningTree(std::move(set), std::move(indicator));
}

EdgeSet SpanningTree::cotree() const {
    EdgeSet out;
    out.reserve(indicator_.size() - edges_.size());
    for (EdgeId id = 0; id < indicator_.size(); ++id)
        if (!indicator_[id])
            out.push_back(id);
    return out;
}

bool is_spanning_tree(const Graph& graph, std::span<const EdgeId> edges) {
    check_edge_ids(graph, edges);
    return spans_acyclic(graph, make_edge_set({edges.begin(), edges.end()}));
}

namespace {

// Include-first backtracking over edges in id order. Including edge i before
// excluding it yields trees in lexicographic order.
class TreeEnumerator {
public:
    TreeEnumerator(const Graph& graph, std::span<const EdgeId> required,
                   const std::function<bool(const SpanningTree&)>& visit)
        : graph_(graph), visit_(visit), forced_(graph.num_edges(), false) {
        for (EdgeId id : required)
            forced_[graph.edge(id).id] = true;
    }

    std::size_t run() {
        const std::size_t n = graph_.num_vertices();
        if (n == 0)
            return 0;
        UnionFind uf(n);
        for (EdgeId id = 0; id < graph_.num_edges(); ++id) {
            if (!forced_[id])
                continue;
            const auto& e = graph_.edge(id);
            if (!uf.unite(e.from, e.to))
                throw InfeasibleConstraint("required edges contain a cycle");
            chosen_.push_back(id);
        }
        if (!can_span(uf, 0))
            return 0;
        recurse(0, uf);
        return visited_;
    }

private:
    bool can_span(UnionFind uf, EdgeId from) const {
        for (EdgeId id = from; id < graph_.num_edges(); ++id) {
            const auto& e = graph_.edge(id);
            uf.unite(e.from, e.to);
        }
        return uf.components() == 1;
    }

    void emit() {
        ++visited_;
        EdgeSet edges = chosen_;
        std::sort(edges.begin(), edges.end());
        if (!visit_(SpanningTree::certify(graph_, std::move(edges))))
            stopped_ = true;
    }

    void recurse(EdgeId i, const UnionFind& uf) {
        if (stopped_)
            return;
        if (chosen_.size() + 1 == graph_.num_vertices()) {
            emit();
            return;
        }
        if (i >= graph_.num_edges())
            return;
        if (forced_[i]) {
            recurse(i + 1, uf);
            return;
        }
        const auto& e = graph_.edge(i);
        UnionFind with = uf;
        if (with.unite(e.from, e.to)) {
            chosen_.push_back(i);
            recurse(i + 1, with);
            chosen_.pop_back();
        }
        if (!stopped_ && can_span(uf, i + 1))
            recurse(i + 1, uf);
    }

    const Graph& graph_;
    const std::function<bool(const SpanningTree&)>& visit_;
    std::vector<bool> forced_;
    std::vector<EdgeId> chosen_;
    std::size_t visited_ = 0;
    bool stopped_ = false;
};

} // namespace

std::size_t for_each_spanning_tree(const Graph& graph, std::span<const EdgeId> required,
                                   const std::function<bool(const SpanningTree&)>& visit) {
    return TreeEnumerator(graph, required, visit).run();
}

std::vector<SpanningTree> enumerate_spanning_trees(const Graph& graph,
                                                   std::span<const EdgeId> required) {
    std::vector<SpanningTree> trees;
    for_each_spanning_tree(graph, required, [&](const SpanningTree& t) {
        trees.push_back(t);
        return true;
    });
    return trees;
}

TreeCount count_spanning_trees(const Graph& graph, VertexIndex removed_vertex) {
    const std::size_t n = graph.num_vertices();
    if (n == 0)
        return 0;
    if (removed_vertex >= n)
        throw LookupError("vertex index out of range");
    if (connected_components(graph) != 1)
        return 0;
    if (n == 1)
        return 1;

    // Reduced Laplacian, rows/columns of the other n-1 vertices.
    std::vector<std::size_t> pos(n);
    for (std::size_t v = 0, k = 0; v < n; ++v)
        pos[v] = v == removed_vertex ? n : k++;
    const std::size_t m = n - 1;
    std::vector<std::vector<TreeCount>> a(m, std::vector<TreeCount>(m, 0));
    for (const auto& e : graph.edges()) {
        const std::size_t p = pos[e.from];
        const std::size_t q = pos[e.to];
        if (p < m)
            a[p][p] += 1;
        if (q < m)
            a[q][q] += 1;
        if (p < m && q < m) {
            a[p][q] -= 1;
            a[q][p] -= 1;
        }
    }

    // Bareiss: every division is exact.
    TreeCount prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k < m; ++k) {
        if (a[k][k] == 0) {
            std::size_t r = k + 1;
            while (r < m && a[r][k] == 0)
                ++r;
            if (r == m)
                return 0;
            std::swap(a[k], a[r]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < m; ++i) {
            for (std::size_t j = k + 1; j < m; ++j)
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        }
        prev = a[k][k];
    }
    TreeCount det = a[m - 1][m - 1];
    return sign < 0 ? TreeCount(-det) : det;
}

SpanningTree max_weight_spanning_tree(const Graph& graph, std::span<const double> weights,
                                      std::span<const EdgeId> required) {
    if (weights.size() != graph.num_edges())
        throw PreconditionError("one weight per edge required");
    UnionFind uf(graph.num_vertices());
    std::vector<EdgeId> chosen;
    std::vector<bool> forced(graph.num_edges(), false);
    for (EdgeId id : make_edge_set({required.begin(), required.end()})) {
        const auto& e = graph.edge(id);
        if (!uf.unite(e.from, e.to))
            throw InfeasibleConstraint("required edges contain a cycle");
        forced[id] = true;
        chosen.push_back(id);
    }
    std::vector<EdgeId> order(graph.num_edges());
    std::iota(order.begin(), order.end(), EdgeId{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](EdgeId a, EdgeId b) { return weights[a] > weights[b]; });
    for (EdgeId id : order) {
        if (forced[id])
            continue;
        const auto& e = graph.edge(id);
        if (uf.unite(e.from, e.to))
            chosen.push_back(id);
    }
    if (uf.components() != 1)
        throw PreconditionError("graph is disconnected");
    return SpanningTree::certify(graph, std::move(chosen));
}

} // namespace treeid
