#include "treeid/flow.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "treeid/error.hpp"

namespace treeid {

namespace {

constexpr VertexIndex kNoVertex = static_cast<VertexIndex>(-1);

// Tree hung from the graph root: parent vertex and parent edge per vertex, and
// a BFS order starting at the root.
struct RootedTree {
    std::vector<VertexIndex> parent;
    std::vector<EdgeId> parent_edge;
    std::vector<VertexIndex> order;
    // Vertex whose parent edge is e, for tree edges.
    std::vector<VertexIndex> child_of_edge;
};

RootedTree hang(const Graph& graph, const SpanningTree& tree) {
    if (tree.indicator().size() != graph.num_edges() ||
        tree.size() + 1 != graph.num_vertices())
        throw PreconditionError("tree does not span the graph");
    RootedTree rt;
    const std::size_t n = graph.num_vertices();
    rt.parent.assign(n, kNoVertex);
    rt.parent_edge.assign(n, 0);
    rt.child_of_edge.assign(graph.num_edges(), kNoVertex);
    std::vector<bool> seen(n, false);
    std::queue<VertexIndex> queue;
    queue.push(graph.root());
    seen[graph.root()] = true;
    while (!queue.empty()) {
        const VertexIndex v = queue.front();
        queue.pop();
        rt.order.push_back(v);
        for (EdgeId id : graph.incident(v)) {
            if (!tree.contains(id))
                continue;
            const VertexIndex w = graph.edge(id).other(v);
            if (seen[w])
                continue;
            seen[w] = true;
            rt.parent[w] = v;
            rt.parent_edge[w] = id;
            rt.child_of_edge[id] = w;
            queue.push(w);
        }
    }
    if (rt.order.size() != n)
        throw PreconditionError("tree does not span the graph");
    return rt;
}

double orientation(const Graph& graph, const RootedTree& rt, VertexIndex child) {
    return graph.edge(rt.parent_edge[child]).from == rt.parent[child] ? 1.0 : -1.0;
}

Eigen::MatrixXd reduced_rows(const Graph& graph, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(b.rows() - 1, b.cols());
    for (Eigen::Index i = 0, r = 0; i < b.rows(); ++i)
        if (static_cast<VertexIndex>(i) != graph.root())
            out.row(r++) = b.row(i);
    return out;
}

} // namespace

ObservationMatrix observation_matrix(const Graph& graph, const SpanningTree& tree,
                                     const Placement& placement,
                                     std::span<const VertexIndex> load_vertices) {
    check_edge_ids(graph, placement.sensor_edges());
    const RootedTree rt = hang(graph, tree);
    ObservationMatrix gamma = ObservationMatrix::Zero(static_cast<Eigen::Index>(placement.size()),
                                                      static_cast<Eigen::Index>(load_vertices.size()));
    for (std::size_t k = 0; k < placement.size(); ++k) {
        const EdgeId e = placement.sensor_edge(k);
        const VertexIndex child = rt.child_of_edge[e];
        if (child == kNoVertex)
            continue; // co-tree edge, no flow
        const double sign = orientation(graph, rt, child);
        // Load j is downstream iff `child` is on its path to the root.
        for (std::size_t j = 0; j < load_vertices.size(); ++j) {
            for (VertexIndex v = load_vertices[j]; v != kNoVertex; v = rt.parent[v]) {
                if (v == child) {
                    gamma(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = sign;
                    break;
                }
            }
        }
    }
    return gamma;
}

ObservationMatrix observation_matrix_via_incidence(const Graph& graph, const SpanningTree& tree,
                                                   const Placement& placement,
                                                   std::span<const VertexIndex> load_vertices) {
    check_edge_ids(graph, placement.sensor_edges());
    if (tree.size() + 1 != graph.num_vertices())
        throw PreconditionError("tree does not span the graph");
    const Eigen::MatrixXd br = reduced_rows(graph, build_incidence(graph));
    const auto n = br.rows();
    Eigen::MatrixXd bw(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
        bw.col(c) = br.col(static_cast<Eigen::Index>(tree.edges()[static_cast<std::size_t>(c)]));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(bw);
    if (!lu.isInvertible())
        throw PreconditionError("reduced tree incidence is singular");

    // A(M): sensor k picks the column of its edge among the tree edges.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(placement.size()), n);
    for (std::size_t k = 0; k < placement.size(); ++k) {
        const auto& te = tree.edges();
        auto it = std::lower_bound(te.begin(), te.end(), placement.sensor_edge(k));
        if (it != te.end() && *it == placement.sensor_edge(k))
            a(static_cast<Eigen::Index>(k), it - te.begin()) = 1.0;
    }
    // P: load j absorbs at its vertex's reduced row.
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(load_vertices.size()));
    for (std::size_t j = 0; j < load_vertices.size(); ++j) {
        const VertexIndex v = load_vertices[j];
        if (v == graph.root())
            throw PreconditionError("the root cannot carry a load");
        const auto row = static_cast<Eigen::Index>(v < graph.root() ? v : v - 1);
        p(row, static_cast<Eigen::Index>(j)) = 1.0;
    }
    return -(a * lu.solve(p));
}

Eigen::VectorXd injection_vector(const Graph& graph, const Eigen::VectorXd& consumption) {
    Eigen::VectorXd y = -consumption;
    y[static_cast<Eigen::Index>(graph.root())] = 0.0;
    y[static_cast<Eigen::Index>(graph.root())] = -y.sum();
    return y;
}

Eigen::VectorXd tree_edge_flows(const Graph& graph, const SpanningTree& tree,
                                const Eigen::VectorXd& consumption) {
    if (static_cast<std::size_t>(consumption.size()) != graph.num_vertices())
        throw PreconditionError("one consumption value per vertex required");
    const RootedTree rt = hang(graph, tree);
    Eigen::VectorXd subtree = consumption;
    subtree[static_cast<Eigen::Index>(graph.root())] = 0.0;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(graph.num_edges()));
    for (auto it = rt.order.rbegin(); it != rt.order.rend(); ++it) {
        const VertexIndex v = *it;
        if (rt.parent[v] == kNoVertex)
            continue;
        const double total = subtree[static_cast<Eigen::Index>(v)];
        f[static_cast<Eigen::Index>(rt.parent_edge[v])] = orientation(graph, rt, v) * total;
        subtree[static_cast<Eigen::Index>(rt.parent[v])] += total;
    }
    return f;
}

Eigen::VectorXd tree_flow_observation(const Graph& graph, const SpanningTree& tree,
                                      const Placement& placement,
                                      const Eigen::VectorXd& consumption) {
    const Eigen::VectorXd f = tree_edge_flows(graph, tree, consumption);
    Eigen::VectorXd s(static_cast<Eigen::Index>(placement.size()));
    for (std::size_t k = 0; k < placement.size(); ++k)
        s[static_cast<Eigen::Index>(k)] = f[static_cast<Eigen::Index>(graph.edge(placement.sensor_edge(k)).id)];
    return s;
}

Eigen::VectorXd hypothesis_flow(const Graph& graph, const SpanningTree& tree,
                                const Placement& placement, const LoadModel& model,
                                const Eigen::VectorXd& x) {
    return tree_flow_observation(graph, tree, placement, model.consumption(graph, x));
}

RelaxedFlowSolver::RelaxedFlowSolver(const Graph& graph, const Placement& placement)
    : graph_(&graph), placement_(placement) {
    if (!is_valid_placement(graph, placement))
        throw InvalidPlacement("unmeasured edges do not form a spanning tree; the reduced flow "
                               "system is singular");
    std::vector<bool> measured(graph.num_edges(), false);
    for (EdgeId id : placement.sensor_edges())
        measured[id] = true;
    for (EdgeId id = 0; id < graph.num_edges(); ++id)
        if (!measured[id])
            unmeasured_.push_back(id);

    incidence_ = build_incidence(graph);
    reduced_incidence_ = reduced_rows(graph, incidence_);
    const auto n = reduced_incidence_.rows();
    Eigen::MatrixXd bn(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
        bn.col(c) = reduced_incidence_.col(static_cast<Eigen::Index>(unmeasured_[static_cast<std::size_t>(c)]));
    measured_columns_.resize(n, static_cast<Eigen::Index>(placement.size()));
    for (std::size_t k = 0; k < placement.size(); ++k)
        measured_columns_.col(static_cast<Eigen::Index>(k)) =
            reduced_incidence_.col(static_cast<Eigen::Index>(placement.sensor_edge(k)));
    lu_.compute(bn);

    const Eigen::MatrixXd inner = -lu_.solve(measured_columns_);
    sensitivity_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(graph.num_edges()),
                                         static_cast<Eigen::Index>(placement.size()));
    for (std::size_t c = 0; c < unmeasured_.size(); ++c)
        sensitivity_.row(static_cast<Eigen::Index>(unmeasured_[c])) = inner.row(static_cast<Eigen::Index>(c));
    for (std::size_t k = 0; k < placement.size(); ++k)
        sensitivity_(static_cast<Eigen::Index>(placement.sensor_edge(k)), static_cast<Eigen::Index>(k)) = 1.0;
}

FlowSolution RelaxedFlowSolver::solve(const Eigen::VectorXd& consumption,
                                      const Eigen::VectorXd& observation) const {
    const Graph& graph = *graph_;
    if (static_cast<std::size_t>(consumption.size()) != graph.num_vertices())
        throw PreconditionError("one consumption value per vertex required");
    if (static_cast<std::size_t>(observation.size()) != placement_.size())
        throw PreconditionError("one observation per sensor required");

    const Eigen::VectorXd y = injection_vector(graph, consumption);
    const Eigen::VectorXd yr = reduced_rows(graph, y);
    const Eigen::VectorXd fn = lu_.solve(yr - measured_columns_ * observation);

    FlowSolution out;
    out.flow = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(graph.num_edges()));
    for (std::size_t c = 0; c < unmeasured_.size(); ++c)
        out.flow[static_cast<Eigen::Index>(unmeasured_[c])] = fn[static_cast<Eigen::Index>(c)];
    for (std::size_t k = 0; k < placement_.size(); ++k)
        out.flow[static_cast<Eigen::Index>(placement_.sensor_edge(k))] = observation[static_cast<Eigen::Index>(k)];
    out.residual = (incidence_ * out.flow - y).cwiseAbs().maxCoeff();
    return out;
}

FlowSolution relaxed_flow_solution(const Graph& graph, const Placement& placement,
                                   const Eigen::VectorXd& consumption,
                                   const Eigen::VectorXd& observation) {
    return RelaxedFlowSolver(graph, placement).solve(consumption, observation);
}

HypothesisFlowDistribution hypothesis_flow_distribution(const Graph& graph, const SpanningTree& tree,
                                                        const Placement& placement,
                                                        const LoadModel& model) {
    model.validate(graph);
    const ObservationMatrix gamma = observation_matrix(graph, tree, placement, model.vertices);
    HypothesisFlowDistribution d;
    d.mean = gamma * model.means;
    d.covariance = gamma * model.variances.asDiagonal() * gamma.transpose();
    return d;
}

} // namespace treeid
