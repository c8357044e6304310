#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "treeid/graph.hpp"
#include "treeid/loads.hpp"
#include "treeid/placement.hpp"
#include "treeid/spanning_tree.hpp"

namespace treeid {

// |M| x |loads| map from loads to measured flows under one tree. Entry (k, j)
// is +1 when load j sits downstream of sensor k and the flow follows the
// sensor edge's reference direction, -1 when it runs against it, else 0.
using ObservationMatrix = Eigen::MatrixXd;

ObservationMatrix observation_matrix(const Graph& graph, const SpanningTree& tree,
                                     const Placement& placement,
                                     std::span<const VertexIndex> load_vertices);

// Same matrix through the tree's reduced incidence, -A(M) (B_w^r)^{-1} P,
// where P scatters loads onto the non-root rows.
ObservationMatrix observation_matrix_via_incidence(const Graph& graph, const SpanningTree& tree,
                                                   const Placement& placement,
                                                   std::span<const VertexIndex> load_vertices);

// Net injection per vertex: the root supplies the total, every other vertex
// absorbs its consumption. Sums to zero.
Eigen::VectorXd injection_vector(const Graph& graph, const Eigen::VectorXd& consumption);

// Signed flow on every edge when `tree` carries `consumption` from the root.
// Co-tree edges carry zero.
Eigen::VectorXd tree_edge_flows(const Graph& graph, const SpanningTree& tree,
                                const Eigen::VectorXd& consumption);

// Sensor readings for a per-vertex consumption vector.
Eigen::VectorXd tree_flow_observation(const Graph& graph, const SpanningTree& tree,
                                      const Placement& placement,
                                      const Eigen::VectorXd& consumption);

// s = Gamma x for load values `x` laid out as in `model`.
Eigen::VectorXd hypothesis_flow(const Graph& graph, const SpanningTree& tree,
                                const Placement& placement, const LoadModel& model,
                                const Eigen::VectorXd& x);

struct FlowSolution {
    Eigen::VectorXd flow;  // one entry per edge
    double residual = 0.0; // max |B f - y| over all vertices
};

// Solves the flow equations with the measured edges pinned to the sensor
// readings. The unmeasured edges form a spanning tree, so the reduced system
// is square and nonsingular; it is factored once per placement.
class RelaxedFlowSolver {
public:
    // Throws InvalidPlacement when the unmeasured edges are not a spanning tree.
    RelaxedFlowSolver(const Graph& graph, const Placement& placement);

    FlowSolution solve(const Eigen::VectorXd& consumption, const Eigen::VectorXd& observation) const;

    // d flow / d observation, |E| x |M|: identity rows on measured edges and
    // -(B_N^r)^{-1} B_M^r on the rest.
    const Eigen::MatrixXd& sensitivity() const noexcept { return sensitivity_; }

    const Graph& graph() const noexcept { return *graph_; }
    const Placement& placement() const noexcept { return placement_; }

private:
    const Graph* graph_;
    Placement placement_;
    std::vector<EdgeId> unmeasured_;
    Eigen::MatrixXd incidence_;
    Eigen::MatrixXd reduced_incidence_; // B^r, non-root rows
    Eigen::MatrixXd measured_columns_;  // B_M^r
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    Eigen::MatrixXd sensitivity_;
};

FlowSolution relaxed_flow_solution(const Graph& graph, const Placement& placement,
                                   const Eigen::VectorXd& consumption,
                                   const Eigen::VectorXd& observation);

struct HypothesisFlowDistribution {
    Eigen::VectorXd mean;       // Gamma x_hat
    Eigen::MatrixXd covariance; // Gamma Sigma Gamma^T
};

HypothesisFlowDistribution hypothesis_flow_distribution(const Graph& graph, const SpanningTree& tree,
                                                        const Placement& placement,
                                                        const LoadModel& model);

} // namespace treeid
