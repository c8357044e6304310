#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "treeid/flow.hpp"
#include "treeid/gaussian.hpp"
#include "treeid/graph.hpp"
#include "treeid/loads.hpp"
#include "treeid/placement.hpp"
#include "treeid/spanning_tree.hpp"

namespace treeid {

struct DetectionResult {
    SpanningTree tree;
    Likelihood likelihood;
    std::string method;
    std::size_t iterations = 0;
    // Hypotheses or candidate moves discarded as inconsistent with the data.
    std::size_t pruned = 0;
    bool converged = true;

    double log_likelihood() const noexcept { return likelihood.log_density; }
};

inline constexpr std::string_view detection_csv_header =
    "method,tree,log_likelihood,iterations,converged";

// method,edge ids joined by ';',log_likelihood,iterations,converged
std::string to_csv_row(const DetectionResult& result);

// Everything the likelihood detectors share for one (graph, placement, load
// model, required edges) combination. Hypothesis evaluators are built on first
// use and cached, so one instance serves many observations. Not thread-safe;
// give each worker its own.
class HypothesisSpace {
public:
    HypothesisSpace(const Graph& graph, Placement placement, LoadModel model,
                    EdgeSet required = {});

    const Graph& graph() const noexcept { return *graph_; }
    const Placement& placement() const noexcept { return placement_; }
    const LoadModel& model() const noexcept { return model_; }
    const EdgeSet& required() const noexcept { return required_; }

    // Per-vertex consumption at the forecast means.
    const Eigen::VectorXd& forecast_consumption() const noexcept { return forecast_; }

    // Every spanning tree containing the required edges, lexicographic order.
    const std::vector<SpanningTree>& hypotheses();

    const GaussianEvaluator& evaluator(const SpanningTree& tree);
    Likelihood likelihood(const SpanningTree& tree, const Eigen::VectorXd& observation);

    // Throws InvalidPlacement when the placement is not valid.
    const RelaxedFlowSolver& solver();

private:
    const Graph* graph_;
    Placement placement_;
    LoadModel model_;
    EdgeSet required_;
    Eigen::VectorXd forecast_;
    std::optional<std::vector<SpanningTree>> hypotheses_;
    std::unordered_map<std::vector<bool>, GaussianEvaluator> evaluators_;
    std::optional<RelaxedFlowSolver> solver_;
};

// Gaussian log-density of the observation under N(Gamma x_hat, Gamma Sigma Gamma^T).
Likelihood log_likelihood(const Graph& graph, const Eigen::VectorXd& observation,
                          const SpanningTree& tree, const Placement& placement,
                          const LoadModel& model);

// Support of the relaxed flow solution with exact loads. Entries count as
// nonzero above 1e-9 times the largest load. Throws InconsistentObservation
// when the support (plus `required`) is not a spanning tree.
DetectionResult detect_deterministic(const Graph& graph, const Placement& placement,
                                     const Eigen::VectorXd& consumption,
                                     const Eigen::VectorXd& observation,
                                     std::span<const EdgeId> required = {});

// Every tree containing `required` whose exact observation matches.
std::vector<SpanningTree> detect_enumeration_oracle(const Graph& graph, const Placement& placement,
                                                    const Eigen::VectorXd& consumption,
                                                    const Eigen::VectorXd& observation,
                                                    std::span<const EdgeId> required = {});

// Likelihood of every hypothesis, in hypotheses() order.
std::vector<Likelihood> map_likelihoods(HypothesisSpace& space, const Eigen::VectorXd& observation);

// Exhaustive argmax. Throws NoFeasibleHypothesis when every hypothesis is excluded.
DetectionResult detect_map(HypothesisSpace& space, const Eigen::VectorXd& observation);
DetectionResult detect_map(const Graph& graph, const Placement& placement, const LoadModel& model,
                           const Eigen::VectorXd& observation,
                           std::span<const EdgeId> required = {});

// Co-tree entries of the noisy flow f_o = f(x_hat, s) for one hypothesis.
// Under that hypothesis they are zero-mean with covariance H Sigma_s H^T,
// H = B_H J and J the flow sensitivity to the observation.
struct ZeroFlowStatistic {
    EdgeSet indices;
    Eigen::MatrixXd selector; // B_H, |indices| x |E|
    Eigen::MatrixXd h;        // B_H J, |indices| x |M|
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

ZeroFlowStatistic zero_flow_statistic(HypothesisSpace& space, const SpanningTree& tree);

// Throws UnsupportedConfiguration unless |M| equals the circuit rank.
std::vector<Likelihood> zero_flow_likelihoods(HypothesisSpace& space,
                                              const Eigen::VectorXd& observation);
DetectionResult detect_zero_flow_map(HypothesisSpace& space, const Eigen::VectorXd& observation);
DetectionResult detect_zero_flow_map(const Graph& graph, const Placement& placement,
                                     const LoadModel& model, const Eigen::VectorXd& observation,
                                     std::span<const EdgeId> required = {});

// Maximum spanning tree under |f_o| weights, required edges first.
DetectionResult detect_fmst(HypothesisSpace& space, const Eigen::VectorXd& observation);
DetectionResult detect_fmst(const Graph& graph, const Placement& placement, const LoadModel& model,
                            const Eigen::VectorXd& observation,
                            std::span<const EdgeId> required = {});

// Spanning tree that contains every sensor edge with a nonzero reading and
// avoids every sensor edge reading zero. Throws InconsistentObservation when
// no such tree exists.
SpanningTree feasible_tree(const Graph& graph, const Eigen::VectorXd& observation,
                           const Placement& placement, std::span<const EdgeId> required = {});

// Coordinate ascent over fundamental-cycle exchanges starting from
// feasible_tree. `max_sweeps` of zero means 100 times the circuit rank. When
// `trace` is given it receives the likelihood of the start tree and of every
// accepted move.
DetectionResult detect_cycle_descent(HypothesisSpace& space, const Eigen::VectorXd& observation,
                                     std::size_t max_sweeps = 0,
                                     std::vector<Likelihood>* trace = nullptr);
DetectionResult detect_cycle_descent(const Graph& graph, const Placement& placement,
                                     const LoadModel& model, const Eigen::VectorXd& observation,
                                     std::span<const EdgeId> required = {});

// Trees reachable from `seed` by one exchange T + g_k - e where e lies on
// fundamental cycle k only. All of them share the seed's cycle basis.
std::vector<SpanningTree> basis_preserving_neighbors(const Graph& graph, const SpanningTree& seed,
                                                     std::span<const EdgeId> required = {});

// Best of the seed and its basis-preserving neighbors.
DetectionResult local_map_search(HypothesisSpace& space, const Eigen::VectorXd& observation,
                                 const SpanningTree& seed);

enum class Method { deterministic, enumeration, map, zero_flow, fmst, cycle_descent };

struct DetectorSpec {
    Method method = Method::map;
    bool local_search = false;

    // CLI spelling, with "+local" appended when the post-pass is on.
    std::string name() const;
};

std::string_view method_name(Method method);
std::optional<Method> parse_method(std::string_view name);
// Accepts method_name values with an optional "+local" suffix.
std::optional<DetectorSpec> parse_detector(std::string_view name);

// Runs one detector on one observation. The deterministic and enumeration
// methods use the forecast means as loads; enumeration picks the first match.
DetectionResult run_detector(const DetectorSpec& spec, HypothesisSpace& space,
                             const Eigen::VectorXd& observation);

} // namespace treeid
