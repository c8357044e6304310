#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "treeid/detection.hpp"
#include "treeid/graph.hpp"
#include "treeid/loads.hpp"
#include "treeid/placement.hpp"

namespace treeid {

// Ordered-pair collision rates for one placement under exact loads: epsilon
// compares signed observations, epsilon_unsigned their magnitudes.
struct DeterministicRow {
    std::size_t placement = 0;
    double epsilon = 0.0;
    double epsilon_unsigned = 0.0;
    std::size_t pairs = 0; // N (N - 1)
};

struct DeterministicReport {
    std::vector<DeterministicRow> rows;
};

// Hypotheses are the trees containing `required`. `consumption` has one entry
// per vertex.
DeterministicReport run_deterministic_sweep(const Graph& graph, std::span<const Placement> placements,
                                            const Eigen::VectorXd& consumption,
                                            std::span<const EdgeId> required = {});

enum class SigmaMode {
    absolute,   // every load gets standard deviation sigma
    relative,   // sigma is a coefficient of variation: sd_n = sigma * mean_n
};

struct ExperimentConfig {
    std::vector<Placement> placements;
    LoadModel model; // forecast means; variances are overwritten per sigma
    std::vector<double> sigmas;
    SigmaMode sigma_mode = SigmaMode::absolute;
    std::size_t trials = 1000;
    std::vector<DetectorSpec> detectors;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    // Hypotheses and true trees: every spanning tree containing these edges.
    EdgeSet required;

    // Throws PreconditionError on zero trials, negative sigma, no placements
    // or no detectors.
    void validate() const;
};

// Missed detections for one (placement, detector, sigma, true tree) cell.
struct CellEstimate {
    std::size_t placement = 0;
    std::size_t detector = 0;
    std::size_t sigma_index = 0;
    double sigma = 0.0;
    std::size_t true_tree = 0;
    std::size_t trials = 0;
    std::size_t misses = 0;
    // Trials on which the detector threw; each also counts as a miss.
    std::size_t failures = 0;

    double rate() const noexcept;
    double standard_error() const noexcept; // sqrt(p (1 - p) / n)
};

struct ErrorReport {
    std::vector<std::string> detectors;
    std::vector<double> sigmas;
    std::size_t placements = 0;
    std::size_t trees = 0;
    // Ordered placement, sigma, detector, true tree.
    std::vector<CellEstimate> cells;
    // Trials on which two detectors returned the same tree, per
    // (placement, sigma): detectors x detectors, row-major.
    std::vector<std::vector<std::size_t>> agreement;
    std::size_t trials = 0;

    const CellEstimate& cell(std::size_t placement, std::size_t sigma_index, std::size_t detector,
                             std::size_t tree) const;
    // Mean and maximum miss rate over true trees.
    double g1(std::size_t placement, std::size_t sigma_index, std::size_t detector) const;
    double g2(std::size_t placement, std::size_t sigma_index, std::size_t detector) const;
    // Miss rate pooled over every tree and trial, with its binomial error.
    double pooled_rate(std::size_t placement, std::size_t sigma_index, std::size_t detector) const;
    double pooled_standard_error(std::size_t placement, std::size_t sigma_index,
                                 std::size_t detector) const;
    // Fraction of trials on which detectors a and b agreed.
    double agreement_rate(std::size_t placement, std::size_t sigma_index, std::size_t a,
                          std::size_t b) const;
};

// Each trial draws x ~ N(means, sd^2), forms the exact observation of the
// true tree and runs every detector on it. The draw depends only on the seed,
// the sigma index, the tree index and the trial index, so detectors and
// placements see matched noise and results do not depend on worker count.
ErrorReport run_stochastic_sweep(const Graph& graph, const ExperimentConfig& config);

struct RankingRow {
    std::size_t placement = 0;
    double g1 = 0.0;
    double g2 = 0.0;
    std::size_t rank = 0; // 1 = worst
};

// Per-placement g1 and g2 for one detector at one noise level, sorted by
// descending g2, then descending g1, then placement index.
std::vector<RankingRow> evaluate_placements(const Graph& graph, const PlacementFamily& family,
                                            const LoadModel& model, double sigma,
                                            SigmaMode mode, std::size_t trials,
                                            const DetectorSpec& detector, std::uint64_t seed,
                                            std::size_t workers = 1);
std::vector<RankingRow> rank_placements(const ErrorReport& report, std::size_t sigma_index = 0,
                                        std::size_t detector = 0);

void write_deterministic_csv(std::ostream& out, const DeterministicReport& report);
void write_sweep_csv(std::ostream& out, const ErrorReport& report);
void write_ranking_csv(std::ostream& out, std::span<const RankingRow> rows);

} // namespace treeid
