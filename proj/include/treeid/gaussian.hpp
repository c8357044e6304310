#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace treeid {

// Gaussian log-density of an observation under one hypothesis.
//
// A singular covariance confines the observation to an affine subspace of
// dimension `rank`. The density is then taken over a maximal full-rank subset
// of coordinates, and the remaining coordinates must match their conditional
// mean exactly (within tolerance) or the hypothesis is excluded.
struct Likelihood {
    double log_density = -std::numeric_limits<double>::infinity();
    std::size_t rank = 0;

    bool excluded() const noexcept {
        return log_density == -std::numeric_limits<double>::infinity();
    }
};

// Three-way comparison: positive when `a` is the more likely hypothesis.
// Excluded hypotheses rank last. Between consistent hypotheses a smaller
// support dimension wins: with a vanishing isotropic perturbation the density
// ratio grows without bound in its favour. Equal ranks compare log densities,
// with differences below `tie_tolerance` treated as ties.
int compare_likelihood(const Likelihood& a, const Likelihood& b, double tie_tolerance = 1e-9);

class GaussianEvaluator {
public:
    GaussianEvaluator() = default;
    GaussianEvaluator(Eigen::VectorXd mean, const Eigen::MatrixXd& covariance);

    Likelihood evaluate(const Eigen::VectorXd& z) const;

    std::size_t rank() const noexcept { return selected_.size(); }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(mean_.size()); }
    const std::vector<std::size_t>& selected() const noexcept { return selected_; }
    const Eigen::VectorXd& mean() const noexcept { return mean_; }

private:
    Eigen::VectorXd mean_;
    std::vector<std::size_t> selected_;
    std::vector<std::size_t> dependent_;
    Eigen::LLT<Eigen::MatrixXd> factor_;
    Eigen::MatrixXd regression_; // C_DS C_SS^{-1}
    double log_normalizer_ = 0.0;
};

// Coordinates picked by greedy diagonal pivoting of a Cholesky factorization,
// stopping once the largest remaining pivot is at most 1e-12 * trace.
std::vector<std::size_t> full_rank_coordinates(const Eigen::MatrixXd& covariance);

} // namespace treeid
