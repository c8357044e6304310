#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "treeid/graph.hpp"

namespace treeid {

// Forecast load at each load vertex with independent Gaussian error:
// x ~ N(means, diag(variances)). Vertices outside the model consume nothing.
struct LoadModel {
    std::vector<VertexIndex> vertices;
    Eigen::VectorXd means;
    Eigen::VectorXd variances;

    std::size_t size() const noexcept { return vertices.size(); }

    // Throws ModelError on negative variance, size mismatch, duplicate or
    // unknown vertices, or a load on the root.
    void validate(const Graph& graph) const;

    // Per-vertex consumption vector for load values `x` in model order.
    Eigen::VectorXd consumption(const Graph& graph, const Eigen::VectorXd& x) const;

    // Copies with every standard deviation replaced.
    LoadModel with_sigma(double sigma) const;
    LoadModel with_cv(double cv_fraction) const;

    // Every non-root vertex carries a load.
    static LoadModel uniform(const Graph& graph, double mean, double sigma);
};

using Rng = std::mt19937_64;

Eigen::VectorXd sample_loads(const LoadModel& model, Rng& rng);
Eigen::VectorXd sample_loads(const LoadModel& model, std::uint64_t seed);

// Forecast coefficient of variation, in percent, for an aggregate of
// `aggregate_kw` kW: sqrt(3562 / W + 41.9).
double cv_scaling(double aggregate_kw);

// Mixes a base seed with stream coordinates so every (cell, trial) gets an
// independent generator regardless of which worker runs it.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

} // namespace treeid
