#include "treeid/loads.hpp"

#include <cmath>
#include <set>

#include "treeid/error.hpp"

namespace treeid {

void LoadModel::validate(const Graph& graph) const {
    if (static_cast<std::size_t>(means.size()) != vertices.size() ||
        static_cast<std::size_t>(variances.size()) != vertices.size())
        throw ModelError("load model vectors differ in length");
    std::set<VertexIndex> seen;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const VertexIndex v = vertices[i];
        if (v >= graph.num_vertices())
            throw ModelError("load on unknown vertex");
        if (v == graph.root())
            throw ModelError("the root vertex cannot carry a load");
        if (!seen.insert(v).second)
            throw ModelError("duplicate load on vertex '" + graph.vertex_name(v) + "'");
        const double var = variances[static_cast<Eigen::Index>(i)];
        if (!(var >= 0.0) || !std::isfinite(var))
            throw ModelError("negative or non-finite variance at '" + graph.vertex_name(v) + "'");
        if (!std::isfinite(means[static_cast<Eigen::Index>(i)]))
            throw ModelError("non-finite mean at '" + graph.vertex_name(v) + "'");
    }
}

Eigen::VectorXd LoadModel::consumption(const Graph& graph, const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != vertices.size())
        throw ModelError("load vector length does not match the model");
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(graph.num_vertices()));
    for (std::size_t i = 0; i < vertices.size(); ++i)
        c[static_cast<Eigen::Index>(vertices[i])] += x[static_cast<Eigen::Index>(i)];
    return c;
}

LoadModel LoadModel::with_sigma(double sigma) const {
    if (!(sigma >= 0.0))
        throw ModelError("standard deviation must be nonnegative");
    LoadModel out = *this;
    out.variances = Eigen::VectorXd::Constant(means.size(), sigma * sigma);
    return out;
}

LoadModel LoadModel::with_cv(double cv_fraction) const {
    if (!(cv_fraction >= 0.0))
        throw ModelError("coefficient of variation must be nonnegative");
    LoadModel out = *this;
    out.variances = (means * cv_fraction).array().square().matrix();
    return out;
}

LoadModel LoadModel::uniform(const Graph& graph, double mean, double sigma) {
    LoadModel model;
    for (VertexIndex v = 0; v < graph.num_vertices(); ++v)
        if (v != graph.root())
            model.vertices.push_back(v);
    const auto n = static_cast<Eigen::Index>(model.vertices.size());
    model.means = Eigen::VectorXd::Constant(n, mean);
    model.variances = Eigen::VectorXd::Constant(n, sigma * sigma);
    return model;
}

Eigen::VectorXd sample_loads(const LoadModel& model, Rng& rng) {
    Eigen::VectorXd x(model.means.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double var = model.variances[i];
        if (var < 0.0)
            throw ModelError("negative variance");
        std::normal_distribution<double> noise(0.0, 1.0);
        x[i] = model.means[i] + std::sqrt(var) * noise(rng);
    }
    return x;
}

Eigen::VectorXd sample_loads(const LoadModel& model, std::uint64_t seed) {
    Rng rng(seed);
    return sample_loads(model, rng);
}

double cv_scaling(double aggregate_kw) {
    if (!(aggregate_kw > 0.0) || !std::isfinite(aggregate_kw))
        throw DomainError("aggregate load must be positive");
    return std::sqrt(3562.0 / aggregate_kw + 41.9);
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t state = base;
    std::uint64_t out = splitmix64(state);
    for (std::uint64_t part : {a, b, c}) {
        state ^= out + part;
        out = splitmix64(state);
    }
    return out;
}

} // namespace treeid
