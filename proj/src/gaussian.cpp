#include "treeid/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "treeid/error.hpp"

namespace treeid {

int compare_likelihood(const Likelihood& a, const Likelihood& b, double tie_tolerance) {
    if (a.excluded() || b.excluded())
        return a.excluded() == b.excluded() ? 0 : (a.excluded() ? -1 : 1);
    if (a.rank != b.rank)
        return a.rank < b.rank ? 1 : -1;
    const double scale = std::max({1.0, std::abs(a.log_density), std::abs(b.log_density)});
    const double diff = a.log_density - b.log_density;
    if (std::abs(diff) <= tie_tolerance * scale)
        return 0;
    return diff > 0 ? 1 : -1;
}

std::vector<std::size_t> full_rank_coordinates(const Eigen::MatrixXd& covariance) {
    const auto m = covariance.rows();
    if (covariance.cols() != m)
        throw PreconditionError("covariance must be square");
    const double trace = covariance.trace();
    std::vector<std::size_t> selected;
    if (!(trace > 0.0))
        return selected;
    const double threshold = 1e-12 * trace;

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i)
        perm[static_cast<std::size_t>(i)] = i;
    Eigen::VectorXd d = covariance.diagonal();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        Eigen::Index best = j;
        for (Eigen::Index i = j + 1; i < m; ++i)
            if (d[perm[static_cast<std::size_t>(i)]] > d[perm[static_cast<std::size_t>(best)]])
                best = i;
        const Eigen::Index p = perm[static_cast<std::size_t>(best)];
        if (d[p] <= threshold)
            break;
        std::swap(perm[static_cast<std::size_t>(j)], perm[static_cast<std::size_t>(best)]);
        const double pivot = std::sqrt(d[p]);
        l(p, j) = pivot;
        for (Eigen::Index i = j + 1; i < m; ++i) {
            const Eigen::Index q = perm[static_cast<std::size_t>(i)];
            double v = covariance(q, p);
            for (Eigen::Index k = 0; k < j; ++k)
                v -= l(q, k) * l(p, k);
            l(q, j) = v / pivot;
            d[q] -= l(q, j) * l(q, j);
        }
        selected.push_back(static_cast<std::size_t>(p));
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

GaussianEvaluator::GaussianEvaluator(Eigen::VectorXd mean, const Eigen::MatrixXd& covariance)
    : mean_(std::move(mean)) {
    const auto m = mean_.size();
    if (covariance.rows() != m || covariance.cols() != m)
        throw PreconditionError("covariance does not match the mean");
    selected_ = full_rank_coordinates(covariance);
    for (std::size_t i = 0; i < static_cast<std::size_t>(m); ++i)
        if (!std::binary_search(selected_.begin(), selected_.end(), i))
            dependent_.push_back(i);

    const auto r = static_cast<Eigen::Index>(selected_.size());
    const auto q = static_cast<Eigen::Index>(dependent_.size());
    Eigen::MatrixXd css(r, r);
    Eigen::MatrixXd cds(q, r);
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto si = static_cast<Eigen::Index>(selected_[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < r; ++j)
            css(i, j) = covariance(si, static_cast<Eigen::Index>(selected_[static_cast<std::size_t>(j)]));
        for (Eigen::Index j = 0; j < q; ++j)
            cds(j, i) = covariance(static_cast<Eigen::Index>(dependent_[static_cast<std::size_t>(j)]), si);
    }
    double log_det = 0.0;
    if (r > 0) {
        factor_.compute(css);
        if (factor_.info() != Eigen::Success)
            throw InternalInvariantViolation("selected covariance block is not positive definite");
        log_det = 2.0 * factor_.matrixL().toDenseMatrix().diagonal().array().log().sum();
        regression_ = factor_.solve(cds.transpose()).transpose();
    } else {
        regression_ = Eigen::MatrixXd::Zero(q, 0);
    }
    log_normalizer_ = -0.5 * (static_cast<double>(r) * std::log(2.0 * std::numbers::pi) + log_det);
}

Likelihood GaussianEvaluator::evaluate(const Eigen::VectorXd& z) const {
    if (z.size() != mean_.size())
        throw PreconditionError("observation length does not match the hypothesis");
    const Eigen::VectorXd dev = z - mean_;
    const auto r = static_cast<Eigen::Index>(selected_.size());
    Eigen::VectorXd ds(r);
    for (Eigen::Index i = 0; i < r; ++i)
        ds[i] = dev[static_cast<Eigen::Index>(selected_[static_cast<std::size_t>(i)])];

    double scale = 1.0;
    if (z.size() > 0)
        scale = std::max({1.0, z.cwiseAbs().maxCoeff(), mean_.cwiseAbs().maxCoeff()});
    const double tol = 1e-9 * scale;
    const Eigen::VectorXd predicted = regression_ * ds;
    for (std::size_t j = 0; j < dependent_.size(); ++j) {
        const double residual = dev[static_cast<Eigen::Index>(dependent_[j])] -
                                (r > 0 ? predicted[static_cast<Eigen::Index>(j)] : 0.0);
        if (!(std::abs(residual) <= tol))
            return Likelihood{-std::numeric_limits<double>::infinity(), selected_.size()};
    }

    double quad = 0.0;
    if (r > 0)
        quad = ds.dot(factor_.solve(ds));
    return Likelihood{log_normalizer_ - 0.5 * quad, selected_.size()};
}

} // namespace treeid
