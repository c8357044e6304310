#include "treeid/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "treeid/error.hpp"
#include "treeid/flow.hpp"

namespace treeid {

namespace {

bool same_observation(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol) {
    return a.size() == 0 || (a - b).cwiseAbs().maxCoeff() <= tol;
}

LoadModel model_at(const LoadModel& base, double sigma, SigmaMode mode) {
    return mode == SigmaMode::absolute ? base.with_sigma(sigma) : base.with_cv(sigma);
}

// Results of all detectors for one (placement, sigma, tree) cell.
struct JobResult {
    std::vector<std::size_t> misses;
    std::vector<std::size_t> failures;
    std::vector<std::size_t> agreement;
};

} // namespace

DeterministicReport run_deterministic_sweep(const Graph& graph, std::span<const Placement> placements,
                                            const Eigen::VectorXd& consumption,
                                            std::span<const EdgeId> required) {
    check_edge_ids(graph, required);
    const auto trees = enumerate_spanning_trees(graph, make_edge_set({required.begin(), required.end()}));
    const double largest = consumption.size() > 0 ? consumption.cwiseAbs().maxCoeff() : 0.0;
    const double tol = 1e-9 * std::max(1.0, largest);
    const std::size_t n = trees.size();
    DeterministicReport report;
    for (std::size_t p = 0; p < placements.size(); ++p) {
        std::vector<Eigen::VectorXd> signed_obs;
        std::vector<Eigen::VectorXd> unsigned_obs;
        for (const auto& tree : trees) {
            signed_obs.push_back(tree_flow_observation(graph, tree, placements[p], consumption));
            unsigned_obs.push_back(signed_obs.back().cwiseAbs());
        }
        std::size_t collisions = 0;
        std::size_t unsigned_collisions = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (same_observation(signed_obs[i], signed_obs[j], tol))
                    collisions += 2;
                if (same_observation(unsigned_obs[i], unsigned_obs[j], tol))
                    unsigned_collisions += 2;
            }
        }
        DeterministicRow row;
        row.placement = p;
        row.pairs = n * (n > 0 ? n - 1 : 0);
        if (row.pairs > 0) {
            row.epsilon = static_cast<double>(collisions) / static_cast<double>(row.pairs);
            row.epsilon_unsigned = static_cast<double>(unsigned_collisions) / static_cast<double>(row.pairs);
        }
        report.rows.push_back(row);
    }
    return report;
}

void ExperimentConfig::validate() const {
    if (trials == 0)
        throw PreconditionError("trials must be at least 1");
    if (placements.empty())
        throw PreconditionError("no placements to evaluate");
    if (detectors.empty())
        throw PreconditionError("no detectors configured");
    if (sigmas.empty())
        throw PreconditionError("no sigma values");
    for (double s : sigmas)
        if (!(s >= 0.0) || !std::isfinite(s))
            throw PreconditionError(fmt::format("sigma must be finite and nonnegative, got {}", s));
}

double CellEstimate::rate() const noexcept {
    return trials == 0 ? 0.0 : static_cast<double>(misses) / static_cast<double>(trials);
}

double CellEstimate::standard_error() const noexcept {
    if (trials == 0)
        return 0.0;
    const double p = rate();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

const CellEstimate& ErrorReport::cell(std::size_t placement, std::size_t sigma_index,
                                      std::size_t detector, std::size_t tree) const {
    const std::size_t d = detectors.size();
    const std::size_t idx = ((placement * sigmas.size() + sigma_index) * d + detector) * trees + tree;
    return cells.at(idx);
}

double ErrorReport::g1(std::size_t placement, std::size_t sigma_index, std::size_t detector) const {
    double sum = 0.0;
    for (std::size_t t = 0; t < trees; ++t)
        sum += cell(placement, sigma_index, detector, t).rate();
    return trees == 0 ? 0.0 : sum / static_cast<double>(trees);
}

double ErrorReport::g2(std::size_t placement, std::size_t sigma_index, std::size_t detector) const {
    double worst = 0.0;
    for (std::size_t t = 0; t < trees; ++t)
        worst = std::max(worst, cell(placement, sigma_index, detector, t).rate());
    return worst;
}

double ErrorReport::pooled_rate(std::size_t placement, std::size_t sigma_index,
                                std::size_t detector) const {
    std::size_t misses = 0;
    std::size_t total = 0;
    for (std::size_t t = 0; t < trees; ++t) {
        const auto& c = cell(placement, sigma_index, detector, t);
        misses += c.misses;
        total += c.trials;
    }
    return total == 0 ? 0.0 : static_cast<double>(misses) / static_cast<double>(total);
}

double ErrorReport::pooled_standard_error(std::size_t placement, std::size_t sigma_index,
                                          std::size_t detector) const {
    const double p = pooled_rate(placement, sigma_index, detector);
    const double n = static_cast<double>(trees * trials);
    return n == 0.0 ? 0.0 : std::sqrt(p * (1.0 - p) / n);
}

double ErrorReport::agreement_rate(std::size_t placement, std::size_t sigma_index, std::size_t a,
                                   std::size_t b) const {
    const auto& counts = agreement.at(placement * sigmas.size() + sigma_index);
    const double n = static_cast<double>(trees * trials);
    return n == 0.0 ? 1.0 : static_cast<double>(counts.at(a * detectors.size() + b)) / n;
}

ErrorReport run_stochastic_sweep(const Graph& graph, const ExperimentConfig& config) {
    config.validate();
    config.model.validate(graph);
    check_edge_ids(graph, config.required);
    const auto trees = enumerate_spanning_trees(graph, config.required);
    if (trees.empty())
        throw NoFeasibleHypothesis("no spanning tree contains the required edges");

    const std::size_t np = config.placements.size();
    const std::size_t ns = config.sigmas.size();
    const std::size_t nd = config.detectors.size();
    const std::size_t nt = trees.size();
    const std::size_t jobs = np * ns * nt;
    std::vector<JobResult> results(jobs);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        std::optional<HypothesisSpace> space;
        std::size_t space_key = static_cast<std::size_t>(-1);
        for (std::size_t job = next.fetch_add(1); job < jobs; job = next.fetch_add(1)) {
            const std::size_t t = job % nt;
            const std::size_t si = (job / nt) % ns;
            const std::size_t p = job / (nt * ns);
            const std::size_t key = p * ns + si;
            const LoadModel model = model_at(config.model, config.sigmas[si], config.sigma_mode);
            if (key != space_key) {
                space.emplace(graph, config.placements[p], model, config.required);
                space_key = key;
            }
            JobResult& out = results[job];
            out.misses.assign(nd, 0);
            out.failures.assign(nd, 0);
            out.agreement.assign(nd * nd, 0);
            std::vector<std::optional<SpanningTree>> found(nd);
            for (std::size_t trial = 0; trial < config.trials; ++trial) {
                Rng rng(derive_seed(config.seed, si, t, trial));
                const Eigen::VectorXd x = sample_loads(model, rng);
                const Eigen::VectorXd s = tree_flow_observation(
                    graph, trees[t], config.placements[p], model.consumption(graph, x));
                for (std::size_t d = 0; d < nd; ++d) {
                    try {
                        found[d] = run_detector(config.detectors[d], *space, s).tree;
                    } catch (const Error&) {
                        found[d].reset();
                        ++out.failures[d];
                    }
                    if (!found[d] || !(*found[d] == trees[t]))
                        ++out.misses[d];
                }
                for (std::size_t a = 0; a < nd; ++a)
                    for (std::size_t b = 0; b < nd; ++b)
                        if (found[a] && found[b] && *found[a] == *found[b])
                            ++out.agreement[a * nd + b];
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, jobs));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    ErrorReport report;
    for (const auto& d : config.detectors)
        report.detectors.push_back(d.name());
    report.sigmas = config.sigmas;
    report.placements = np;
    report.trees = nt;
    report.trials = config.trials;
    report.cells.reserve(np * ns * nd * nt);
    report.agreement.assign(np * ns, std::vector<std::size_t>(nd * nd, 0));
    for (std::size_t p = 0; p < np; ++p) {
        for (std::size_t si = 0; si < ns; ++si) {
            for (std::size_t d = 0; d < nd; ++d) {
                for (std::size_t t = 0; t < nt; ++t) {
                    const JobResult& r = results[(p * ns + si) * nt + t];
                    CellEstimate c;
                    c.placement = p;
                    c.detector = d;
                    c.sigma_index = si;
                    c.sigma = config.sigmas[si];
                    c.true_tree = t;
                    c.trials = config.trials;
                    c.misses = r.misses[d];
                    c.failures = r.failures[d];
                    report.cells.push_back(c);
                }
            }
            auto& agree = report.agreement[p * ns + si];
            for (std::size_t t = 0; t < nt; ++t) {
                const JobResult& r = results[(p * ns + si) * nt + t];
                for (std::size_t i = 0; i < nd * nd; ++i)
                    agree[i] += r.agreement[i];
            }
        }
    }
    return report;
}

std::vector<RankingRow> rank_placements(const ErrorReport& report, std::size_t sigma_index,
                                        std::size_t detector) {
    std::vector<RankingRow> rows;
    for (std::size_t p = 0; p < report.placements; ++p)
        rows.push_back({p, report.g1(p, sigma_index, detector), report.g2(p, sigma_index, detector), 0});
    std::stable_sort(rows.begin(), rows.end(), [](const RankingRow& a, const RankingRow& b) {
        if (a.g2 != b.g2)
            return a.g2 > b.g2;
        if (a.g1 != b.g1)
            return a.g1 > b.g1;
        return a.placement < b.placement;
    });
    for (std::size_t i = 0; i < rows.size(); ++i)
        rows[i].rank = i + 1;
    return rows;
}

std::vector<RankingRow> evaluate_placements(const Graph& graph, const PlacementFamily& family,
                                            const LoadModel& model, double sigma,
                                            SigmaMode mode, std::size_t trials,
                                            const DetectorSpec& detector, std::uint64_t seed,
                                            std::size_t workers) {
    if (family.placements.empty())
        throw PreconditionError("placement family is empty");
    ExperimentConfig config;
    config.placements = family.placements;
    config.model = model;
    config.sigmas = {sigma};
    config.sigma_mode = mode;
    config.trials = trials;
    config.detectors = {detector};
    config.seed = seed;
    config.workers = workers;
    config.required = family.restriction;
    return rank_placements(run_stochastic_sweep(graph, config));
}

void write_deterministic_csv(std::ostream& out, const DeterministicReport& report) {
    fmt::print(out, "placement,epsilon,epsilon_unsigned,pairs\n");
    for (const auto& row : report.rows)
        fmt::print(out, "{},{},{},{}\n", row.placement, row.epsilon, row.epsilon_unsigned, row.pairs);
}

void write_sweep_csv(std::ostream& out, const ErrorReport& report) {
    fmt::print(out, "placement,detector,sigma,true_tree,trials,misses,rate,stderr\n");
    for (const auto& c : report.cells)
        fmt::print(out, "{},{},{},{},{},{},{},{}\n", c.placement, report.detectors[c.detector],
                   c.sigma, c.true_tree, c.trials, c.misses, c.rate(), c.standard_error());
}

void write_ranking_csv(std::ostream& out, std::span<const RankingRow> rows) {
    fmt::print(out, "placement,g1,g2,rank\n");
    for (const auto& row : rows)
        fmt::print(out, "{},{},{},{}\n", row.placement, row.g1, row.g2, row.rank);
}

} // namespace treeid
