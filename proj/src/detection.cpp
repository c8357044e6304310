#include "treeid/detection.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "treeid/cycles.hpp"
#include "treeid/error.hpp"

namespace treeid {

namespace {

double zero_tolerance(const Eigen::VectorXd& consumption) {
    const double largest = consumption.size() > 0 ? consumption.cwiseAbs().maxCoeff() : 0.0;
    return 1e-9 * std::max(1.0, largest);
}

EdgeSet sorted_required(const Graph& graph, std::span<const EdgeId> required) {
    check_edge_ids(graph, required);
    return make_edge_set({required.begin(), required.end()});
}

// Lexicographically smallest tree wins ties; strict improvement otherwise.
bool better(const Likelihood& a, const SpanningTree& ta, const Likelihood& b,
            const SpanningTree& tb) {
    const int c = compare_likelihood(a, b);
    if (c != 0)
        return c > 0;
    return ta < tb;
}

DetectionResult argmax(const std::vector<SpanningTree>& trees,
                       const std::vector<Likelihood>& values, std::string method) {
    std::size_t best = trees.size();
    std::size_t excluded = 0;
    for (std::size_t i = 0; i < trees.size(); ++i) {
        if (values[i].excluded()) {
            ++excluded;
            continue;
        }
        if (best == trees.size() || better(values[i], trees[i], values[best], trees[best]))
            best = i;
    }
    if (best == trees.size())
        throw NoFeasibleHypothesis("every hypothesis is inconsistent with the observation");
    DetectionResult result{trees[best], values[best], std::move(method)};
    result.iterations = trees.size();
    result.pruned = excluded;
    return result;
}

SpanningTree exchange(const Graph& graph, const SpanningTree& tree, EdgeId add, EdgeId remove) {
    EdgeSet edges;
    edges.reserve(tree.size());
    for (EdgeId e : tree.edges())
        if (e != remove)
            edges.push_back(e);
    edges.push_back(add);
    return SpanningTree::certify(graph, std::move(edges));
}

} // namespace

std::string to_csv_row(const DetectionResult& result) {
    return fmt::format("{},{},{},{},{}", result.method, fmt::join(result.tree.edges(), ";"),
                       result.likelihood.log_density, result.iterations,
                       result.converged ? "true" : "false");
}

HypothesisSpace::HypothesisSpace(const Graph& graph, Placement placement, LoadModel model,
                                 EdgeSet required)
    : graph_(&graph), placement_(std::move(placement)), model_(std::move(model)),
      required_(make_edge_set(std::move(required))) {
    check_edge_ids(graph, placement_.sensor_edges());
    check_edge_ids(graph, required_);
    model_.validate(graph);
    forecast_ = model_.consumption(graph, model_.means);
}

const std::vector<SpanningTree>& HypothesisSpace::hypotheses() {
    if (!hypotheses_)
        hypotheses_ = enumerate_spanning_trees(*graph_, required_);
    return *hypotheses_;
}

const GaussianEvaluator& HypothesisSpace::evaluator(const SpanningTree& tree) {
    auto it = evaluators_.find(tree.indicator());
    if (it == evaluators_.end()) {
        auto dist = hypothesis_flow_distribution(*graph_, tree, placement_, model_);
        it = evaluators_
                 .emplace(tree.indicator(), GaussianEvaluator(std::move(dist.mean), dist.covariance))
                 .first;
    }
    return it->second;
}

Likelihood HypothesisSpace::likelihood(const SpanningTree& tree, const Eigen::VectorXd& observation) {
    return evaluator(tree).evaluate(observation);
}

const RelaxedFlowSolver& HypothesisSpace::solver() {
    if (!solver_)
        solver_.emplace(*graph_, placement_);
    return *solver_;
}

Likelihood log_likelihood(const Graph& graph, const Eigen::VectorXd& observation,
                          const SpanningTree& tree, const Placement& placement,
                          const LoadModel& model) {
    auto dist = hypothesis_flow_distribution(graph, tree, placement, model);
    return GaussianEvaluator(std::move(dist.mean), dist.covariance).evaluate(observation);
}

DetectionResult detect_deterministic(const Graph& graph, const Placement& placement,
                                     const Eigen::VectorXd& consumption,
                                     const Eigen::VectorXd& observation,
                                     std::span<const EdgeId> required) {
    const EdgeSet forced = sorted_required(graph, required);
    const FlowSolution solution = relaxed_flow_solution(graph, placement, consumption, observation);
    const double tol = zero_tolerance(consumption);
    std::vector<bool> in(graph.num_edges(), false);
    for (EdgeId e : forced)
        in[e] = true;
    for (std::size_t e = 0; e < graph.num_edges(); ++e)
        if (std::abs(solution.flow[static_cast<Eigen::Index>(e)]) > tol)
            in[e] = true;
    EdgeSet support;
    for (std::size_t e = 0; e < graph.num_edges(); ++e)
        if (in[e])
            support.push_back(e);
    if (!is_spanning_tree(graph, support))
        throw InconsistentObservation(
            fmt::format("flow support has {} edges and is not a spanning tree", support.size()));
    DetectionResult result{SpanningTree::certify(graph, std::move(support)), Likelihood{0.0, 0},
                           "deterministic"};
    result.iterations = 1;
    return result;
}

std::vector<SpanningTree> detect_enumeration_oracle(const Graph& graph, const Placement& placement,
                                                    const Eigen::VectorXd& consumption,
                                                    const Eigen::VectorXd& observation,
                                                    std::span<const EdgeId> required) {
    const EdgeSet forced = sorted_required(graph, required);
    if (static_cast<std::size_t>(observation.size()) != placement.size())
        throw PreconditionError("observation length does not match the placement");
    const double tol = zero_tolerance(consumption);
    std::vector<SpanningTree> matches;
    for_each_spanning_tree(graph, forced, [&](const SpanningTree& tree) {
        const Eigen::VectorXd s = tree_flow_observation(graph, tree, placement, consumption);
        if (s.size() == 0 || (s - observation).cwiseAbs().maxCoeff() <= tol)
            matches.push_back(tree);
        return true;
    });
    return matches;
}

std::vector<Likelihood> map_likelihoods(HypothesisSpace& space, const Eigen::VectorXd& observation) {
    const auto& trees = space.hypotheses();
    std::vector<Likelihood> values;
    values.reserve(trees.size());
    for (const auto& tree : trees)
        values.push_back(space.likelihood(tree, observation));
    return values;
}

DetectionResult detect_map(HypothesisSpace& space, const Eigen::VectorXd& observation) {
    return argmax(space.hypotheses(), map_likelihoods(space, observation), "map");
}

DetectionResult detect_map(const Graph& graph, const Placement& placement, const LoadModel& model,
                           const Eigen::VectorXd& observation, std::span<const EdgeId> required) {
    HypothesisSpace space(graph, placement, model, make_edge_set({required.begin(), required.end()}));
    return detect_map(space, observation);
}

ZeroFlowStatistic zero_flow_statistic(HypothesisSpace& space, const SpanningTree& tree) {
    const Graph& graph = space.graph();
    const Eigen::MatrixXd& j = space.solver().sensitivity();
    ZeroFlowStatistic stat;
    stat.indices = tree.cotree();
    const auto k = static_cast<Eigen::Index>(stat.indices.size());
    stat.selector = Eigen::MatrixXd::Zero(k, static_cast<Eigen::Index>(graph.num_edges()));
    for (Eigen::Index i = 0; i < k; ++i)
        stat.selector(i, static_cast<Eigen::Index>(stat.indices[static_cast<std::size_t>(i)])) = 1.0;
    stat.h = stat.selector * j;
    const auto dist = hypothesis_flow_distribution(graph, tree, space.placement(), space.model());
    stat.mean = Eigen::VectorXd::Zero(k);
    stat.covariance = stat.h * dist.covariance * stat.h.transpose();
    stat.covariance = 0.5 * (stat.covariance + stat.covariance.transpose()).eval();
    return stat;
}

std::vector<Likelihood> zero_flow_likelihoods(HypothesisSpace& space,
                                              const Eigen::VectorXd& observation) {
    if (space.placement().size() != circuit_rank(space.graph()))
        throw UnsupportedConfiguration(
            fmt::format("zero-flow detection needs exactly {} sensors, placement has {}",
                        circuit_rank(space.graph()), space.placement().size()));
    const FlowSolution noisy = space.solver().solve(space.forecast_consumption(), observation);
    std::vector<Likelihood> values;
    for (const auto& tree : space.hypotheses()) {
        const ZeroFlowStatistic stat = zero_flow_statistic(space, tree);
        Eigen::VectorXd z(static_cast<Eigen::Index>(stat.indices.size()));
        for (std::size_t i = 0; i < stat.indices.size(); ++i)
            z[static_cast<Eigen::Index>(i)] = noisy.flow[static_cast<Eigen::Index>(stat.indices[i])];
        values.push_back(GaussianEvaluator(stat.mean, stat.covariance).evaluate(z));
    }
    return values;
}

DetectionResult detect_zero_flow_map(HypothesisSpace& space, const Eigen::VectorXd& observation) {
    auto values = zero_flow_likelihoods(space, observation);
    return argmax(space.hypotheses(), values, "zeroflow");
}

DetectionResult detect_zero_flow_map(const Graph& graph, const Placement& placement,
                                     const LoadModel& model, const Eigen::VectorXd& observation,
                                     std::span<const EdgeId> required) {
    HypothesisSpace space(graph, placement, model, make_edge_set({required.begin(), required.end()}));
    return detect_zero_flow_map(space, observation);
}

DetectionResult detect_fmst(HypothesisSpace& space, const Eigen::VectorXd& observation) {
    const FlowSolution noisy = space.solver().solve(space.forecast_consumption(), observation);
    std::vector<double> weights(space.graph().num_edges());
    for (std::size_t e = 0; e < weights.size(); ++e)
        weights[e] = std::abs(noisy.flow[static_cast<Eigen::Index>(e)]);
    SpanningTree tree = max_weight_spanning_tree(space.graph(), weights, space.required());
    const Likelihood value = space.likelihood(tree, observation);
    DetectionResult result{std::move(tree), value, "fmst"};
    result.iterations = 1;
    return result;
}

DetectionResult detect_fmst(const Graph& graph, const Placement& placement, const LoadModel& model,
                            const Eigen::VectorXd& observation, std::span<const EdgeId> required) {
    HypothesisSpace space(graph, placement, model, make_edge_set({required.begin(), required.end()}));
    return detect_fmst(space, observation);
}

SpanningTree feasible_tree(const Graph& graph, const Eigen::VectorXd& observation,
                           const Placement& placement, std::span<const EdgeId> required) {
    if (static_cast<std::size_t>(observation.size()) != placement.size())
        throw PreconditionError("observation length does not match the placement");
    const EdgeSet forced = sorted_required(graph, required);
    const double tol = zero_tolerance(observation);
    const double heavy = static_cast<double>(graph.num_edges());
    std::vector<double> weights(graph.num_edges(), 1.0);
    std::vector<int> pattern(graph.num_edges(), 0); // 1 nonzero, -1 zero, 0 unmeasured
    for (std::size_t k = 0; k < placement.size(); ++k) {
        const EdgeId e = placement.sensor_edge(k);
        const bool nonzero = std::abs(observation[static_cast<Eigen::Index>(k)]) > tol;
        weights[e] = nonzero ? heavy : 0.0;
        pattern[e] = nonzero ? 1 : -1;
    }
    SpanningTree tree = max_weight_spanning_tree(graph, weights, forced);
    for (std::size_t e = 0; e < pattern.size(); ++e) {
        if ((pattern[e] == 1 && !tree.contains(e)) || (pattern[e] == -1 && tree.contains(e)))
            throw InconsistentObservation(fmt::format(
                "no spanning tree matches the zero pattern of the sensor readings (edge {})", e));
    }
    return tree;
}

DetectionResult detect_cycle_descent(HypothesisSpace& space, const Eigen::VectorXd& observation,
                                     std::size_t max_sweeps, std::vector<Likelihood>* trace) {
    const Graph& graph = space.graph();
    const std::size_t mu = circuit_rank(graph);
    if (max_sweeps == 0)
        max_sweeps = std::max<std::size_t>(1, 100 * mu);
    std::vector<bool> fixed(graph.num_edges(), false);
    for (EdgeId e : space.required())
        fixed[e] = true;

    SpanningTree current = feasible_tree(graph, observation, space.placement(), space.required());
    Likelihood value = space.likelihood(current, observation);
    if (trace)
        trace->push_back(value);
    std::vector<EdgeId> generators = current.cotree();
    std::size_t sweeps = 0;
    std::size_t pruned = 0;
    bool converged = false;
    while (sweeps < max_sweeps) {
        bool improved = false;
        for (std::size_t k = 0; k < generators.size(); ++k) {
            const EdgeId g = generators[k];
            const Cycle cycle = fundamental_cycle(graph, current, g);
            std::optional<SpanningTree> best;
            Likelihood best_value = value;
            EdgeId removed = g;
            for (EdgeId e : cycle.edges) {
                if (e == g || fixed[e])
                    continue;
                SpanningTree candidate = exchange(graph, current, g, e);
                const Likelihood v = space.likelihood(candidate, observation);
                if (v.excluded()) {
                    ++pruned;
                    continue;
                }
                const bool beats_current = compare_likelihood(v, value) > 0;
                if (!beats_current)
                    continue;
                if (!best || better(v, candidate, best_value, *best)) {
                    best = std::move(candidate);
                    best_value = v;
                    removed = e;
                }
            }
            if (best) {
                current = std::move(*best);
                value = best_value;
                generators[k] = removed;
                improved = true;
                if (trace)
                    trace->push_back(value);
            }
        }
        ++sweeps;
        if (!improved) {
            converged = true;
            break;
        }
    }
    DetectionResult result{std::move(current), value, "cycledescent"};
    result.iterations = sweeps;
    result.pruned = pruned;
    result.converged = converged;
    return result;
}

DetectionResult detect_cycle_descent(const Graph& graph, const Placement& placement,
                                     const LoadModel& model, const Eigen::VectorXd& observation,
                                     std::span<const EdgeId> required) {
    HypothesisSpace space(graph, placement, model, make_edge_set({required.begin(), required.end()}));
    return detect_cycle_descent(space, observation);
}

std::vector<SpanningTree> basis_preserving_neighbors(const Graph& graph, const SpanningTree& seed,
                                                     std::span<const EdgeId> required) {
    const EdgeSet forced = sorted_required(graph, required);
    const FundamentalCycleBasis basis = fundamental_cycle_basis(graph, seed);
    std::vector<std::size_t> cycles_through(graph.num_edges(), 0);
    for (const auto& c : basis.cycles)
        for (EdgeId e : c.edges)
            ++cycles_through[e];
    std::vector<SpanningTree> neighbors;
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const EdgeId g = basis.generators[k];
        for (EdgeId e : basis.cycles[k].edges) {
            if (e == g || cycles_through[e] != 1 || std::binary_search(forced.begin(), forced.end(), e))
                continue;
            neighbors.push_back(exchange(graph, seed, g, e));
        }
    }
    return neighbors;
}

DetectionResult local_map_search(HypothesisSpace& space, const Eigen::VectorXd& observation,
                                 const SpanningTree& seed) {
    SpanningTree best = seed;
    Likelihood best_value = space.likelihood(seed, observation);
    const auto neighbors = basis_preserving_neighbors(space.graph(), seed, space.required());
    std::size_t pruned = 0;
    for (const auto& candidate : neighbors) {
        const Likelihood v = space.likelihood(candidate, observation);
        if (v.excluded()) {
            ++pruned;
            continue;
        }
        const int c = compare_likelihood(v, best_value);
        // The seed keeps ties against its neighbors; among strict
        // improvements the usual tie-break applies.
        if (c > 0 || (c == 0 && !(best == seed) && candidate < best)) {
            best = candidate;
            best_value = v;
        }
    }
    DetectionResult result{std::move(best), best_value, "local"};
    result.iterations = neighbors.size();
    result.pruned = pruned;
    return result;
}

std::string_view method_name(Method method) {
    switch (method) {
    case Method::deterministic: return "deterministic";
    case Method::enumeration: return "enum";
    case Method::map: return "map";
    case Method::zero_flow: return "zeroflow";
    case Method::fmst: return "fmst";
    case Method::cycle_descent: return "cycledescent";
    }
    throw InternalInvariantViolation("unknown method");
}

std::optional<Method> parse_method(std::string_view name) {
    for (Method m : {Method::deterministic, Method::enumeration, Method::map, Method::zero_flow,
                     Method::fmst, Method::cycle_descent})
        if (method_name(m) == name)
            return m;
    return std::nullopt;
}

std::string DetectorSpec::name() const {
    std::string out(method_name(method));
    if (local_search)
        out += "+local";
    return out;
}

std::optional<DetectorSpec> parse_detector(std::string_view name) {
    constexpr std::string_view suffix = "+local";
    DetectorSpec spec;
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
        spec.local_search = true;
        name.remove_suffix(suffix.size());
    }
    const auto method = parse_method(name);
    if (!method)
        return std::nullopt;
    spec.method = *method;
    return spec;
}

DetectionResult run_detector(const DetectorSpec& spec, HypothesisSpace& space,
                             const Eigen::VectorXd& observation) {
    DetectionResult result = [&]() -> DetectionResult {
        switch (spec.method) {
        case Method::deterministic:
            return detect_deterministic(space.graph(), space.placement(), space.forecast_consumption(),
                                        observation, space.required());
        case Method::enumeration: {
            auto matches = detect_enumeration_oracle(space.graph(), space.placement(),
                                                     space.forecast_consumption(), observation,
                                                     space.required());
            if (matches.empty())
                throw NoFeasibleHypothesis("no tree reproduces the observation");
            DetectionResult r{matches.front(), space.likelihood(matches.front(), observation), "enum"};
            r.iterations = matches.size();
            return r;
        }
        case Method::map: return detect_map(space, observation);
        case Method::zero_flow: return detect_zero_flow_map(space, observation);
        case Method::fmst: return detect_fmst(space, observation);
        case Method::cycle_descent: return detect_cycle_descent(space, observation);
        }
        throw InternalInvariantViolation("unknown method");
    }();
    if (spec.local_search) {
        DetectionResult refined = local_map_search(space, observation, result.tree);
        refined.iterations += result.iterations;
        refined.pruned += result.pruned;
        refined.converged = result.converged;
        result = std::move(refined);
    }
    result.method = spec.name();
    return result;
}

} // namespace treeid
