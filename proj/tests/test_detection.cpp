#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <numeric>

#include "support.hpp"
#include "treeid/cycles.hpp"
#include "treeid/detection.hpp"
#include "treeid/error.hpp"
#include "treeid/fixture.hpp"
#include "treeid/flow.hpp"
#include "treeid/placement.hpp"

using namespace treeid;
using namespace treeid::testing;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v)
        out[i++] = d;
    return out;
}

// Observation of `tree` under one load draw from `model`.
Eigen::VectorXd draw(const Graph& g, const SpanningTree& tree, const Placement& m,
                     const LoadModel& model, std::uint64_t seed) {
    return tree_flow_observation(g, tree, m, model.consumption(g, sample_loads(model, seed)));
}

struct Fixture {
    IslandFixture fx = build_island_fixture();
    std::vector<Placement> placements = enumerate_valid_placements(fx.graph, fx.tau).placements;
    std::vector<SpanningTree> trees = enumerate_spanning_trees(fx.graph, fx.tau);
};

} // namespace

TEST_SUITE("detection") {

TEST_CASE("deterministic decoding on the five-vertex example") {
    const Graph g = read_graph(data_dir() / "corpus" / "example5.graph");
    Eigen::VectorXd x = Eigen::VectorXd::Ones(5);
    x[0] = 0.0;
    const auto r = detect_deterministic(g, Placement({2, 4}), x, vec({0, 0}));
    CHECK(r.tree.edges() == EdgeSet{0, 1, 3, 5});
    CHECK(r.method == "deterministic");
    CHECK_THROWS_AS(detect_deterministic(g, Placement({1, 2}), x, vec({0, 0})), InvalidPlacement);
}

TEST_CASE("deterministic decoding recovers every tree") {
    Fixture f;
    const auto x = f.fx.loads.consumption(f.fx.graph, generic_loads(f.fx.loads, 77));
    for (std::size_t p = 0; p < f.placements.size(); p += 4) {
        for (const auto& t : f.trees) {
            const auto s = tree_flow_observation(f.fx.graph, t, f.placements[p], x);
            CHECK(detect_deterministic(f.fx.graph, f.placements[p], x, s, f.fx.tau).tree == t);
        }
    }
}

TEST_CASE("deterministic decoding on small corpus graphs") {
    for (const auto& [name, g] : corpus()) {
        if (g.num_vertices() > 6)
            continue;
        CAPTURE(name);
        const auto x = generic_consumption(g, 31);
        const auto trees = enumerate_spanning_trees(g);
        for (const auto& m : enumerate_valid_placements(g, {}).placements)
            for (const auto& t : trees)
                CHECK(detect_deterministic(g, m, x, tree_flow_observation(g, t, m, x)).tree == t);
    }
}

TEST_CASE("inconsistent readings are rejected") {
    Fixture f;
    const auto x = f.fx.loads.consumption(f.fx.graph, generic_loads(f.fx.loads, 3));
    const Placement& m = f.placements[0];
    for (std::size_t t = 0; t < f.trees.size(); t += 5) {
        Eigen::VectorXd s = tree_flow_observation(f.fx.graph, f.trees[t], m, x);
        s[1] += 1.0;
        CHECK_THROWS_AS(detect_deterministic(f.fx.graph, m, x, s), InconsistentObservation);
    }
}

TEST_CASE("enumeration oracle") {
    Fixture f;
    const auto x = f.fx.loads.consumption(f.fx.graph, generic_loads(f.fx.loads, 8));
    const Placement& m = f.placements[10];
    for (std::size_t t = 0; t < f.trees.size(); t += 3) {
        const auto s = tree_flow_observation(f.fx.graph, f.trees[t], m, x);
        const auto found = detect_enumeration_oracle(f.fx.graph, m, x, s, f.fx.tau);
        REQUIRE(found.size() == 1);
        CHECK(found[0] == detect_deterministic(f.fx.graph, m, x, s, f.fx.tau).tree);
    }
    CHECK(detect_enumeration_oracle(f.fx.graph, Placement{}, x, Eigen::VectorXd(0), f.fx.tau).size() ==
          44);

    // e6, e7, e9, e10 leave the cycle through F3, v3, F4 unmeasured.
    const Placement invalid({5, 6, 8, 9});
    std::size_t widest = 0;
    for (const auto& t : f.trees) {
        const auto s = tree_flow_observation(f.fx.graph, t, invalid, x);
        widest = std::max(widest, detect_enumeration_oracle(f.fx.graph, invalid, x, s, f.fx.tau).size());
    }
    CHECK(widest >= 2);
}

TEST_CASE("log-likelihood at the hypothesis mean") {
    Fixture f;
    const auto model = f.fx.loads.with_sigma(0.2);
    const Placement& m = f.placements[0];
    for (std::size_t t = 0; t < f.trees.size(); t += 4) {
        const auto dist = hypothesis_flow_distribution(f.fx.graph, f.trees[t], m, model);
        const auto l = log_likelihood(f.fx.graph, dist.mean, f.trees[t], m, model);
        const auto sel = full_rank_coordinates(dist.covariance);
        Eigen::MatrixXd reduced(sel.size(), sel.size());
        for (std::size_t i = 0; i < sel.size(); ++i)
            for (std::size_t j = 0; j < sel.size(); ++j)
                reduced(i, j) = dist.covariance(sel[i], sel[j]);
        const double expected =
            -0.5 * (static_cast<double>(sel.size()) * std::log(2.0 * std::numbers::pi) +
                    std::log(reduced.determinant()));
        CHECK(l.rank == sel.size());
        CHECK(l.log_density == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("equidistant scalar observation gives equal likelihoods") {
    const Graph g = read_graph(data_dir() / "corpus" / "k3.graph");
    const auto model = LoadModel::uniform(g, 1.0, 0.5);
    const Placement m({1});
    // The sensor on b -> c reads x_c or -x_b depending on which end the tree
    // feeds from the root; zero sits halfway between them.
    std::vector<SpanningTree> signed_trees;
    for (const auto& t : enumerate_spanning_trees(g))
        if (t.contains(1))
            signed_trees.push_back(t);
    REQUIRE(signed_trees.size() == 2);
    const auto a = log_likelihood(g, vec({0.0}), signed_trees[0], m, model);
    const auto b = log_likelihood(g, vec({0.0}), signed_trees[1], m, model);
    CHECK(a.log_density == doctest::Approx(b.log_density));
    CHECK(compare_likelihood(a, b) == 0);
}

TEST_CASE("the generating tree is usually the most likely") {
    Fixture f;
    const auto model = f.fx.loads.with_sigma(0.1);
    HypothesisSpace space(f.fx.graph, f.placements[5], model, f.fx.tau);
    int wins = 0;
    const int trials = 1000;
    for (int i = 0; i < trials; ++i) {
        const std::size_t t = static_cast<std::size_t>(i) % f.trees.size();
        const auto s = draw(f.fx.graph, f.trees[t], space.placement(), model, derive_seed(9, i));
        const auto all = map_likelihoods(space, s);
        bool best = true;
        for (const auto& l : all)
            best = best && compare_likelihood(all[t], l) >= 0;
        wins += best ? 1 : 0;
    }
    CHECK(wins >= 990);
}

TEST_CASE("map detection") {
    Fixture f;
    const Placement& m = f.placements[20];

    HypothesisSpace quiet(f.fx.graph, m, f.fx.loads.with_sigma(1e-6), f.fx.tau);
    for (std::size_t t = 0; t < f.trees.size(); ++t) {
        const auto s = tree_flow_observation(f.fx.graph, f.trees[t], m, quiet.forecast_consumption());
        const auto r = detect_map(quiet, s);
        CHECK(r.tree == f.trees[t]);
        CHECK(r.method == "map");
    }

    const auto noisy_model = f.fx.loads.with_cv(0.5);
    HypothesisSpace noisy(f.fx.graph, m, noisy_model, f.fx.tau);
    std::size_t misses = 0;
    std::size_t total = 0;
    for (std::size_t t = 0; t < f.trees.size(); ++t) {
        for (std::uint64_t k = 0; k < 25; ++k) {
            const auto s = draw(f.fx.graph, f.trees[t], m, noisy_model, derive_seed(4, t, k));
            misses += detect_map(noisy, s).tree == f.trees[t] ? 0 : 1;
            ++total;
        }
    }
    CHECK(static_cast<double>(misses) / static_cast<double>(total) < 1.0 - 1.0 / 44.0);

    // Readings far from every hypothesis still produce an answer, with a
    // poor likelihood.
    const auto s = tree_flow_observation(f.fx.graph, f.trees[0], m, noisy.forecast_consumption());
    const auto wild = detect_map(noisy, vec({40.0, -13.0, 27.0, 8.5}));
    CHECK(wild.tree.size() == 9);
    CHECK(wild.log_likelihood() < detect_map(noisy, s).log_likelihood() - 100.0);

    // All sensors at zero is exactly what the tree avoiding every sensor
    // predicts, with no spread at all.
    const auto zero = detect_map(noisy, Eigen::VectorXd::Zero(4));
    CHECK(zero.tree == tree_from_placement(f.fx.graph, m));
    CHECK(zero.likelihood.rank == 0);

    HypothesisSpace exact(f.fx.graph, m, f.fx.loads, f.fx.tau);
    CHECK_THROWS_AS(detect_map(exact, vec({0.3, 0.3, 0.3, 0.3})), NoFeasibleHypothesis);

    // The convenience overload agrees with the cached space.
    CHECK(detect_map(f.fx.graph, m, noisy_model, s, f.fx.tau).tree == detect_map(noisy, s).tree);
}

TEST_CASE("zero-flow statistic") {
    Fixture f;
    const auto model = f.fx.loads.with_sigma(0.2);
    for (std::size_t p = 0; p < f.placements.size(); p += 3) {
        HypothesisSpace space(f.fx.graph, f.placements[p], model, f.fx.tau);
        for (const auto& t : f.trees) {
            const auto z = zero_flow_statistic(space, t);
            CHECK(z.indices == t.cotree());
            REQUIRE(z.selector.rows() == 4);
            for (Eigen::Index k = 0; k < 4; ++k) {
                CHECK(z.selector.row(k).sum() == 1.0);
                CHECK(z.selector(k, static_cast<Eigen::Index>(z.indices[static_cast<std::size_t>(k)])) ==
                      1.0);
            }
            CHECK(std::abs(z.h.determinant()) == doctest::Approx(1.0));
            CHECK((z.covariance - z.covariance.transpose()).cwiseAbs().maxCoeff() < 1e-12);

            // With the forecast loads the true tree's co-tree flows vanish.
            const auto s = tree_flow_observation(f.fx.graph, t, space.placement(),
                                                 space.forecast_consumption());
            const auto sol = space.solver().solve(space.forecast_consumption(), s);
            CHECK((z.selector * sol.flow).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("zero-flow and map rank hypotheses identically") {
    Fixture f;
    for (std::uint64_t k = 0; k < 30; ++k) {
        const auto model = f.fx.loads.with_cv(0.05 + 0.015 * static_cast<double>(k));
        const Placement& m = f.placements[(k * 7) % f.placements.size()];
        const SpanningTree& truth = f.trees[(k * 11) % f.trees.size()];
        HypothesisSpace space(f.fx.graph, m, model, f.fx.tau);
        const auto s = draw(f.fx.graph, truth, m, model, derive_seed(12, k));

        const auto a = map_likelihoods(space, s);
        const auto b = zero_flow_likelihoods(space, s);
        REQUIRE(a.size() == b.size());
        std::vector<std::size_t> order_a(a.size());
        std::iota(order_a.begin(), order_a.end(), 0);
        auto order_b = order_a;
        auto by = [](const std::vector<Likelihood>& l) {
            return [&l](std::size_t i, std::size_t j) {
                const int c = compare_likelihood(l[i], l[j]);
                return c != 0 ? c > 0 : i < j;
            };
        };
        std::sort(order_a.begin(), order_a.end(), by(a));
        std::sort(order_b.begin(), order_b.end(), by(b));
        CHECK(order_a == order_b);
        CHECK(detect_zero_flow_map(space, s).tree == detect_map(space, s).tree);
    }
}

TEST_CASE("zero-flow detection needs a minimal placement") {
    Fixture f;
    const Placement oversized({4, 5, 6, 8, 11});
    HypothesisSpace space(f.fx.graph, oversized, f.fx.loads.with_sigma(0.1), f.fx.tau);
    CHECK_THROWS_AS(zero_flow_likelihoods(space, Eigen::VectorXd::Zero(5)), UnsupportedConfiguration);

    HypothesisSpace exact(f.fx.graph, f.placements[0], f.fx.loads.with_sigma(0.0), f.fx.tau);
    for (std::size_t t = 0; t < f.trees.size(); t += 6) {
        const auto s = tree_flow_observation(f.fx.graph, f.trees[t], exact.placement(),
                                             exact.forecast_consumption());
        CHECK(detect_zero_flow_map(exact, s).tree == f.trees[t]);
    }
}

TEST_CASE("fmst detection") {
    Fixture f;
    const Placement& m = f.placements[7];
    const auto model = f.fx.loads.with_cv(0.3);
    HypothesisSpace space(f.fx.graph, m, model, f.fx.tau);
    for (const auto& t : f.trees) {
        const auto s = tree_flow_observation(f.fx.graph, t, m, space.forecast_consumption());
        const auto r = detect_fmst(space, s);
        CHECK(r.tree == t);
        CHECK(r.tree ==
              detect_deterministic(f.fx.graph, m, space.forecast_consumption(), s, f.fx.tau).tree);
        CHECK(r.method == "fmst");
    }

    // Noise can make a true-tree edge the weakest on its cycle; FMST then
    // disagrees with MAP.
    bool differs = false;
    for (std::uint64_t k = 0; k < 2000 && !differs; ++k) {
        const auto& t = f.trees[k % f.trees.size()];
        const auto s = draw(f.fx.graph, t, m, model, derive_seed(6, k));
        differs = detect_fmst(space, s).tree != detect_map(space, s).tree;
    }
    CHECK(differs);
}

TEST_CASE("feasible tree honours the zero pattern") {
    Fixture f;
    const auto x = f.fx.loads.consumption(f.fx.graph, f.fx.loads.means);
    for (const auto& m : {f.placements[0], f.placements[13], f.placements[40]}) {
        for (const auto& t : f.trees) {
            const auto s = tree_flow_observation(f.fx.graph, t, m, x);
            const auto t0 = feasible_tree(f.fx.graph, s, m, f.fx.tau);
            for (std::size_t k = 0; k < m.size(); ++k)
                CHECK(t0.contains(m.sensor_edge(k)) == (std::abs(s[static_cast<Eigen::Index>(k)]) > 0.0));
            for (EdgeId e : f.fx.tau)
                CHECK(t0.contains(e));
        }
    }

    const Graph k3 = read_graph(data_dir() / "corpus" / "k3.graph");
    const auto t0 = feasible_tree(k3, vec({0.0}), Placement({1}));
    CHECK_FALSE(t0.contains(1));

    // Every sensor nonzero on a triangle cannot be a tree.
    CHECK_THROWS_AS(feasible_tree(k3, vec({1.0, 1.0, 1.0}), Placement({0, 1, 2})),
                    InconsistentObservation);
}

TEST_CASE("cycle descent") {
    Fixture f;
    const Placement& m = f.placements[3];

    HypothesisSpace quiet(f.fx.graph, m, f.fx.loads.with_sigma(1e-4), f.fx.tau);
    for (const auto& t : f.trees) {
        const auto s = tree_flow_observation(f.fx.graph, t, m, quiet.forecast_consumption());
        const auto r = detect_cycle_descent(quiet, s);
        CHECK(r.tree == t);
        CHECK(r.converged);
        CHECK(r.method == "cycledescent");
    }

    const auto model = f.fx.loads.with_cv(0.3);
    HypothesisSpace space(f.fx.graph, m, model, f.fx.tau);
    std::size_t agree = 0;
    for (std::uint64_t k = 0; k < 200; ++k) {
        const auto& t = f.trees[k % f.trees.size()];
        const auto s = draw(f.fx.graph, t, m, model, derive_seed(2, k));
        std::vector<Likelihood> trace;
        const auto r = detect_cycle_descent(space, s, 0, &trace);
        REQUIRE_FALSE(trace.empty());
        for (std::size_t i = 1; i < trace.size(); ++i)
            CHECK(compare_likelihood(trace[i], trace[i - 1]) > 0);
        CHECK(compare_likelihood(trace.back(), r.likelihood) == 0);
        for (EdgeId e : f.fx.tau)
            CHECK(r.tree.contains(e));
        agree += r.tree == detect_map(space, s).tree ? 1 : 0;
    }
    CHECK(agree > 150);
}

TEST_CASE("local search neighbourhood") {
    Fixture f;
    for (std::size_t t = 0; t < f.trees.size(); t += 5) {
        const auto& seed = f.trees[t];
        const auto basis = fundamental_cycle_basis(f.fx.graph, seed);
        std::size_t bound = 0;
        for (const auto& c : basis.cycles)
            bound += c.edges.size() - 1;
        const auto neighbors = basis_preserving_neighbors(f.fx.graph, seed);
        CHECK(neighbors.size() <= bound);
        for (const auto& n : neighbors) {
            CHECK(n != seed);
            const auto nb = fundamental_cycle_basis(f.fx.graph, n);
            std::vector<EdgeSet> a;
            std::vector<EdgeSet> b;
            for (const auto& c : basis.cycles)
                a.push_back(c.edges);
            for (const auto& c : nb.cycles)
                b.push_back(c.edges);
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            CHECK(a == b);
        }
        for (const auto& n : basis_preserving_neighbors(f.fx.graph, seed, f.fx.tau))
            for (EdgeId e : f.fx.tau)
                CHECK(n.contains(e));
    }
}

TEST_CASE("local search never loses likelihood") {
    Fixture f;
    const Placement& m = f.placements[30];
    const auto model = f.fx.loads.with_cv(0.4);
    HypothesisSpace space(f.fx.graph, m, model, f.fx.tau);
    for (std::uint64_t k = 0; k < 100; ++k) {
        const auto& t = f.trees[k % f.trees.size()];
        const auto s = draw(f.fx.graph, t, m, model, derive_seed(13, k));
        const auto best = detect_map(space, s);
        CHECK(local_map_search(space, s, best.tree).tree == best.tree);
        const auto fm = detect_fmst(space, s);
        const auto refined = local_map_search(space, s, fm.tree);
        CHECK(compare_likelihood(refined.likelihood, space.likelihood(fm.tree, s)) >= 0);
        CHECK(refined.method == "local");
    }
}

TEST_CASE("detector names and dispatch") {
    CHECK(method_name(Method::map) == "map");
    CHECK(method_name(Method::zero_flow) == "zeroflow");
    CHECK(method_name(Method::cycle_descent) == "cycledescent");
    CHECK(method_name(Method::enumeration) == "enum");
    for (auto method : {Method::deterministic, Method::enumeration, Method::map, Method::zero_flow,
                        Method::fmst, Method::cycle_descent})
        CHECK(parse_method(method_name(method)) == method);
    CHECK_FALSE(parse_method("bogus").has_value());
    const auto spec = parse_detector("fmst+local");
    REQUIRE(spec.has_value());
    CHECK(spec->method == Method::fmst);
    CHECK(spec->local_search);
    CHECK(spec->name() == "fmst+local");
    CHECK_FALSE(parse_detector("fmst+").has_value());

    Fixture f;
    const Placement& m = f.placements[2];
    const auto model = f.fx.loads.with_sigma(0.05);
    HypothesisSpace space(f.fx.graph, m, model, f.fx.tau);
    const auto& truth = f.trees[17];
    const auto exact = tree_flow_observation(f.fx.graph, truth, m, space.forecast_consumption());
    for (auto method : {Method::deterministic, Method::enumeration, Method::map, Method::zero_flow,
                        Method::fmst, Method::cycle_descent}) {
        for (bool local : {false, true}) {
            const DetectorSpec d{method, local};
            CAPTURE(d.name());
            const auto r = run_detector(d, space, exact);
            CHECK(r.tree == truth);
            const auto again = run_detector(d, space, exact);
            CHECK(again.tree == r.tree);
            CHECK(again.log_likelihood() == r.log_likelihood());
        }
    }
}

TEST_CASE("csv row") {
    const Graph g = read_graph(data_dir() / "corpus" / "k3.graph");
    DetectionResult r{SpanningTree::certify(g, {0, 2}), Likelihood{-1.5, 1}, "map"};
    r.iterations = 3;
    CHECK(to_csv_row(r) == "map,0;2,-1.5,3,true");
    r.converged = false;
    CHECK(to_csv_row(r).ends_with(",false"));
    CHECK(detection_csv_header == "method,tree,log_likelihood,iterations,converged");
}

}
