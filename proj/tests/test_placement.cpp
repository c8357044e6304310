#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "support.hpp"
#include "treeid/error.hpp"
#include "treeid/fixture.hpp"
#include "treeid/flow.hpp"
#include "treeid/placement.hpp"
#include "treeid/spanning_tree.hpp"

using namespace treeid;
using namespace treeid::testing;

TEST_SUITE("placement") {

TEST_CASE("validity on the five-vertex example") {
    const Graph g = read_graph(data_dir() / "corpus" / "example5.graph");
    CHECK(is_valid_placement(g, Placement({4, 5})));
    CHECK(is_valid_placement(g, Placement({5, 4})));
    // e3 and e6 leave e1, e2, e4, e5, which contain the cycle v1 v2 v3.
    CHECK_FALSE(is_valid_placement(g, Placement({1, 2})));
    CHECK_FALSE(is_valid_placement(g, Placement({4})));
    CHECK_FALSE(is_valid_placement(g, Placement({3, 4, 5})));
    CHECK_FALSE(is_valid_placement(g, Placement({4, 17})));
    CHECK(placement_from_tree(g, SpanningTree::certify(g, {0, 1, 2, 3})) == Placement({4, 5}));
    CHECK(tree_from_placement(g, Placement({4, 5})).edges() == EdgeSet{0, 1, 2, 3});
}

TEST_CASE("wrong sizes are never valid") {
    const IslandFixture fx = build_island_fixture();
    std::mt19937_64 rng(3);
    std::vector<EdgeId> all(fx.graph.num_edges());
    for (EdgeId e = 0; e < all.size(); ++e)
        all[e] = e;
    for (std::size_t size : {0u, 1u, 3u, 5u, 6u, 13u}) {
        for (int rep = 0; rep < 20; ++rep) {
            std::shuffle(all.begin(), all.end(), rng);
            CHECK_FALSE(is_valid_placement(fx.graph, Placement({all.begin(), all.begin() + size})));
        }
    }
}

TEST_CASE("placements measure each edge once") {
    CHECK_THROWS_AS(Placement({3, 1, 3}), PreconditionError);
    const Placement p({7, 2, 5});
    CHECK(p.size() == 3);
    CHECK(p.sensor_edge(0) == 7);
    CHECK(p.sensor_on(5) == 2);
    CHECK_FALSE(p.sensor_on(4).has_value());
}

TEST_CASE("tree and placement are complements") {
    const IslandFixture fx = build_island_fixture();
    std::mt19937_64 rng(17);
    const auto trees = enumerate_spanning_trees(fx.graph);
    std::uniform_int_distribution<std::size_t> pick(0, trees.size() - 1);
    for (int rep = 0; rep < 20; ++rep) {
        const auto& t = trees[pick(rng)];
        const Placement m = placement_from_tree(fx.graph, t);
        CHECK(m.size() == 4);
        CHECK(is_valid_placement(fx.graph, m));
        CHECK(tree_from_placement(fx.graph, m) == t);
        CHECK(placement_from_tree(fx.graph, tree_from_placement(fx.graph, m)) == m);
    }
    CHECK_THROWS_AS(tree_from_placement(fx.graph, Placement({5, 6, 8, 9})), InvalidPlacement);
}

TEST_CASE("placement families") {
    const IslandFixture fx = build_island_fixture();
    const auto restricted = enumerate_valid_placements(fx.graph, fx.tau);
    CHECK(restricted.placements.size() == 44);
    CHECK(restricted.restriction == fx.tau);
    std::set<std::vector<EdgeId>> distinct;
    for (const auto& m : restricted.placements) {
        CHECK(is_valid_placement(fx.graph, m));
        for (EdgeId e : fx.tau)
            CHECK_FALSE(m.sensor_on(e).has_value());
        distinct.insert({m.sensor_edges().begin(), m.sensor_edges().end()});
    }
    CHECK(distinct.size() == 44);
    CHECK(enumerate_valid_placements(fx.graph, {}).placements.size() == 256);

    const Graph path = read_graph(data_dir() / "corpus" / "path4.graph");
    const auto single = enumerate_valid_placements(path, {});
    REQUIRE(single.placements.size() == 1);
    CHECK(single.placements[0].empty());

    const Graph k3 = read_graph(data_dir() / "corpus" / "k3.graph");
    const auto three = enumerate_valid_placements(k3, {});
    REQUIRE(three.placements.size() == 3);
    for (const auto& m : three.placements)
        CHECK(m.size() == 1);

    const std::vector<EdgeId> cyclic{0, 1, 2};
    CHECK_THROWS_AS(enumerate_valid_placements(k3, cyclic), InfeasibleConstraint);
}

TEST_CASE("one placement per spanning tree on the corpus") {
    for (const auto& [name, g] : corpus()) {
        CAPTURE(name);
        const auto family = enumerate_valid_placements(g, {});
        CHECK(family.placements.size() == count_spanning_trees(g));
        for (const auto& m : family.placements)
            CHECK(m.size() == circuit_rank(g));
    }
}

TEST_CASE("identifiability oracle") {
    const IslandFixture fx = build_island_fixture();
    const auto x = generic_consumption(fx.graph, 5);

    const auto valid = naive_identifiability_oracle(fx.graph, Placement({4, 5, 8, 11}), x);
    CHECK(valid.identifiable);
    CHECK_FALSE(valid.collision.has_value());
    CHECK(valid.trees == 256);
    CHECK_FALSE(valid.degenerate_loads);

    const auto invalid = naive_identifiability_oracle(fx.graph, Placement({5, 6, 8, 9}), x);
    CHECK_FALSE(invalid.identifiable);
    REQUIRE(invalid.collision.has_value());
    const auto trees = enumerate_spanning_trees(fx.graph);
    const auto [i, j] = *invalid.collision;
    const Placement m({5, 6, 8, 9});
    CHECK(i != j);
    CHECK((tree_flow_observation(fx.graph, trees[i], m, x) -
           tree_flow_observation(fx.graph, trees[j], m, x))
              .cwiseAbs()
              .maxCoeff() < 1e-9);

    const auto empty = naive_identifiability_oracle(fx.graph, Placement{}, x);
    CHECK_FALSE(empty.identifiable);

    Eigen::VectorXd zeros = x;
    zeros[fx.graph.vertex("v5")] = 0.0;
    CHECK(naive_identifiability_oracle(fx.graph, Placement({4, 5, 8, 11}), zeros).degenerate_loads);

    CHECK_THROWS_AS(naive_identifiability_oracle(fx.graph, Placement({4}), Eigen::VectorXd::Ones(3)),
                    PreconditionError);
}

TEST_CASE("validity matches the oracle on small corpus graphs") {
    for (const auto& [name, g] : corpus()) {
        if (g.num_vertices() > 5)
            continue;
        CAPTURE(name);
        const auto x = generic_consumption(g, 99);
        for (const auto& idx : subsets(g.num_edges(), circuit_rank(g))) {
            const Placement m({idx.begin(), idx.end()});
            CHECK(is_valid_placement(g, m) == naive_identifiability_oracle(g, m, x).identifiable);
        }
    }
}

}
