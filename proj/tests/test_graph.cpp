#include <doctest.h>

#include "support.hpp"
#include "treeid/error.hpp"
#include "treeid/fixture.hpp"
#include "treeid/graph.hpp"
#include "treeid/spanning_tree.hpp"

using namespace treeid;
using namespace treeid::testing;

TEST_SUITE("graph") {

TEST_CASE("incidence of the five-vertex flow example") {
    const Graph g = read_graph(data_dir() / "corpus" / "example5.graph");
    Eigen::MatrixXd expected(5, 6);
    expected << +1, 0, 0, 0, 0, 0,
                -1, +1, 0, +1, +1, 0,
                0, -1, +1, 0, 0, 0,
                0, 0, -1, 0, -1, +1,
                0, 0, 0, -1, 0, -1;
    CHECK(build_incidence(g) == expected);
}

TEST_CASE("single edge and reversed orientation") {
    const Graph g({"a", "b"}, {{0, 1}});
    const auto b = build_incidence(g);
    CHECK(b(0, 0) == 1.0);
    CHECK(b(1, 0) == -1.0);

    const Graph k3 = read_graph(data_dir() / "corpus" / "k3.graph");
    const auto flipped = build_incidence(k3.with_reversed_edge(1));
    const auto original = build_incidence(k3);
    CHECK(flipped.col(1) == -original.col(1));
    CHECK(flipped.col(0) == original.col(0));
}

TEST_CASE("every incidence column has one +1 and one -1") {
    for (const auto& [name, g] : corpus()) {
        CAPTURE(name);
        const auto b = build_incidence(g);
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            CHECK(b.col(j).sum() == 0.0);
            CHECK(b.col(j).cwiseAbs().sum() == 2.0);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
        CHECK(static_cast<std::size_t>(lu.rank()) == g.num_vertices() - 1);
    }
}

TEST_CASE("circuit rank") {
    const IslandFixture fx = build_island_fixture();
    CHECK(circuit_rank(fx.graph) == 4);
    CHECK(circuit_rank(read_graph(data_dir() / "corpus" / "k3.graph")) == 1);
    CHECK(circuit_rank(read_graph(data_dir() / "corpus" / "path4.graph")) == 0);
    CHECK(circuit_rank(read_graph(data_dir() / "corpus" / "k5.graph")) == 6);
    // Two triangles with no edge between them.
    const Graph two({"a", "b", "c", "x", "y", "z"}, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}});
    CHECK(connected_components(two) == 2);
    CHECK(circuit_rank(two) == 2);
}

TEST_CASE("construction errors") {
    CHECK_THROWS_AS(Graph({"a", "b"}, {{0, 0}}), MalformedGraph);
    CHECK_THROWS_AS(Graph({"a", "a"}, {{0, 1}}), MalformedGraph);
    CHECK_THROWS_AS(Graph({"a", "b"}, {{0, 2}}), MalformedGraph);
    const Graph g({"a", "b"}, {{0, 1}, {0, 1}});
    CHECK(g.num_edges() == 2);
    CHECK_THROWS_AS(g.edge(2), LookupError);
    CHECK_THROWS_AS(g.vertex("zz"), LookupError);
}

TEST_CASE("spanning tree membership") {
    const Graph k3 = read_graph(data_dir() / "corpus" / "k3.graph");
    CHECK(is_spanning_tree(k3, EdgeSet{0, 1}));
    CHECK(is_spanning_tree(k3, EdgeSet{1, 2}));
    CHECK_FALSE(is_spanning_tree(k3, EdgeSet{0, 1, 2}));
    CHECK_FALSE(is_spanning_tree(k3, EdgeSet{0}));
    CHECK_THROWS_AS(is_spanning_tree(k3, EdgeSet{0, 7}), LookupError);
}

TEST_CASE("root edges of the fixture") {
    const IslandFixture fx = build_island_fixture();
    CHECK(fx.tau == EdgeSet{0, 1, 2, 3});
    CHECK(fx.graph.vertex_name(fx.graph.root()) == "vr");
}

}
