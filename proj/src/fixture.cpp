#include "treeid/fixture.hpp"

namespace treeid {

IslandFixture build_island_fixture() {
    std::vector<std::string> names{"vr", "F1", "F2", "F3", "F4", "v1", "v2", "v3", "v4", "v5"};
    enum : VertexIndex { vr, F1, F2, F3, F4, v1, v2, v3, v4, v5 };
    std::vector<std::pair<VertexIndex, VertexIndex>> edges{
        {vr, F1}, {vr, F2}, {vr, F3}, {vr, F4},
        {F3, v3}, {F2, v1}, {F1, v1}, {F4, v3},
        {v3, v4}, {v4, v5}, {v1, v5}, {v1, v2}, {v2, v3},
    };

    IslandFixture fx;
    fx.graph = Graph(std::move(names), std::move(edges), vr);
    fx.tau = root_edges(fx.graph);
    fx.loads.vertices = {v1, v2, v3, v4, v5};
    fx.loads.means = Eigen::VectorXd::Ones(5);
    fx.loads.variances = Eigen::VectorXd::Zero(5);
    return fx;
}

} // namespace treeid
