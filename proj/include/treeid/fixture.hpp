#pragma once

#include "treeid/graph.hpp"
#include "treeid/loads.hpp"

namespace treeid {

// Island graph of the reduced IEEE 123-node feeder: a virtual root `vr`, four
// feeders F1..F4 and five lumped load islands v1..v5 joined by nine switches.
//
// Edge ids 0..3 are the root-to-feeder edges vr->F1..vr->F4. Switch edges:
//   4: F3-v3   5: F2-v1   6: F1-v1   7: F4-v3   8: v3-v4
//   9: v4-v5  10: v1-v5  11: v1-v2  12: v2-v3
struct IslandFixture {
    Graph graph;
    EdgeSet tau;
    // Load slots on v1..v5 with unit mean and zero variance.
    LoadModel loads;
};

IslandFixture build_island_fixture();

} // namespace treeid
