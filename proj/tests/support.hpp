#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "treeid/fixture.hpp"
#include "treeid/graph.hpp"
#include "treeid/io.hpp"
#include "treeid/loads.hpp"

namespace treeid::testing {

inline std::filesystem::path data_dir() { return TREEID_TEST_DATA; }

// Small connected graphs shipped with the tests, sorted by file name.
inline std::vector<std::pair<std::string, Graph>> corpus() {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(data_dir() / "corpus"))
        if (entry.path().extension() == ".graph")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<std::pair<std::string, Graph>> out;
    for (const auto& f : files)
        out.emplace_back(f.stem().string(), read_graph(f));
    return out;
}

// Random spanning tree on n vertices plus `extra` random edges (parallel
// edges allowed, self-loops not).
inline Graph random_connected_graph(std::size_t n, std::size_t extra, std::mt19937_64& rng) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i)
        names.push_back("v" + std::to_string(i));
    std::vector<std::pair<VertexIndex, VertexIndex>> edges;
    for (std::size_t v = 1; v < n; ++v) {
        std::uniform_int_distribution<std::size_t> pick(0, v - 1);
        edges.emplace_back(pick(rng), v);
    }
    std::uniform_int_distribution<std::size_t> any(0, n - 1);
    while (n > 1 && extra > 0) {
        const auto a = any(rng);
        const auto b = any(rng);
        if (a == b)
            continue;
        edges.emplace_back(a, b);
        --extra;
    }
    return Graph(std::move(names), std::move(edges));
}

// Continuous i.i.d. loads in [0.5, 1.5) on every non-root vertex.
inline Eigen::VectorXd generic_consumption(const Graph& graph, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> load(0.5, 1.5);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(graph.num_vertices()));
    for (VertexIndex v = 0; v < graph.num_vertices(); ++v)
        if (v != graph.root())
            x[static_cast<Eigen::Index>(v)] = load(rng);
    return x;
}

// Continuous i.i.d. values in [0.5, 1.5) for the slots of `model`.
inline Eigen::VectorXd generic_loads(const LoadModel& model, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> load(0.5, 1.5);
    Eigen::VectorXd x(static_cast<Eigen::Index>(model.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x[i] = load(rng);
    return x;
}

// All k-subsets of [0, n), lexicographic.
inline std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    if (k > n)
        return out;
    std::vector<std::size_t> cur(k);
    for (std::size_t i = 0; i < k; ++i)
        cur[i] = i;
    while (true) {
        out.push_back(cur);
        std::size_t i = k;
        while (i > 0 && cur[i - 1] == n - k + i - 1)
            --i;
        if (i == 0)
            break;
        ++cur[i - 1];
        for (std::size_t j = i; j < k; ++j)
            cur[j] = cur[j - 1] + 1;
    }
    return out;
}

} // namespace treeid::testing
