#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "treeid/graph.hpp"
#include "treeid/loads.hpp"
#include "treeid/placement.hpp"

namespace treeid {

// Line-oriented text formats. Blank lines and anything after '#' are ignored.
//
//   graph:        vertices: <name>...   root: <name>   edge <id> <from> <to>
//   placement:    sensor <k> <edge id>
//   loads:        load <vertex> <mean> <stddev>
//   observation:  obs <k> <value>
//
// Edge and sensor indices must be dense from zero and may appear in any order.
// Errors are ParseError with the offending line number.

Graph parse_graph(std::istream& in, const std::string& source = "<graph>");
Placement parse_placement(std::istream& in, const Graph& graph,
                          const std::string& source = "<placement>");
LoadModel parse_loads(std::istream& in, const Graph& graph, const std::string& source = "<loads>");
Eigen::VectorXd parse_observation(std::istream& in, std::size_t sensors,
                                  const std::string& source = "<observation>");

// File variants; a missing or unreadable file is a UsageError naming the path.
Graph read_graph(const std::filesystem::path& path);
Placement read_placement(const std::filesystem::path& path, const Graph& graph);
LoadModel read_loads(const std::filesystem::path& path, const Graph& graph);
Eigen::VectorXd read_observation(const std::filesystem::path& path, std::size_t sensors);

std::string format_graph(const Graph& graph);
std::string format_placement(const Placement& placement);
std::string format_loads(const Graph& graph, const LoadModel& model);
std::string format_observation(const Eigen::VectorXd& observation);

} // namespace treeid
