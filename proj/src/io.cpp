#include "treeid/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "treeid/error.hpp"

namespace treeid {

namespace {

struct Line {
    std::size_t number;
    std::vector<std::string> tokens;
};

std::vector<Line> tokenize(std::istream& in) {
    std::vector<Line> lines;
    std::string text;
    std::size_t number = 0;
    while (std::getline(in, text)) {
        ++number;
        if (const auto hash = text.find('#'); hash != std::string::npos)
            text.erase(hash);
        std::istringstream words(text);
        Line line{number, {}};
        for (std::string w; words >> w;)
            line.tokens.push_back(std::move(w));
        if (!line.tokens.empty())
            lines.push_back(std::move(line));
    }
    return lines;
}

std::size_t parse_index(const std::string& token, const std::string& source, std::size_t line) {
    std::size_t value = 0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw ParseError(source, line, fmt::format("expected a nonnegative integer, got '{}'", token));
    return value;
}

double parse_real(const std::string& token, const std::string& source, std::size_t line) {
    double value = 0.0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value))
        throw ParseError(source, line, fmt::format("expected a finite number, got '{}'", token));
    return value;
}

void expect_arity(const Line& line, std::size_t count, const std::string& source) {
    if (line.tokens.size() != count)
        throw ParseError(source, line.number,
                         fmt::format("'{}' takes {} fields, got {}", line.tokens[0], count - 1,
                                     line.tokens.size() - 1));
}

// Dense [0, n) index map to the line where each index was defined.
template <class T>
std::vector<T> densify(std::map<std::size_t, std::pair<T, std::size_t>>& by_index,
                       const std::string& what, const std::string& source) {
    std::vector<T> out;
    std::size_t expected = 0;
    for (auto& [index, entry] : by_index) {
        if (index != expected)
            throw ParseError(source, entry.second,
                             fmt::format("{} ids must be dense from 0; {} is missing", what, expected));
        out.push_back(std::move(entry.first));
        ++expected;
    }
    return out;
}

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw UsageError(fmt::format("cannot open '{}'", path.string()));
    return in;
}

} // namespace

Graph parse_graph(std::istream& in, const std::string& source) {
    std::optional<std::vector<std::string>> names;
    std::optional<std::string> root;
    std::size_t root_line = 0;
    std::map<std::size_t, std::pair<std::pair<std::string, std::string>, std::size_t>> edges;
    for (const Line& line : tokenize(in)) {
        const std::string& key = line.tokens[0];
        if (key == "vertices:") {
            if (names)
                throw ParseError(source, line.number, "duplicate vertices line");
            names.emplace(line.tokens.begin() + 1, line.tokens.end());
            std::map<std::string, bool> seen;
            for (const auto& n : *names)
                if (seen[n])
                    throw ParseError(source, line.number, fmt::format("duplicate vertex '{}'", n));
                else
                    seen[n] = true;
        } else if (key == "root:") {
            expect_arity(line, 2, source);
            if (root)
                throw ParseError(source, line.number, "duplicate root line");
            root = line.tokens[1];
            root_line = line.number;
        } else if (key == "edge") {
            expect_arity(line, 4, source);
            const std::size_t id = parse_index(line.tokens[1], source, line.number);
            if (!edges.emplace(id, std::pair{std::pair{line.tokens[2], line.tokens[3]}, line.number}).second)
                throw ParseError(source, line.number, fmt::format("duplicate edge id {}", id));
        } else {
            throw ParseError(source, line.number, fmt::format("unknown directive '{}'", key));
        }
    }
    if (!names)
        throw ParseError(source, 0, "missing vertices line");

    std::map<std::string, VertexIndex> index;
    for (VertexIndex v = 0; v < names->size(); ++v)
        index[(*names)[v]] = v;
    auto lookup = [&](const std::string& name, std::size_t line) {
        const auto it = index.find(name);
        if (it == index.end())
            throw ParseError(source, line, fmt::format("unknown vertex '{}'", name));
        return it->second;
    };
    std::vector<std::pair<VertexIndex, VertexIndex>> endpoints;
    std::size_t expected = 0;
    for (const auto& [id, entry] : edges) {
        if (id != expected)
            throw ParseError(source, entry.second,
                             fmt::format("edge ids must be dense from 0; {} is missing", expected));
        const VertexIndex a = lookup(entry.first.first, entry.second);
        const VertexIndex b = lookup(entry.first.second, entry.second);
        if (a == b)
            throw ParseError(source, entry.second, fmt::format("self-loop on '{}'", entry.first.first));
        endpoints.emplace_back(a, b);
        ++expected;
    }
    std::optional<VertexIndex> root_index;
    if (root)
        root_index = lookup(*root, root_line);
    return Graph(std::move(*names), std::move(endpoints), root_index);
}

Placement parse_placement(std::istream& in, const Graph& graph, const std::string& source) {
    std::map<std::size_t, std::pair<EdgeId, std::size_t>> sensors;
    std::map<EdgeId, bool> used;
    for (const Line& line : tokenize(in)) {
        if (line.tokens[0] != "sensor")
            throw ParseError(source, line.number, fmt::format("unknown directive '{}'", line.tokens[0]));
        expect_arity(line, 3, source);
        const std::size_t k = parse_index(line.tokens[1], source, line.number);
        const EdgeId e = parse_index(line.tokens[2], source, line.number);
        if (e >= graph.num_edges())
            throw ParseError(source, line.number, fmt::format("no edge with id {}", e));
        if (used[e])
            throw ParseError(source, line.number, fmt::format("edge {} is measured twice", e));
        used[e] = true;
        if (!sensors.emplace(k, std::pair{e, line.number}).second)
            throw ParseError(source, line.number, fmt::format("duplicate sensor index {}", k));
    }
    return Placement(densify(sensors, "sensor", source));
}

LoadModel parse_loads(std::istream& in, const Graph& graph, const std::string& source) {
    LoadModel model;
    std::vector<double> means;
    std::vector<double> variances;
    std::map<VertexIndex, bool> seen;
    for (const Line& line : tokenize(in)) {
        if (line.tokens[0] != "load")
            throw ParseError(source, line.number, fmt::format("unknown directive '{}'", line.tokens[0]));
        expect_arity(line, 4, source);
        const auto v = graph.find_vertex(line.tokens[1]);
        if (!v)
            throw ParseError(source, line.number, fmt::format("unknown vertex '{}'", line.tokens[1]));
        if (*v == graph.root())
            throw ParseError(source, line.number, "the root cannot carry a load");
        if (seen[*v])
            throw ParseError(source, line.number, fmt::format("duplicate load on '{}'", line.tokens[1]));
        seen[*v] = true;
        const double mean = parse_real(line.tokens[2], source, line.number);
        const double sd = parse_real(line.tokens[3], source, line.number);
        if (sd < 0.0)
            throw ParseError(source, line.number, "standard deviation must be nonnegative");
        model.vertices.push_back(*v);
        means.push_back(mean);
        variances.push_back(sd * sd);
    }
    model.means = Eigen::Map<Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
    model.variances =
        Eigen::Map<Eigen::VectorXd>(variances.data(), static_cast<Eigen::Index>(variances.size()));
    return model;
}

Eigen::VectorXd parse_observation(std::istream& in, std::size_t sensors, const std::string& source) {
    std::map<std::size_t, std::pair<double, std::size_t>> values;
    std::size_t last_line = 0;
    for (const Line& line : tokenize(in)) {
        if (line.tokens[0] != "obs")
            throw ParseError(source, line.number, fmt::format("unknown directive '{}'", line.tokens[0]));
        expect_arity(line, 3, source);
        const std::size_t k = parse_index(line.tokens[1], source, line.number);
        if (k >= sensors)
            throw ParseError(source, line.number,
                             fmt::format("sensor index {} out of range for {} sensors", k, sensors));
        if (!values.emplace(k, std::pair{parse_real(line.tokens[2], source, line.number), line.number}).second)
            throw ParseError(source, line.number, fmt::format("duplicate reading for sensor {}", k));
        last_line = line.number;
    }
    const auto dense = densify(values, "sensor", source);
    if (dense.size() != sensors)
        throw ParseError(source, last_line,
                         fmt::format("expected {} readings, got {}", sensors, dense.size()));
    Eigen::VectorXd s(static_cast<Eigen::Index>(sensors));
    for (std::size_t k = 0; k < sensors; ++k)
        s[static_cast<Eigen::Index>(k)] = dense[k];
    return s;
}

Graph read_graph(const std::filesystem::path& path) {
    auto in = open(path);
    return parse_graph(in, path.string());
}

Placement read_placement(const std::filesystem::path& path, const Graph& graph) {
    auto in = open(path);
    return parse_placement(in, graph, path.string());
}

LoadModel read_loads(const std::filesystem::path& path, const Graph& graph) {
    auto in = open(path);
    return parse_loads(in, graph, path.string());
}

Eigen::VectorXd read_observation(const std::filesystem::path& path, std::size_t sensors) {
    auto in = open(path);
    return parse_observation(in, sensors, path.string());
}

std::string format_graph(const Graph& graph) {
    std::string out = "vertices:";
    for (const auto& name : graph.vertex_names())
        out += " " + name;
    out += "\n";
    if (graph.has_root())
        out += fmt::format("root: {}\n", graph.vertex_name(graph.root()));
    for (const Edge& e : graph.edges())
        out += fmt::format("edge {} {} {}\n", e.id, graph.vertex_name(e.from), graph.vertex_name(e.to));
    return out;
}

std::string format_placement(const Placement& placement) {
    std::string out;
    for (std::size_t k = 0; k < placement.size(); ++k)
        out += fmt::format("sensor {} {}\n", k, placement.sensor_edge(k));
    return out;
}

std::string format_loads(const Graph& graph, const LoadModel& model) {
    std::string out;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const auto j = static_cast<Eigen::Index>(i);
        out += fmt::format("load {} {} {}\n", graph.vertex_name(model.vertices[i]), model.means[j],
                           std::sqrt(model.variances[j]));
    }
    return out;
}

std::string format_observation(const Eigen::VectorXd& observation) {
    std::string out;
    for (Eigen::Index k = 0; k < observation.size(); ++k)
        out += fmt::format("obs {} {}\n", k, observation[k]);
    return out;
}

} // namespace treeid
