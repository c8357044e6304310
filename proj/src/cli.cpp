#include "treeid/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

#include "treeid/detection.hpp"
#include "treeid/error.hpp"
#include "treeid/fixture.hpp"
#include "treeid/io.hpp"
#include "treeid/simulation.hpp"

namespace treeid {

namespace {

struct Options {
    std::string graph;
    std::string loads;
    std::string placement;
    std::string obs;
    std::string out;
    std::string loads_out;
    std::optional<double> sigma;
    std::vector<double> sigma_grid;
    std::string sigma_mode = "absolute";
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    bool require_tau = false;
    std::string method = "map";
    bool local_search = false;
    std::vector<std::string> methods;
    bool deterministic = false;
    std::optional<double> island_kw;
};

// Writes to --out when given, else to the command's standard output.
void emit(const Options& opt, std::ostream& out, const std::string& text) {
    if (opt.out.empty()) {
        out << text;
        return;
    }
    std::ofstream file(opt.out, std::ios::binary);
    if (!file)
        throw UsageError(fmt::format("cannot write '{}'", opt.out));
    file << text;
}

EdgeSet required_edges(const Options& opt, const Graph& graph) {
    return opt.require_tau ? root_edges(graph) : EdgeSet{};
}

SigmaMode sigma_mode(const Options& opt) {
    return opt.sigma_mode == "cv" ? SigmaMode::relative : SigmaMode::absolute;
}

LoadModel load_model(const Options& opt, const Graph& graph) {
    LoadModel model = opt.loads.empty() ? LoadModel::uniform(graph, 1.0, 0.0)
                                        : read_loads(opt.loads, graph);
    model.validate(graph);
    return model;
}

std::vector<Placement> placements_for(const Options& opt, const Graph& graph, EdgeSet& restriction) {
    if (!opt.placement.empty())
        return {read_placement(opt.placement, graph)};
    auto family = enumerate_valid_placements(graph, required_edges(opt, graph));
    restriction = family.restriction;
    return std::move(family.placements);
}

std::string edge_line(std::span<const EdgeId> edges) {
    return fmt::format("{}\n", fmt::join(edges, " "));
}

int cmd_fixture(const Options& opt, std::ostream& out) {
    const IslandFixture fx = build_island_fixture();
    emit(opt, out, format_graph(fx.graph));
    if (!opt.loads_out.empty()) {
        std::ofstream file(opt.loads_out, std::ios::binary);
        if (!file)
            throw UsageError(fmt::format("cannot write '{}'", opt.loads_out));
        file << format_loads(fx.graph, fx.loads);
    }
    return 0;
}

int cmd_trees(const Options& opt, std::ostream& out) {
    const Graph graph = read_graph(opt.graph);
    std::string text;
    for_each_spanning_tree(graph, required_edges(opt, graph), [&](const SpanningTree& tree) {
        text += edge_line(tree.edges());
        return true;
    });
    emit(opt, out, text);
    return 0;
}

int cmd_placements(const Options& opt, std::ostream& out) {
    const Graph graph = read_graph(opt.graph);
    std::string text;
    for (const auto& p : enumerate_valid_placements(graph, required_edges(opt, graph)).placements)
        text += edge_line(p.sensor_edges());
    emit(opt, out, text);
    return 0;
}

int cmd_check_placement(const Options& opt, std::ostream& out) {
    const Graph graph = read_graph(opt.graph);
    const Placement placement = read_placement(opt.placement, graph);
    const bool valid = is_valid_placement(graph, placement);
    emit(opt, out, valid ? "valid\n" : "invalid\n");
    return valid ? 0 : 2;
}

int cmd_detect(const Options& opt, std::ostream& out) {
    const Graph graph = read_graph(opt.graph);
    const Placement placement = read_placement(opt.placement, graph);
    LoadModel model = load_model(opt, graph);
    if (opt.sigma)
        model = sigma_mode(opt) == SigmaMode::absolute ? model.with_sigma(*opt.sigma)
                                                        : model.with_cv(*opt.sigma);
    const Eigen::VectorXd s = read_observation(opt.obs, placement.size());
    const auto method = parse_method(opt.method);
    if (!method)
        throw UsageError(fmt::format("unknown method '{}'", opt.method));
    HypothesisSpace space(graph, placement, model, required_edges(opt, graph));
    const DetectionResult result = run_detector({*method, opt.local_search}, space, s);
    emit(opt, out, fmt::format("{}\n{}\n", detection_csv_header, to_csv_row(result)));
    return 0;
}

int cmd_sweep(const Options& opt, std::ostream& out) {
    const Graph graph = read_graph(opt.graph);
    EdgeSet restriction;
    std::vector<Placement> placements = placements_for(opt, graph, restriction);
    const LoadModel model = load_model(opt, graph);
    std::ostringstream csv;
    if (opt.deterministic) {
        const auto report = run_deterministic_sweep(graph, placements,
                                                    model.consumption(graph, model.means),
                                                    required_edges(opt, graph));
        write_deterministic_csv(csv, report);
        emit(opt, out, csv.str());
        return 0;
    }
    ExperimentConfig config;
    config.placements = std::move(placements);
    config.model = model;
    config.sigmas = opt.sigma_grid;
    if (config.sigmas.empty())
        config.sigmas = {opt.sigma.value_or(0.0)};
    config.sigma_mode = sigma_mode(opt);
    config.trials = opt.trials;
    config.seed = opt.seed;
    config.workers = opt.workers;
    config.required = required_edges(opt, graph);
    const std::vector<std::string> names = opt.methods.empty() ? std::vector<std::string>{"map"} : opt.methods;
    for (const auto& name : names) {
        const auto spec = parse_detector(name);
        if (!spec)
            throw UsageError(fmt::format("unknown method '{}'", name));
        config.detectors.push_back(*spec);
    }
    write_sweep_csv(csv, run_stochastic_sweep(graph, config));
    emit(opt, out, csv.str());
    return 0;
}

int cmd_rank_placements(const Options& opt, std::ostream& out) {
    const Graph graph = read_graph(opt.graph);
    PlacementFamily family;
    family.placements = placements_for(opt, graph, family.restriction);
    family.restriction = required_edges(opt, graph);
    const LoadModel model = load_model(opt, graph);
    double sigma = opt.sigma.value_or(0.0);
    SigmaMode mode = sigma_mode(opt);
    if (opt.island_kw) {
        sigma = cv_scaling(*opt.island_kw) / 100.0;
        mode = SigmaMode::relative;
    }
    const auto method = parse_detector(opt.method + (opt.local_search ? "+local" : ""));
    if (!method)
        throw UsageError(fmt::format("unknown method '{}'", opt.method));
    const auto rows = evaluate_placements(graph, family, model, sigma, mode, opt.trials, *method,
                                          opt.seed, opt.workers);
    std::ostringstream csv;
    write_ranking_csv(csv, rows);
    emit(opt, out, csv.str());
    return 0;
}

const std::vector<std::string> kMethods{"deterministic", "enum", "map", "zeroflow", "fmst",
                                        "cycledescent"};

void add_graph(CLI::App* cmd, Options& opt) {
    cmd->add_option("--graph", opt.graph, "Graph file")->required();
}
void add_tau(CLI::App* cmd, Options& opt) {
    cmd->add_flag("--require-tau", opt.require_tau, "Restrict to trees containing every root edge");
}
void add_out(CLI::App* cmd, Options& opt) {
    cmd->add_option("--out", opt.out, "Output file (default: standard output)");
}
void add_loads(CLI::App* cmd, Options& opt) {
    cmd->add_option("--loads", opt.loads, "Load file (default: mean 1, sd 0 on every non-root vertex)");
}
void add_sigma_mode(CLI::App* cmd, Options& opt) {
    cmd->add_option("--sigma-mode", opt.sigma_mode,
                    "Sigma as absolute standard deviation or as coefficient of variation")
        ->check(CLI::IsMember({"absolute", "cv"}))
        ->capture_default_str();
}
void add_run(CLI::App* cmd, Options& opt) {
    cmd->add_option("--trials", opt.trials, "Trials per (tree, sigma) cell")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--seed", opt.seed, "Base random seed")->capture_default_str();
    cmd->add_option("--workers", opt.workers, "Worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spanning-tree detection on island graphs from line-flow sensors", "treeid"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "treeid 0.1.0");
    Options opt;

    auto* fixture = app.add_subcommand("fixture", "Write the five-island example graph");
    add_out(fixture, opt);
    fixture->add_option("--loads-out", opt.loads_out, "Also write its load file here");

    auto* trees = app.add_subcommand("trees", "List spanning trees, one edge list per line");
    add_graph(trees, opt);
    add_tau(trees, opt);
    add_out(trees, opt);

    auto* placements = app.add_subcommand("placements", "List valid sensor placements");
    add_graph(placements, opt);
    add_tau(placements, opt);
    add_out(placements, opt);

    auto* check = app.add_subcommand("check-placement", "Report whether a placement identifies the tree");
    add_graph(check, opt);
    check->add_option("--placement", opt.placement, "Placement file")->required();
    add_out(check, opt);

    auto* detect = app.add_subcommand("detect", "Detect the operating tree from one observation");
    add_graph(detect, opt);
    detect->add_option("--placement", opt.placement, "Placement file")->required();
    detect->add_option("--obs", opt.obs, "Observation file")->required();
    add_loads(detect, opt);
    detect->add_option("--sigma", opt.sigma, "Override every load's standard deviation");
    add_sigma_mode(detect, opt);
    detect->add_option("--method", opt.method, "Detector")
        ->check(CLI::IsMember(kMethods))
        ->capture_default_str();
    detect->add_flag("--local-search", opt.local_search, "Refine with a local search over the cycle basis");
    add_tau(detect, opt);
    add_out(detect, opt);

    auto* sweep = app.add_subcommand("sweep", "Monte Carlo missed-detection rates");
    add_graph(sweep, opt);
    sweep->add_option("--placement", opt.placement, "Placement file (default: every valid placement)");
    add_loads(sweep, opt);
    sweep->add_option("--sigma", opt.sigma, "Single noise level");
    sweep->add_option("--sigma-grid", opt.sigma_grid, "Comma-separated noise levels")->delimiter(',');
    add_sigma_mode(sweep, opt);
    sweep->add_option("--methods", opt.methods,
                      "Comma-separated detectors, each optionally suffixed +local (default: map)")
        ->delimiter(',');
    sweep->add_flag("--deterministic", opt.deterministic,
                    "Exact-load collision rates (signed and unsigned) instead of a Monte Carlo run");
    add_run(sweep, opt);
    add_tau(sweep, opt);
    add_out(sweep, opt);

    auto* rank = app.add_subcommand("rank-placements", "Rank valid placements by worst-case miss rate");
    add_graph(rank, opt);
    add_loads(rank, opt);
    rank->add_option("--sigma", opt.sigma, "Noise level");
    add_sigma_mode(rank, opt);
    rank->add_option("--island-kw", opt.island_kw,
                     "Derive a coefficient of variation from the aggregate island load in kW")
        ->check(CLI::PositiveNumber);
    rank->add_option("--method", opt.method, "Detector")
        ->check(CLI::IsMember(kMethods))
        ->capture_default_str();
    rank->add_flag("--local-search", opt.local_search, "Refine with a local search over the cycle basis");
    add_run(rank, opt);
    add_tau(rank, opt);
    add_out(rank, opt);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    }

    try {
        if (fixture->parsed()) return cmd_fixture(opt, out);
        if (trees->parsed()) return cmd_trees(opt, out);
        if (placements->parsed()) return cmd_placements(opt, out);
        if (check->parsed()) return cmd_check_placement(opt, out);
        if (detect->parsed()) return cmd_detect(opt, out);
        if (sweep->parsed()) return cmd_sweep(opt, out);
        if (rank->parsed()) return cmd_rank_placements(opt, out);
    } catch (const UsageError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return 1;
    } catch (const Error& e) {
        fmt::print(err, "error: {}\n", e.what());
        return 2;
    }
    return 1;
}

} // namespace treeid
