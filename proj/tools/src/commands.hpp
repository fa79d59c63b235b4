#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "basalt/simnet.hpp"

namespace basalt::cli {

/// Simulation parameters as given on the command line. The list-valued
/// fields span a grid; everything else is shared by all runs.
struct SimGrid {
    std::vector<std::string> algos{"basalt"};
    std::vector<int> n{1000};
    std::vector<double> f{0.1};
    std::vector<int> v{100};
    std::vector<double> rho{1.0};
    std::vector<int> k;  // empty: v/2 per run
    std::vector<double> force{10.0};
    int tau = 1;
    std::string strategy = "flood";
    int advertised = 100;
    std::string ranking = "uniform";
    int ticks = 400;
    std::string seeds = "1";
    int metrics_interval = 5;
    int graph_interval = 0;
    std::size_t path_pairs = 100000;
    int probe_nodes = 32;
    int bootstrap_size = 0;
    double f0 = -1.0;
    bool per_node_bootstrap = false;
    double alpha = 0.45;
    double beta = 0.45;
    double gamma = 0.10;
    int push_limit = -1;
    int jobs = 1;
    std::size_t max_runs = 10000;
};

/// One expanded grid point.
struct GridPoint {
    SimConfig config;
    std::size_t point = 0;  // index of the parameter combination, seeds excluded
};

void add_grid_options(CLI::App* app, SimGrid& g);

/// Cross product in the order algo, n, f, v, rho, k, force, seed (seed fastest).
/// Every config is validated; failures become UsageError naming the point.
std::vector<GridPoint> expand(const SimGrid& g);

std::vector<SimResult> run_grid(const std::vector<GridPoint>& points, int jobs);

std::string run_file_name(const SimConfig& c);

struct SimulateOptions {
    SimGrid grid;
    std::string out_dir = "runs";
};

struct Fig3Options {
    SimGrid grid;
    std::string vary = "f";
    std::vector<double> values;
    std::string out = "-";
};

struct ConvergenceOptions {
    SimGrid grid;
    double ratio = 1.25;
    std::string out = "-";
};

struct MaxRateOptions {
    SimGrid grid;
    std::vector<int> views;
    std::vector<double> rates;
    std::string out = "-";
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out);
int cmd_sweep_fig3(Fig3Options o, std::ostream& out);
int cmd_sweep_convergence(const ConvergenceOptions& o, std::ostream& out);
int cmd_sweep_maxrate(const MaxRateOptions& o, std::ostream& out);

/// Registers `analyze` and its subcommands. The returned callback runs the
/// selected one; call it after parsing.
std::function<int(std::ostream&)> add_analyze(CLI::App& app);

/// Writes to stdout for "-", otherwise to the named file.
class Output {
public:
    Output(const std::string& path, std::ostream& stdout_stream);
    std::ostream& stream() { return *stream_; }

private:
    std::unique_ptr<std::ostream> file_;
    std::ostream* stream_;
};

} // namespace basalt::cli
