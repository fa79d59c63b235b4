#include "basalt_cli/app.hpp"

#include <filesystem>
#include <ios>
#include <memory>

#include "basalt/error.hpp"
#include "basalt_cli/support.hpp"
#include "commands.hpp"
#include "json_config.hpp"

namespace basalt::cli {

namespace {

void add_jobs_default(SimGrid& g) { g.jobs = default_jobs(); }

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Peer-sampling laboratory: Basalt and Brahms simulation, closed forms and attacker power",
                 "basalt-lab"};
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON file with option values; flags override it");
    app.set_version_flag("--version", "basalt-lab 0.1.0");

    SimulateOptions sim;
    add_jobs_default(sim.grid);
    auto* simulate = app.add_subcommand("simulate", "Run a grid of simulations, one CSV per run plus summaries");
    add_grid_options(simulate, sim.grid);
    simulate->add_option("--out", sim.out_dir, "Output directory")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "Figure sweeps with box-plot statistics over seeds");
    sweep->require_subcommand(1);

    Fig3Options fig3;
    add_jobs_default(fig3.grid);
    fig3.grid.algos = {"basalt", "basalt-simple", "brahms"};
    fig3.grid.seeds = "1..5";
    fig3.values = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
    auto* fig3_cmd = sweep->add_subcommand("fig3", "Terminal Byzantine sample fraction while one parameter varies");
    add_grid_options(fig3_cmd, fig3.grid);
    fig3_cmd->add_option("--vary", fig3.vary, "f, force, rho, v, k or n")->capture_default_str();
    fig3_cmd->add_option("--values", fig3.values, "Values of the swept parameter")->delimiter(',');
    fig3_cmd->add_option("--out", fig3.out, "Output CSV path, - for stdout")->capture_default_str();

    ConvergenceOptions conv;
    add_jobs_default(conv.grid);
    conv.grid.algos = {"basalt", "brahms"};
    conv.grid.f = {0.1, 0.2, 0.3};
    conv.grid.seeds = "1..5";
    auto* conv_cmd = sweep->add_subcommand("convergence", "Ticks until samples stay within ratio * f");
    add_grid_options(conv_cmd, conv.grid);
    conv_cmd->add_option("--ratio", conv.ratio, "Tolerance ratio over f")->capture_default_str();
    conv_cmd->add_option("--out", conv.out, "Output CSV path, - for stdout")->capture_default_str();

    MaxRateOptions rate;
    add_jobs_default(rate.grid);
    rate.grid.algos = {"basalt", "brahms"};
    rate.grid.seeds = "1..3";
    rate.views = {50, 100, 150, 200};
    rate.rates = {0.5, 1, 2, 5, 10, 25};
    auto* rate_cmd = sweep->add_subcommand("maxrate", "Largest sampling rate without isolation, per view size");
    add_grid_options(rate_cmd, rate.grid);
    rate_cmd->add_option("--views", rate.views, "View sizes")->delimiter(',');
    rate_cmd->add_option("--rates", rate.rates, "Sampling rates")->delimiter(',');
    rate_cmd->add_option("--out", rate.out, "Output CSV path, - for stdout")->capture_default_str();

    auto analyze = add_analyze(app);

    std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::vector<std::string> reversed(rest.rbegin(), rest.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim, out);
        if (fig3_cmd->parsed()) return cmd_sweep_fig3(fig3, out);
        if (conv_cmd->parsed()) return cmd_sweep_convergence(conv, out);
        if (rate_cmd->parsed()) return cmd_sweep_maxrate(rate, out);
        return analyze(out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const StepSizeError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kData;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

} // namespace basalt::cli
