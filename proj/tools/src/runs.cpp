#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>

#include "basalt/error.hpp"
#include "basalt_cli/support.hpp"
#include "commands.hpp"

namespace basalt::cli {

Output::Output(const std::string& path, std::ostream& stdout_stream) : stream_(&stdout_stream) {
    if (path.empty() || path == "-") return;
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    auto f = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*f) throw UsageError("cannot write '" + path + "'");
    stream_ = f.get();
    file_ = std::move(f);
}

void add_grid_options(CLI::App* app, SimGrid& g) {
    app->add_option("--algo", g.algos, "basalt, basalt-simple or brahms (list)")->delimiter(',');
    app->add_option("--n", g.n, "Number of nodes (list)")->delimiter(',');
    app->add_option("--f", g.f, "Byzantine fraction (list)")->delimiter(',');
    app->add_option("--v", g.v, "View size (list)")->delimiter(',');
    app->add_option("--rho", g.rho, "Sampling rate per tick (list)")->delimiter(',');
    app->add_option("--k", g.k, "Replacement count (list, default v/2)")->delimiter(',');
    app->add_option("--force", g.force, "Attack force F (list)")->delimiter(',');
    app->add_option("--tau", g.tau, "Exchange interval in ticks")->capture_default_str();
    app->add_option("--strategy", g.strategy, "flood or hitpoison")->capture_default_str();
    app->add_option("--advertised", g.advertised, "Correct ids per HitPoison push")->capture_default_str();
    app->add_option("--ranking", g.ranking, "uniform, grouped8, grouped16, grouped24 or hierarchical")
        ->capture_default_str();
    app->add_option("--ticks", g.ticks, "Ticks per run")->capture_default_str();
    app->add_option("--seeds", g.seeds, "Seeds, e.g. 1..5 or 1,2,7")->capture_default_str();
    app->add_option("--metrics-interval", g.metrics_interval, "Ticks between records")->capture_default_str();
    app->add_option("--graph-interval", g.graph_interval, "Ticks between graph metrics (0 = off)")
        ->capture_default_str();
    app->add_option("--path-pairs", g.path_pairs, "Pair budget for sampled mean path")->capture_default_str();
    app->add_option("--probe-nodes", g.probe_nodes, "Correct nodes tracked for c_mean")->capture_default_str();
    app->add_option("--bootstrap-size", g.bootstrap_size, "Bootstrap list size I (0 = v)")->capture_default_str();
    app->add_option("--f0", g.f0, "Byzantine share of the bootstrap list (negative = f)")->capture_default_str();
    app->add_flag("--per-node-bootstrap", g.per_node_bootstrap, "Independent bootstrap list per node");
    app->add_option("--alpha", g.alpha, "Brahms push share")->capture_default_str();
    app->add_option("--beta", g.beta, "Brahms pull share")->capture_default_str();
    app->add_option("--gamma", g.gamma, "Brahms sampler share")->capture_default_str();
    app->add_option("--push-limit", g.push_limit, "Brahms push limit (negative = alpha v)")->capture_default_str();
    app->add_option("--jobs", g.jobs, "Worker threads (default BASALT_JOBS or all cores)");
    app->add_option("--max-runs", g.max_runs, "Refuse grids with more runs than this")->capture_default_str();
}

namespace {

Strategy parse_strategy(const std::string& s) {
    if (s == "flood") return Strategy::Flood;
    if (s == "hitpoison" || s == "hit-poison") return Strategy::HitPoison;
    throw UsageError("--strategy: expected flood or hitpoison, got '" + s + "'");
}

std::string describe(const SimConfig& c) {
    return to_string(c.algorithm) + " n=" + std::to_string(c.n) + " f=" + format_number(c.f) +
           " v=" + std::to_string(c.params.view_size) + " rho=" + format_number(c.params.sampling_rate) +
           " k=" + std::to_string(c.params.replacement_count) + " F=" + format_number(c.attack.force);
}

template <class T>
void require_nonempty(const std::vector<T>& v, const char* name) {
    if (v.empty()) throw UsageError(std::string("--") + name + ": empty grid");
}

std::string strategy_name(Strategy s) { return s == Strategy::Flood ? "flood" : "hitpoison"; }

std::string optional_tick(const std::optional<Tick>& t) {
    return t ? std::to_string(*t) : std::string("nan");
}

} // namespace

std::vector<GridPoint> expand(const SimGrid& g) {
    require_nonempty(g.algos, "algo");
    require_nonempty(g.n, "n");
    require_nonempty(g.f, "f");
    require_nonempty(g.v, "v");
    require_nonempty(g.rho, "rho");
    require_nonempty(g.force, "force");
    const auto seeds = parse_seeds(g.seeds);
    const std::vector<int> k_grid = g.k.empty() ? std::vector<int>{-1} : g.k;

    const double points = static_cast<double>(g.algos.size()) * static_cast<double>(g.n.size()) *
                          static_cast<double>(g.f.size()) * static_cast<double>(g.v.size()) *
                          static_cast<double>(g.rho.size()) * static_cast<double>(k_grid.size()) *
                          static_cast<double>(g.force.size());
    const double runs = points * static_cast<double>(seeds.size());
    if (runs > static_cast<double>(g.max_runs)) {
        throw UsageError("grid has " + format_number(runs) + " runs, above --max-runs " +
                         std::to_string(g.max_runs));
    }

    SimConfig base;
    base.params.exchange_interval = static_cast<Tick>(std::max(0, g.tau));
    if (g.tau < 1) throw UsageError("--tau must be at least 1");
    if (g.ticks < 1) throw UsageError("--ticks must be at least 1");
    if (g.metrics_interval < 1) throw UsageError("--metrics-interval must be at least 1");
    if (g.graph_interval < 0) throw UsageError("--graph-interval must be >= 0");
    base.attack.strategy = parse_strategy(g.strategy);
    base.attack.advertised_correct_count = g.advertised;
    base.ranking = g.ranking;
    base.ticks = static_cast<Tick>(g.ticks);
    base.metrics_interval = static_cast<Tick>(g.metrics_interval);
    base.graph_metrics_interval = static_cast<Tick>(g.graph_interval);
    base.path_pairs = g.path_pairs;
    base.probe_nodes = g.probe_nodes;
    base.bootstrap.size = g.bootstrap_size;
    base.bootstrap.byzantine_fraction = g.f0;
    base.bootstrap.per_node = g.per_node_bootstrap;
    base.brahms.alpha = g.alpha;
    base.brahms.beta = g.beta;
    base.brahms.gamma = g.gamma;
    base.brahms.push_limit = g.push_limit;

    std::vector<GridPoint> out;
    std::size_t point = 0;
    for (const auto& algo : g.algos) {
        Algorithm a{};
        try {
            a = parse_algorithm(algo);
        } catch (const ConfigError& e) {
            throw UsageError(std::string("--algo: ") + e.what());
        }
        for (int n : g.n) {
            for (double f : g.f) {
                for (int v : g.v) {
                    for (double rho : g.rho) {
                        for (int k : k_grid) {
                            for (double force : g.force) {
                                SimConfig c = base;
                                c.algorithm = a;
                                c.n = n;
                                c.f = f;
                                c.params.view_size = v;
                                c.params.sampling_rate = rho;
                                c.params.replacement_count = k < 0 ? std::max(1, v / 2) : k;
                                c.attack.force = force;
                                try {
                                    c.validate();
                                } catch (const ConfigError& e) {
                                    throw UsageError("invalid grid point (" + describe(c) + "): " + e.what());
                                }
                                for (auto s : seeds) {
                                    c.rng_seed = s;
                                    out.push_back({c, point});
                                }
                                ++point;
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

std::vector<SimResult> run_grid(const std::vector<GridPoint>& points, int jobs) {
    std::vector<SimResult> results(points.size());
    parallel_for(points.size(), jobs, [&](std::size_t i) { results[i] = run_sim(points[i].config); });
    return results;
}

std::string run_file_name(const SimConfig& c) {
    std::string name = to_string(c.algorithm) + "_n" + std::to_string(c.n) + "_f" + format_number(c.f) + "_v" +
                       std::to_string(c.params.view_size) + "_rho" + format_number(c.params.sampling_rate) + "_k" +
                       std::to_string(c.params.replacement_count) + "_F" + format_number(c.attack.force);
    if (c.attack.strategy == Strategy::HitPoison) name += "_hitpoison";
    return name + "_s" + std::to_string(c.rng_seed) + ".csv";
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
    const auto points = expand(o.grid);
    const auto results = run_grid(points, o.grid.jobs);
    std::filesystem::create_directories(o.out_dir);
    const std::filesystem::path dir(o.out_dir);

    for (std::size_t i = 0; i < points.size(); ++i) {
        std::ofstream f(dir / run_file_name(points[i].config), std::ios::binary);
        if (!f) throw UsageError("cannot write into '" + o.out_dir + "'");
        CsvWriter w(f);
        w.row({"tick", "byz_sample_fraction", "byz_view_fraction", "isolated_count", "clustering", "mean_path",
               "indegree_spread", "c_mean"});
        for (const auto& r : results[i].records) {
            w.row({std::to_string(r.tick), format_number(r.byz_sample_fraction), format_number(r.byz_view_fraction),
                   format_number(r.isolated_count), format_number(r.clustering), format_number(r.mean_path),
                   format_number(r.indegree_spread), format_number(r.c_mean)});
        }
    }

    const std::vector<std::string> params{"algo", "n", "f", "v", "rho", "k", "force", "strategy"};
    auto param_fields = [](const SimConfig& c) {
        return std::vector<std::string>{to_string(c.algorithm),
                                        std::to_string(c.n),
                                        format_number(c.f),
                                        std::to_string(c.params.view_size),
                                        format_number(c.params.sampling_rate),
                                        std::to_string(c.params.replacement_count),
                                        format_number(c.attack.force),
                                        strategy_name(c.attack.strategy)};
    };

    {
        std::ofstream f(dir / "summary.csv", std::ios::binary);
        CsvWriter w(f);
        auto header = params;
        for (const char* h : {"seed", "terminal_byz_sample_fraction", "terminal_byz_view_fraction",
                              "max_isolated_second_half", "convergence_tick", "samples", "byzantine_samples", "file"}) {
            header.emplace_back(h);
        }
        w.row(header);
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& c = points[i].config;
            const auto& r = results[i];
            auto row = param_fields(c);
            row.push_back(std::to_string(c.rng_seed));
            row.push_back(format_number(r.terminal_byz_sample_fraction()));
            row.push_back(format_number(r.terminal_byz_view_fraction()));
            row.push_back(format_number(r.max_isolated_second_half));
            row.push_back(optional_tick(convergence_time(r, c.f)));
            row.push_back(format_number(r.stats.samples));
            row.push_back(format_number(r.stats.byzantine_samples));
            row.push_back(run_file_name(c));
            w.row(row);
        }
    }

    {
        std::ofstream f(dir / "aggregate.csv", std::ios::binary);
        CsvWriter w(f);
        auto header = params;
        for (const char* h : {"runs", "byz_sample_fraction_mean", "byz_sample_fraction_stddev",
                              "byz_view_fraction_mean", "byz_view_fraction_stddev", "isolation_free_runs",
                              "converged_runs"}) {
            header.emplace_back(h);
        }
        w.row(header);
        std::size_t i = 0;
        while (i < points.size()) {
            std::size_t j = i;
            std::vector<double> samples;
            std::vector<double> views;
            std::size_t clean = 0;
            std::size_t converged = 0;
            for (; j < points.size() && points[j].point == points[i].point; ++j) {
                samples.push_back(results[j].terminal_byz_sample_fraction());
                views.push_back(results[j].terminal_byz_view_fraction());
                clean += isolation_free(results[j]) ? 1 : 0;
                converged += convergence_time(results[j], points[j].config.f) ? 1 : 0;
            }
            const auto bs = box_stats(samples);
            const auto bv = box_stats(views);
            auto row = param_fields(points[i].config);
            row.push_back(std::to_string(j - i));
            row.push_back(format_number(bs.mean));
            row.push_back(format_number(bs.stddev));
            row.push_back(format_number(bv.mean));
            row.push_back(format_number(bv.stddev));
            row.push_back(std::to_string(clean));
            row.push_back(std::to_string(converged));
            w.row(row);
            i = j;
        }
    }
    out << points.size() << " runs written to " << o.out_dir << "\n";
    return kOk;
}

namespace {

const std::vector<std::string> kBoxHeader{"runs", "non_finite", "min", "q1", "median", "q3", "max", "mean", "stddev"};

void append_box(std::vector<std::string>& row, const BoxStats& b) {
    row.push_back(std::to_string(b.count + b.non_finite));
    row.push_back(std::to_string(b.non_finite));
    for (double x : {b.min, b.q1, b.median, b.q3, b.max, b.mean, b.stddev}) row.push_back(format_number(x));
}

template <class T>
void require_single(const std::vector<T>& v, const char* name, const std::string& vary) {
    if (vary != name && v.size() > 1) {
        throw UsageError(std::string("--") + name + " must be a single value unless it is the swept parameter");
    }
}

std::vector<int> to_ints(const std::vector<double>& values, const char* name) {
    std::vector<int> out;
    for (double x : values) {
        if (x != std::floor(x) || x < 0 || x > 1e9) {
            throw UsageError(std::string("--values: ") + name + " needs integers, got " + format_number(x));
        }
        out.push_back(static_cast<int>(x));
    }
    return out;
}

double axis_value(const SimConfig& c, const std::string& vary) {
    if (vary == "f") return c.f;
    if (vary == "force") return c.attack.force;
    if (vary == "rho") return c.params.sampling_rate;
    if (vary == "v") return c.params.view_size;
    if (vary == "k") return c.params.replacement_count;
    return c.n;
}

} // namespace

int cmd_sweep_fig3(Fig3Options o, std::ostream& stdout_stream) {
    auto& g = o.grid;
    const std::string& vary = o.vary;
    if (o.values.empty()) throw UsageError("--values: empty grid");
    require_single(g.n, "n", vary);
    require_single(g.f, "f", vary);
    require_single(g.v, "v", vary);
    require_single(g.rho, "rho", vary);
    require_single(g.k, "k", vary);
    require_single(g.force, "force", vary);
    if (vary == "f") {
        g.f = o.values;
    } else if (vary == "force") {
        g.force = o.values;
    } else if (vary == "rho") {
        g.rho = o.values;
    } else if (vary == "v") {
        g.v = to_ints(o.values, "v");
    } else if (vary == "k") {
        g.k = to_ints(o.values, "k");
    } else if (vary == "n") {
        g.n = to_ints(o.values, "n");
    } else {
        throw UsageError("--vary: expected f, force, rho, v, k or n, got '" + vary + "'");
    }

    const auto points = expand(g);
    const auto results = run_grid(points, g.jobs);

    std::map<std::pair<std::string, double>, std::vector<double>> groups;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& c = points[i].config;
        groups[{to_string(c.algorithm), axis_value(c, vary)}].push_back(results[i].terminal_byz_sample_fraction());
    }

    Output output(o.out, stdout_stream);
    CsvWriter w(output.stream());
    std::vector<std::string> header{"parameter", "x", "algo"};
    header.insert(header.end(), kBoxHeader.begin(), kBoxHeader.end());
    w.row(header);
    for (double x : o.values) {
        for (const auto& algo : g.algos) {
            const auto name = to_string(parse_algorithm(algo));
            const auto it = groups.find({name, x});
            if (it == groups.end()) continue;
            std::vector<std::string> row{vary, format_number(x), name};
            append_box(row, box_stats(it->second));
            w.row(row);
        }
    }
    return kOk;
}

int cmd_sweep_convergence(const ConvergenceOptions& o, std::ostream& stdout_stream) {
    if (!(o.ratio > 0.0)) throw UsageError("--ratio must be > 0");
    const auto points = expand(o.grid);
    const auto results = run_grid(points, o.grid.jobs);

    Output output(o.out, stdout_stream);
    CsvWriter w(output.stream());
    std::vector<std::string> header{"f", "algo", "converged"};
    header.insert(header.end(), kBoxHeader.begin(), kBoxHeader.end());
    w.row(header);
    std::size_t i = 0;
    while (i < points.size()) {
        std::size_t j = i;
        std::vector<double> ticks;
        std::size_t converged = 0;
        for (; j < points.size() && points[j].point == points[i].point; ++j) {
            const auto t = convergence_time(results[j], points[j].config.f, o.ratio);
            converged += t ? 1 : 0;
            ticks.push_back(t ? static_cast<double>(*t) : std::nan(""));
        }
        const auto& c = points[i].config;
        std::vector<std::string> row{format_number(c.f), to_string(c.algorithm), std::to_string(converged)};
        append_box(row, box_stats(ticks));
        w.row(row);
        i = j;
    }
    return kOk;
}

int cmd_sweep_maxrate(const MaxRateOptions& o, std::ostream& stdout_stream) {
    const auto& g = o.grid;
    if (o.views.empty()) throw UsageError("--views: empty grid");
    if (o.rates.empty()) throw UsageError("--rates: empty grid");
    if (g.n.size() != 1 || g.f.size() != 1 || g.force.size() != 1 || !g.k.empty()) {
        throw UsageError("maxrate takes single --n, --f and --force values and derives k itself");
    }
    SimGrid base_grid = g;
    base_grid.v = {o.views.front()};
    base_grid.rho = {1.0};
    base_grid.k = {1};
    auto base_points = expand(base_grid);
    const auto seeds = parse_seeds(g.seeds);
    const double runs = static_cast<double>(g.algos.size() * o.views.size() * o.rates.size() * seeds.size());
    if (runs > static_cast<double>(g.max_runs)) {
        throw UsageError("grid has " + format_number(runs) + " runs, above --max-runs " +
                         std::to_string(g.max_runs));
    }

    std::vector<GridPoint> points;
    std::size_t point = 0;
    for (std::size_t a = 0; a < g.algos.size(); ++a) {
        const SimConfig& base = base_points[a * seeds.size()].config;
        for (int v : o.views) {
            for (double rho : o.rates) {
                SimConfig c;
                try {
                    c = rate_config(base, v, rho);
                    c.validate();
                } catch (const ConfigError& e) {
                    throw UsageError("invalid maxrate point (v=" + std::to_string(v) + ", rho=" + format_number(rho) +
                                     "): " + e.what());
                }
                for (auto s : seeds) {
                    c.rng_seed = s;
                    points.push_back({c, point});
                }
                ++point;
            }
        }
    }
    const auto results = run_grid(points, g.jobs);

    struct Row {
        std::vector<std::string> fields;
        bool success;
        double rho;
    };
    std::vector<Row> rows;
    std::size_t i = 0;
    while (i < points.size()) {
        std::size_t j = i;
        std::size_t wins = 0;
        for (; j < points.size() && points[j].point == points[i].point; ++j) wins += isolation_free(results[j]) ? 1 : 0;
        const auto& c = points[i].config;
        const bool ok = 2 * wins > j - i;
        rows.push_back({{to_string(c.algorithm), std::to_string(c.params.view_size),
                         format_number(c.params.sampling_rate), std::to_string(c.params.replacement_count),
                         std::to_string(wins), std::to_string(j - i), ok ? "1" : "0"},
                        ok,
                        c.params.sampling_rate});
        i = j;
    }

    Output output(o.out, stdout_stream);
    CsvWriter w(output.stream());
    w.row({"algo", "v", "rho", "k", "isolation_free_runs", "runs", "success", "max_rho"});
    const std::size_t per_view = o.rates.size();
    for (std::size_t start = 0; start < rows.size(); start += per_view) {
        std::optional<double> best;
        for (std::size_t r = start; r < start + per_view; ++r) {
            if (rows[r].success && (!best || rows[r].rho > *best)) best = rows[r].rho;
        }
        for (std::size_t r = start; r < start + per_view; ++r) {
            auto fields = rows[r].fields;
            fields.push_back(best ? format_number(*best) : "nan");
            w.row(fields);
        }
    }
    return kOk;
}

} // namespace basalt::cli
