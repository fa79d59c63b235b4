#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <unordered_set>

#include "basalt/attacker_power.hpp"
#include "basalt/error.hpp"
#include "basalt/ip_blocks.hpp"
#include "basalt/theory.hpp"
#include "basalt_cli/support.hpp"
#include "commands.hpp"

#ifndef BASALT_DEFAULT_DATASET
#define BASALT_DEFAULT_DATASET ""
#endif

namespace basalt::cli {

namespace {

std::string default_dataset() {
    if (const char* env = std::getenv("BASALT_DATASET")) return env;
    return BASALT_DEFAULT_DATASET;
}

struct ModelArgs {
    std::vector<double> f{0.1};
    std::vector<double> n{1000};
    std::vector<double> v{100};
    std::vector<double> rho{1.0};
    double tau = 1.0;
    double k = 50;
};

void add_model_options(CLI::App* app, ModelArgs& m, bool lists) {
    if (lists) {
        app->add_option("--f", m.f, "Byzantine fraction (list)")->delimiter(',');
        app->add_option("--n", m.n, "Network size (list)")->delimiter(',');
        app->add_option("--v", m.v, "View size (list)")->delimiter(',');
        app->add_option("--rho", m.rho, "Sampling rate (list)")->delimiter(',');
    } else {
        app->add_option("--f", m.f.front(), "Byzantine fraction")->capture_default_str();
        app->add_option("--n", m.n.front(), "Network size")->capture_default_str();
        app->add_option("--v", m.v.front(), "View size")->capture_default_str();
        app->add_option("--rho", m.rho.front(), "Sampling rate")->capture_default_str();
    }
    app->add_option("--tau", m.tau, "Exchange interval")->capture_default_str();
}

TheoryParams theory(const ModelArgs& m, std::size_t fi = 0, std::size_t ni = 0, std::size_t vi = 0,
                    std::size_t ri = 0) {
    TheoryParams tp;
    tp.f = m.f[fi];
    tp.n = m.n[ni];
    tp.v = m.v[vi];
    tp.rho = m.rho[ri];
    tp.tau = m.tau;
    tp.k = m.k;
    return tp;
}

struct PowerArgs {
    std::string dataset = default_dataset();
    std::int64_t asn = -1;
    std::vector<double> honest{100, 1000, 10000};
    std::vector<std::string> rankings{"uniform", "grouped8", "grouped16", "grouped24", "hierarchical"};
    std::string method = "analytic";
    int trials = 200;
    std::uint64_t seed = 1;
};

void add_power_options(CLI::App* app, PowerArgs& p) {
    app->add_option("--dataset", p.dataset, "CSV with header network,asn,active_count")->capture_default_str();
    app->add_option("--asn", p.asn, "Attacker AS number (default: largest by active addresses)");
    app->add_option("--honest", p.honest, "Honest node counts Q (list)")->delimiter(',');
    app->add_option("--method", p.method, "analytic or montecarlo")->capture_default_str();
    app->add_option("--trials", p.trials, "Monte-Carlo placements")->capture_default_str();
    app->add_option("--seed", p.seed, "Monte-Carlo seed")->capture_default_str();
}

PowerOptions power_options(const PowerArgs& p) {
    PowerOptions o;
    if (p.method == "analytic") {
        o.method = PowerMethod::Analytic;
    } else if (p.method == "montecarlo" || p.method == "monte-carlo") {
        o.method = PowerMethod::MonteCarlo;
    } else {
        throw UsageError("--method: expected analytic or montecarlo, got '" + p.method + "'");
    }
    o.trials = p.trials;
    o.seed = p.seed;
    return o;
}

IpBlockTable load(const std::string& path) {
    if (path.empty()) throw UsageError("--dataset is required (or set BASALT_DATASET)");
    return IpBlockTable::load_csv(path);
}

std::uint32_t pick_asn(const IpBlockTable& table, std::int64_t asn) {
    if (asn >= 0) {
        if (table.block_count(static_cast<std::uint32_t>(asn)) == 0) {
            throw DataError("AS " + std::to_string(asn) + " has no block in the dataset");
        }
        return static_cast<std::uint32_t>(asn);
    }
    const auto order = table.asns_by_size();
    if (order.empty()) throw DataError("dataset has no blocks");
    return order.front();
}

RankingFunction ranking_arg(const std::string& name) {
    try {
        return parse_ranking(name);
    } catch (const ConfigError& e) {
        throw UsageError(std::string("--ranking: ") + e.what());
    }
}

std::string label(const std::string& ranking) {
    if (ranking == "uniform") return "Uniform";
    if (ranking == "grouped8") return "By /8 prefix";
    if (ranking == "grouped16") return "By /16 prefix";
    if (ranking == "grouped24") return "By /24 prefix";
    if (ranking == "hierarchical") return "Hierarchical";
    return ranking;
}

std::string optional_number(const std::optional<double>& x) { return x ? format_number(*x) : "nan"; }

} // namespace

std::function<int(std::ostream&)> add_analyze(CLI::App& app) {
    auto* analyze = app.add_subcommand("analyze", "Closed forms, ODE model and attacker power");
    analyze->require_subcommand(1);
    auto out_path = std::make_shared<std::string>("-");
    auto selected = std::make_shared<std::function<int(std::ostream&)>>();
    auto output_option = [out_path](CLI::App* sub) {
        sub->add_option("--out", *out_path, "Output CSV path, - for stdout")->capture_default_str();
    };

    {
        auto m = std::make_shared<ModelArgs>();
        auto* sub = analyze->add_subcommand("equilibrium", "Equilibria B1, B2 of dB/dt over a grid");
        add_model_options(sub, *m, true);
        output_option(sub);
        sub->callback([=] {
            *selected = [=](std::ostream& so) {
                Output out(*out_path, so);
                CsvWriter w(out.stream());
                w.row({"f", "n", "v", "rho", "tau", "B1", "B2", "collapse"});
                for (std::size_t fi = 0; fi < m->f.size(); ++fi) {
                    for (std::size_t ni = 0; ni < m->n.size(); ++ni) {
                        for (std::size_t vi = 0; vi < m->v.size(); ++vi) {
                            for (std::size_t ri = 0; ri < m->rho.size(); ++ri) {
                                const auto tp = theory(*m, fi, ni, vi, ri);
                                const auto eq = equilibrium(tp);
                                w.row({format_number(tp.f), format_number(tp.n), format_number(tp.v),
                                       format_number(tp.rho), format_number(tp.tau),
                                       eq ? format_number(eq->stable) : "nan",
                                       eq ? format_number(eq->unstable) : "nan", eq ? "0" : "1"});
                            }
                        }
                    }
                }
                return int{kOk};
            };
        });
    }

    {
        auto m = std::make_shared<ModelArgs>();
        auto c0 = std::make_shared<double>(-1.0);
        auto t_end = std::make_shared<double>(200.0);
        auto dt = std::make_shared<double>(0.01);
        auto stride = std::make_shared<std::size_t>(100);
        auto* sub = analyze->add_subcommand("ode", "RK4 trajectory of c(t) and B(t)");
        add_model_options(sub, *m, false);
        sub->add_option("--c0", *c0, "Initial correct ids known (default (1-f) v)");
        sub->add_option("--t-end", *t_end, "End time")->capture_default_str();
        sub->add_option("--dt", *dt, "Step size")->capture_default_str();
        sub->add_option("--stride", *stride, "Keep every stride-th step")->capture_default_str();
        output_option(sub);
        sub->callback([=] {
            *selected = [=](std::ostream& so) {
                const auto tp = theory(*m);
                const double start = *c0 < 0.0 ? (1.0 - tp.f) * tp.v : *c0;
                const auto traj = ode_trajectory(tp, start, *t_end, *dt, *stride);
                Output out(*out_path, so);
                CsvWriter w(out.stream());
                w.row({"t", "c", "B"});
                for (const auto& p : traj) w.row({format_number(p.t), format_number(p.c), format_number(p.B)});
                return int{kOk};
            };
        });
    }

    {
        struct Args {
            bool join = false;
            bool reset = false;
            double f0 = 0.5;
            double bootstrap = 250;
            double f = 0.1;
            double n = 10000;
            double v = 200;
            double c = 585;
            double k = 50;
        };
        auto a = std::make_shared<Args>();
        auto* sub = analyze->add_subcommand("isolation", "Isolation probability of a joining or resetting node");
        auto* join = sub->add_flag("--join", a->join, "(1/(1 + (1-f0) I / (f n)))^v");
        auto* reset = sub->add_flag("--reset", a->reset, "(f n / (f n + c))^(v-k)");
        join->excludes(reset);
        sub->add_option("--f0", a->f0, "Byzantine share of the bootstrap list")->capture_default_str();
        sub->add_option("--bootstrap", a->bootstrap, "Bootstrap list size I")->capture_default_str();
        sub->add_option("--f", a->f, "Byzantine fraction")->capture_default_str();
        sub->add_option("--n", a->n, "Network size")->capture_default_str();
        sub->add_option("--v", a->v, "View size")->capture_default_str();
        sub->add_option("--c", a->c, "Correct ids known at reset")->capture_default_str();
        sub->add_option("--k", a->k, "Replacement count")->capture_default_str();
        output_option(sub);
        sub->callback([=] {
            if (!a->join && !a->reset) throw CLI::ValidationError("isolation", "one of --join or --reset is required");
            *selected = [=](std::ostream& so) {
                Output out(*out_path, so);
                CsvWriter w(out.stream());
                if (a->join) {
                    w.row({"kind", "f0", "I", "f", "n", "v", "probability"});
                    w.row({"join", format_number(a->f0), format_number(a->bootstrap), format_number(a->f),
                           format_number(a->n), format_number(a->v),
                           format_number(join_isolation_prob(a->f0, a->bootstrap, a->f, a->n, a->v))});
                } else {
                    w.row({"kind", "c", "f", "n", "v", "k", "probability"});
                    w.row({"reset", format_number(a->c), format_number(a->f), format_number(a->n),
                           format_number(a->v), format_number(a->k),
                           format_number(reset_isolation_prob(a->c, a->f, a->n, a->v, a->k))});
                }
                return int{kOk};
            };
        });
    }

    {
        auto m = std::make_shared<ModelArgs>();
        m->n = {10000};
        auto c0 = std::make_shared<std::vector<double>>(std::vector<double>{125});
        auto* sub = analyze->add_subcommand("deltac", "Lower bound on new correct ids between two resets");
        add_model_options(sub, *m, false);
        sub->add_option("--k", m->k, "Replacement count")->capture_default_str();
        sub->add_option("--c0", *c0, "Correct ids known after the reset (list)")->delimiter(',');
        output_option(sub);
        sub->callback([=] {
            *selected = [=](std::ostream& so) {
                const auto tp = theory(*m);
                Output out(*out_path, so);
                CsvWriter w(out.stream());
                w.row({"c0", "n", "f", "v", "k", "tau", "rho", "delta_c"});
                for (double c : *c0) {
                    w.row({format_number(c), format_number(tp.n), format_number(tp.f), format_number(tp.v),
                           format_number(tp.k), format_number(tp.tau), format_number(tp.rho),
                           format_number(delta_c_bound(c, tp))});
                }
                return int{kOk};
            };
        });
    }

    {
        auto p = std::make_shared<PowerArgs>();
        auto uniform = std::make_shared<bool>(false);
        auto* sub = analyze->add_subcommand("power", "Attacker power f of one AS");
        add_power_options(sub, *p);
        sub->add_option("--ranking", p->rankings, "Rankings (list)")->delimiter(',');
        sub->add_flag("--uniform", *uniform, "Shorthand for --ranking uniform");
        output_option(sub);
        sub->callback([=] {
            *selected = [=](std::ostream& so) {
                if (*uniform) p->rankings = {"uniform"};
                const auto options = power_options(*p);
                std::vector<RankingFunction> rankings;
                for (const auto& r : p->rankings) rankings.push_back(ranking_arg(r));
                const auto table = load(p->dataset);
                const auto asn = pick_asn(table, p->asn);
                const PowerModel model(table, asn);
                Output out(*out_path, so);
                CsvWriter w(out.stream());
                w.row({"asn", "attacker_addresses", "attacker_blocks", "ranking", "honest", "method", "power",
                       "std_error"});
                for (const auto& r : rankings) {
                    for (double q : p->honest) {
                        const auto e = model.power(r, q, options);
                        const bool exact = r.kind() == RankingKind::Uniform;
                        w.row({std::to_string(asn), std::to_string(model.attacker_addresses()),
                               std::to_string(model.attacker_blocks()), r.name(), format_number(q),
                               exact ? "exact" : p->method, format_number(e.power), format_number(e.std_error)});
                    }
                }
                return int{kOk};
            };
        });
    }

    {
        auto p = std::make_shared<PowerArgs>();
        auto* sub = analyze->add_subcommand("table2", "Attacker power per ranking and honest count");
        add_power_options(sub, *p);
        output_option(sub);
        sub->callback([=] {
            *selected = [=](std::ostream& so) {
                const auto options = power_options(*p);
                const auto table = load(p->dataset);
                const auto asn = pick_asn(table, p->asn);
                const PowerModel model(table, asn);
                Output out(*out_path, so);
                CsvWriter w(out.stream());
                std::vector<std::string> header{"ranking", "label"};
                for (double q : p->honest) header.push_back("Q=" + format_number(q));
                w.row(header);
                for (const auto& name : p->rankings) {
                    const auto r = ranking_arg(name);
                    std::vector<std::string> row{r.name(), label(r.name())};
                    for (double q : p->honest) row.push_back(format_number(model.power(r, q, options).power));
                    w.row(row);
                }
                return int{kOk};
            };
        });
    }

    {
        struct Args {
            PowerArgs power;
            int top = 100;
            double honest = 1000;
            double v = 100;
            double rho = 1.0;
            double tau = 1.0;
            int jobs = default_jobs();
        };
        auto a = std::make_shared<Args>();
        a->power.rankings = {"uniform", "hierarchical"};
        auto* sub = analyze->add_subcommand("fig2", "Equilibrium B1 for the largest ASes as attackers");
        sub->add_option("--dataset", a->power.dataset, "CSV with header network,asn,active_count")
            ->capture_default_str();
        sub->add_option("--top", a->top, "Number of largest ASes")->capture_default_str();
        sub->add_option("--honest", a->honest, "Honest node count Q")->capture_default_str();
        sub->add_option("--v", a->v, "View size")->capture_default_str();
        sub->add_option("--rho", a->rho, "Sampling rate")->capture_default_str();
        sub->add_option("--tau", a->tau, "Exchange interval")->capture_default_str();
        sub->add_option("--ranking", a->power.rankings, "Rankings (list)")->delimiter(',');
        sub->add_option("--method", a->power.method, "analytic or montecarlo")->capture_default_str();
        sub->add_option("--trials", a->power.trials, "Monte-Carlo placements")->capture_default_str();
        sub->add_option("--jobs", a->jobs, "Worker threads");
        output_option(sub);
        sub->callback([=] {
            *selected = [=](std::ostream& so) {
                if (a->top < 1) throw UsageError("--top must be at least 1");
                const auto options = power_options(a->power);
                std::vector<RankingFunction> rankings;
                for (const auto& r : a->power.rankings) rankings.push_back(ranking_arg(r));
                const auto table = load(a->power.dataset);
                auto order = table.asns_by_size();
                if (order.size() > static_cast<std::size_t>(a->top)) order.resize(static_cast<std::size_t>(a->top));

                struct Cell {
                    std::uint64_t addresses = 0;
                    std::size_t blocks = 0;
                    std::vector<double> power;
                };
                std::vector<Cell> cells(order.size());
                parallel_for(order.size(), a->jobs, [&](std::size_t i) {
                    const PowerModel model(table, order[i]);
                    cells[i].addresses = model.attacker_addresses();
                    cells[i].blocks = model.attacker_blocks();
                    for (const auto& r : rankings) cells[i].power.push_back(model.power(r, a->honest, options).power);
                });

                Output out(*out_path, so);
                CsvWriter w(out.stream());
                w.row({"rank", "asn", "attacker_addresses", "attacker_blocks", "ranking", "f", "n_equiv", "B1"});
                for (std::size_t i = 0; i < order.size(); ++i) {
                    for (std::size_t r = 0; r < rankings.size(); ++r) {
                        const double f = cells[i].power[r];
                        std::string n_equiv = "inf";
                        std::optional<double> b1;
                        if (f < 1.0) {
                            const double ne = equivalent_network_size(a->honest, f);
                            n_equiv = format_number(ne);
                            b1 = equilibrium_from_power(f, ne, a->v, a->rho, a->tau);
                        }
                        w.row({std::to_string(i + 1), std::to_string(order[i]), std::to_string(cells[i].addresses),
                               std::to_string(cells[i].blocks), rankings[r].name(), format_number(f), n_equiv,
                               optional_number(b1)});
                    }
                }
                return int{kOk};
            };
        });
    }

    {
        struct Args {
            int correct = 900;
            int byzantine = 100;
            int trials = 100000;
            std::string ranking = "uniform";
            std::string layout = "spread";
            std::uint64_t seed = 1;
        };
        auto a = std::make_shared<Args>();
        auto* sub = analyze->add_subcommand("botnet", "Probability that a fresh seed selects a correct node");
        sub->add_option("--correct", a->correct, "Correct ids")->capture_default_str();
        sub->add_option("--byzantine", a->byzantine, "Byzantine ids")->capture_default_str();
        sub->add_option("--trials", a->trials, "Fresh seeds")->capture_default_str();
        sub->add_option("--ranking", a->ranking, "Ranking")->capture_default_str();
        sub->add_option("--layout", a->layout, "spread: both uniform over IPv4; clustered: Byzantine ids in one /24")
            ->capture_default_str();
        sub->add_option("--seed", a->seed, "Seed for ids and ranking seeds")->capture_default_str();
        output_option(sub);
        sub->callback([=] {
            *selected = [=](std::ostream& so) {
                if (a->correct < 0 || a->byzantine < 0) throw UsageError("id counts must be >= 0");
                if (a->layout != "spread" && a->layout != "clustered") {
                    throw UsageError("--layout: expected spread or clustered, got '" + a->layout + "'");
                }
                if (a->layout == "clustered" && a->byzantine > 256) {
                    throw UsageError("--layout clustered holds at most 256 Byzantine ids");
                }
                const auto ranking = ranking_arg(a->ranking);
                Rng rng(a->seed);
                std::unordered_set<std::uint32_t> used;
                std::uniform_int_distribution<std::uint32_t> any;
                std::vector<NodeId> byz;
                if (a->layout == "clustered") {
                    const std::uint32_t block = any(rng) & 0xFFFFFF00u;
                    for (int i = 0; i < a->byzantine; ++i) {
                        const std::uint32_t addr = block | static_cast<std::uint32_t>(i);
                        used.insert(addr);
                        byz.emplace_back(addr, Role::Byzantine);
                    }
                } else {
                    while (byz.size() < static_cast<std::size_t>(a->byzantine)) {
                        const auto addr = any(rng);
                        if (used.insert(addr).second) byz.emplace_back(addr, Role::Byzantine);
                    }
                }
                std::vector<NodeId> correct;
                while (correct.size() < static_cast<std::size_t>(a->correct)) {
                    const auto addr = any(rng);
                    if (used.insert(addr).second) correct.emplace_back(addr, Role::Correct);
                }
                const double c = botnet_selection_prob(correct, byz, ranking, a->trials, a->seed + 1);
                const double total = static_cast<double>(a->correct + a->byzantine);
                Output out(*out_path, so);
                CsvWriter w(out.stream());
                w.row({"correct", "byzantine", "ranking", "layout", "trials", "C", "population_share"});
                w.row({std::to_string(a->correct), std::to_string(a->byzantine), ranking.name(), a->layout,
                       std::to_string(a->trials), format_number(c), format_number(a->correct / total)});
                return int{kOk};
            };
        });
    }

    return [selected](std::ostream& out) {
        if (!*selected) throw UsageError("analyze: no subcommand selected");
        return (*selected)(out);
    };
}

} // namespace basalt::cli
