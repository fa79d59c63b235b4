#include "basalt/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <unordered_map>

#include "basalt/error.hpp"
#include "basalt/graph_metrics.hpp"

namespace basalt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using AddrIndex = std::unordered_map<std::uint32_t, std::uint32_t>;

/// Tracks, for one node, how many distinct correct ids each slot has been
/// presented since its last reset.
class KnowledgeProbe : public SlotObserver {
public:
    KnowledgeProbe(const AddrIndex& index, std::size_t correct, std::uint32_t self, std::size_t slots)
        : index_(index), correct_(correct), self_(self), last_seen_(correct, 0), reset_seq_(slots, 0) {}

    void on_presented(std::span<const NodeId> candidates) override {
        ++seq_;
        for (NodeId c : candidates) {
            const auto it = index_.find(c.addr);
            if (it == index_.end() || it->second >= correct_ || it->second == self_) continue;
            last_seen_[it->second] = seq_;
        }
    }

    void on_reset(std::size_t slot) override { reset_seq_[slot] = seq_ + 1; }

    double mean_knowledge() {
        seen_.clear();
        for (std::uint64_t s : last_seen_) {
            if (s != 0) seen_.push_back(s);
        }
        std::sort(seen_.begin(), seen_.end());
        double total = 0.0;
        for (std::uint64_t r : reset_seq_) {
            const auto first = std::lower_bound(seen_.begin(), seen_.end(), std::max<std::uint64_t>(r, 1));
            total += static_cast<double>(seen_.end() - first);
        }
        return total / static_cast<double>(reset_seq_.size());
    }

private:
    const AddrIndex& index_;
    std::size_t correct_;
    std::uint32_t self_;
    std::uint64_t seq_ = 0;
    std::vector<std::uint64_t> last_seen_;
    std::vector<std::uint64_t> reset_seq_;
    std::vector<std::uint64_t> seen_;
};

std::vector<NodeId> draw_distinct(const std::vector<NodeId>& pool, std::size_t count, Rng& rng) {
    std::vector<NodeId> out;
    if (pool.empty() || count == 0) return out;
    if (count > pool.size()) {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        out = pool;
        while (out.size() < count) out.push_back(pool[pick(rng)]);
        return out;
    }
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
        out.push_back(pool[idx[i]]);
    }
    return out;
}

std::vector<NodeId> make_bootstrap(const SimConfig& cfg, const std::vector<NodeId>& correct,
                                   const std::vector<NodeId>& byzantine, Rng& rng) {
    const auto size = static_cast<std::size_t>(cfg.bootstrap.size > 0 ? cfg.bootstrap.size : cfg.params.view_size);
    const double f0 = cfg.bootstrap.byzantine_fraction >= 0.0 ? cfg.bootstrap.byzantine_fraction : cfg.f;
    std::size_t nb = byzantine.empty() ? 0 : static_cast<std::size_t>(std::ceil(f0 * static_cast<double>(size) - 1e-9));
    nb = std::min(nb, size);
    if (correct.empty()) nb = size;
    std::vector<NodeId> list = draw_distinct(byzantine, nb, rng);
    std::vector<NodeId> honest = draw_distinct(correct, size - nb, rng);
    list.insert(list.end(), honest.begin(), honest.end());
    std::shuffle(list.begin(), list.end(), rng);
    return list;
}

} // namespace

std::string to_string(Algorithm a) {
    switch (a) {
    case Algorithm::Basalt: return "basalt";
    case Algorithm::BasaltSimple: return "basalt-simple";
    case Algorithm::Brahms: return "brahms";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "basalt") return Algorithm::Basalt;
    if (name == "basalt-simple" || name == "simple") return Algorithm::BasaltSimple;
    if (name == "brahms") return Algorithm::Brahms;
    throw ConfigError("unknown algorithm '" + name + "'");
}

int SimConfig::correct_count() const { return static_cast<int>(std::lround((1.0 - f) * n)); }

ProtocolParams SimConfig::protocol() const {
    ProtocolParams p = params;
    p.mode = algorithm == Algorithm::BasaltSimple ? Mode::Simple : Mode::Full;
    return p;
}

BrahmsParams SimConfig::brahms_params() const {
    BrahmsParams b = brahms;
    b.view_size = params.view_size;
    b.exchange_interval = params.exchange_interval;
    b.sampling_rate = params.sampling_rate;
    b.replacement_count = params.replacement_count;
    return b;
}

void SimConfig::validate() const {
    if (n < 2) throw ConfigError("n must be at least 2");
    if (!(f >= 0.0 && f < 1.0)) throw ConfigError("f must lie in [0, 1)");
    if (correct_count() < 1) throw ConfigError("f leaves no correct node");
    if (ticks < 1) throw ConfigError("ticks must be at least 1");
    if (metrics_interval < 1) throw ConfigError("metrics_interval must be at least 1");
    if (bootstrap.size < 0) throw ConfigError("bootstrap size I must be >= 0");
    if (bootstrap.byzantine_fraction > 1.0) throw ConfigError("bootstrap f0 must lie in [0, 1]");
    if (probe_nodes < 0) throw ConfigError("probe_nodes must be >= 0");
    params.validate();
    if (algorithm == Algorithm::Brahms) brahms_params().validate();
    attack.validate();
    parse_ranking(ranking);
}

double SimResult::terminal_byz_sample_fraction() const {
    const std::size_t t = samples_per_tick.size();
    const auto tail = static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(t)));
    std::uint64_t total = 0;
    std::uint64_t byz = 0;
    for (std::size_t i = t - tail; i < t; ++i) {
        total += samples_per_tick[i];
        byz += byz_samples_per_tick[i];
    }
    return total == 0 ? kNaN : static_cast<double>(byz) / static_cast<double>(total);
}

double SimResult::terminal_byz_view_fraction() const {
    if (records.empty()) return kNaN;
    const auto t = static_cast<double>(samples_per_tick.size());
    const double start = t - std::ceil(0.2 * t);
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : records) {
        if (static_cast<double>(r.tick) > start) {
            sum += r.byz_view_fraction;
            ++count;
        }
    }
    return count == 0 ? kNaN : sum / static_cast<double>(count);
}

SimResult run_sim(const SimConfig& cfg) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(cfg.n);
    const auto q = static_cast<std::size_t>(cfg.correct_count());
    const ProtocolParams params = cfg.protocol();
    const auto v = static_cast<std::size_t>(params.view_size);
    const bool brahms = cfg.algorithm == Algorithm::Brahms;
    const RankingFunction ranking = parse_ranking(cfg.ranking);

    Rng master(cfg.rng_seed);

    std::vector<NodeId> ids;
    ids.reserve(n);
    AddrIndex index;
    index.reserve(n * 2);
    while (ids.size() < n) {
        const auto addr = static_cast<std::uint32_t>(master());
        if (index.contains(addr)) continue;
        const auto i = static_cast<std::uint32_t>(ids.size());
        index.emplace(addr, i);
        ids.emplace_back(addr, i < q ? Role::Correct : Role::Byzantine);
    }
    const std::vector<NodeId> correct(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(q));
    const std::vector<NodeId> byzantine(ids.begin() + static_cast<std::ptrdiff_t>(q), ids.end());

    std::vector<NodeId> shared;
    if (!cfg.bootstrap.per_node) shared = make_bootstrap(cfg, correct, byzantine, master);

    std::vector<BasaltNode> basalt_nodes;
    std::vector<BrahmsNode> brahms_nodes;
    std::vector<std::unique_ptr<KnowledgeProbe>> probes;
    const std::size_t probe_count = brahms ? 0 : std::min(q, static_cast<std::size_t>(cfg.probe_nodes));
    if (brahms) {
        brahms_nodes.reserve(q);
    } else {
        basalt_nodes.reserve(q);
    }
    const BrahmsParams bparams = cfg.brahms_params();
    for (std::size_t i = 0; i < q; ++i) {
        std::vector<NodeId> own;
        if (cfg.bootstrap.per_node) own = make_bootstrap(cfg, correct, byzantine, master);
        const std::vector<NodeId>& boot = cfg.bootstrap.per_node ? own : shared;
        const std::uint64_t node_seed = master();
        if (brahms) {
            brahms_nodes.emplace_back(ids[i], bparams, boot, node_seed);
        } else {
            basalt_nodes.emplace_back(ids[i], params, ranking, boot, node_seed);
        }
        if (i < probe_count) {
            probes.push_back(std::make_unique<KnowledgeProbe>(index, q, static_cast<std::uint32_t>(i), v));
            probes.back()->on_presented(boot);
            basalt_nodes.back().set_observer(probes.back().get());
        }
    }

    Adversary adversary(cfg.attack, correct, byzantine, params.view_size, master());
    const PushStyle style = brahms ? PushStyle::SenderOnly : PushStyle::View;
    const int fanout = brahms ? bparams.push_fanout : 1;
    Rng shuffle_rng(master());
    Rng metrics_rng(master());

    SimResult result;
    result.samples_per_tick.assign(cfg.ticks, 0);
    result.byz_samples_per_tick.assign(cfg.ticks, 0);
    const Tick window = std::max(cfg.metrics_interval, params.sampling_period());
    const Tick half = (cfg.ticks + 1) / 2;

    auto view_of = [&](std::size_t i) -> const std::vector<NodeId>& {
        return brahms ? brahms_nodes[i].view() : basalt_nodes[i].view();
    };

    std::vector<Message> inbox;
    std::vector<Message> outbox;
    for (Tick t = 1; t <= cfg.ticks; ++t) {
        std::shuffle(inbox.begin(), inbox.end(), shuffle_rng);
        outbox.clear();
        for (Message& m : inbox) {
            ++result.stats.messages_delivered;
            const std::uint32_t dest = index.at(destination(m).addr);
            if (auto* pull = std::get_if<PullRequest>(&m)) {
                if (dest >= q) {
                    outbox.emplace_back(adversary.on_pull(ids[dest], pull->from));
                } else if (brahms) {
                    outbox.emplace_back(brahms_nodes[dest].on_pull(pull->from));
                } else {
                    outbox.emplace_back(basalt_nodes[dest].on_pull(pull->from));
                }
            } else if (dest < q) {
                const auto& push = std::get<PushMessage>(m);
                if (brahms) {
                    brahms_nodes[dest].on_push(push);
                } else {
                    basalt_nodes[dest].on_push(push);
                }
            }
        }

        std::uint32_t samples = 0;
        std::uint32_t byz_samples = 0;
        for (std::size_t i = 0; i < q; ++i) {
            TickOutput out = brahms ? brahms_nodes[i].on_tick(t) : basalt_nodes[i].on_tick(t);
            for (NodeId s : out.samples) byz_samples += s.byzantine() ? 1 : 0;
            samples += static_cast<std::uint32_t>(out.samples.size());
            for (Message& m : out.messages) outbox.emplace_back(std::move(m));
        }
        if (t % params.exchange_interval == 0) {
            for (NodeId b : byzantine) {
                for (Message& m : adversary.on_tick(b, t, style, fanout)) outbox.emplace_back(std::move(m));
            }
        }
        result.samples_per_tick[t - 1] = samples;
        result.byz_samples_per_tick[t - 1] = byz_samples;
        result.stats.samples += samples;
        result.stats.byzantine_samples += byz_samples;
        result.stats.messages_emitted += outbox.size();

        const bool record = t % cfg.metrics_interval == 0;
        if (record || t >= half) {
            int isolated = 0;
            double byz_slots = 0.0;
            for (std::size_t i = 0; i < q; ++i) {
                std::size_t bad = 0;
                for (NodeId p : view_of(i)) bad += p.byzantine() ? 1 : 0;
                byz_slots += static_cast<double>(bad) / static_cast<double>(v);
                if (bad == v) ++isolated;
            }
            if (t >= half) result.max_isolated_second_half = std::max(result.max_isolated_second_half, isolated);
            if (record) {
                MetricsRecord r;
                r.tick = t;
                std::uint64_t total = 0;
                std::uint64_t byz = 0;
                for (Tick s = t > window ? t - window + 1 : 1; s <= t; ++s) {
                    total += result.samples_per_tick[s - 1];
                    byz += result.byz_samples_per_tick[s - 1];
                }
                r.byz_sample_fraction = total == 0 ? kNaN : static_cast<double>(byz) / static_cast<double>(total);
                r.byz_view_fraction = byz_slots / static_cast<double>(q);
                r.isolated_count = isolated;
                r.clustering = kNaN;
                r.mean_path = kNaN;
                r.indegree_spread = kNaN;
                r.disconnected_fraction = kNaN;
                if (cfg.graph_metrics_interval > 0 && t % cfg.graph_metrics_interval == 0) {
                    ViewGraph g;
                    g.correct = q;
                    g.total = n;
                    g.out.resize(q);
                    for (std::size_t i = 0; i < q; ++i) {
                        for (NodeId p : view_of(i)) g.out[i].push_back(index.at(p.addr));
                    }
                    const GraphMetrics gm = graph_metrics(g, metrics_rng, cfg.path_pairs);
                    r.clustering = gm.clustering;
                    r.mean_path = gm.mean_path;
                    r.indegree_spread = gm.indegree_spread;
                    r.disconnected_fraction = gm.disconnected_fraction;
                }
                if (probes.empty()) {
                    r.c_mean = kNaN;
                } else {
                    double c = 0.0;
                    for (auto& p : probes) c += p->mean_knowledge();
                    r.c_mean = c / static_cast<double>(probes.size());
                }
                result.records.push_back(r);
            }
        }
        inbox.swap(outbox);
    }
    result.stats.messages_in_flight = inbox.size();
    return result;
}

std::optional<Tick> convergence_time(const SimResult& result, double f, double ratio) {
    if (f <= 0.0) return Tick{0};
    const double limit = ratio * f;
    std::optional<Tick> since;
    for (const auto& r : result.records) {
        const bool ok = !std::isnan(r.byz_sample_fraction) && r.byz_sample_fraction <= limit;
        if (!ok) {
            since.reset();
        } else if (!since) {
            since = r.tick;
        }
    }
    return since;
}

std::optional<Tick> convergence_time(const SimConfig& cfg, double ratio) {
    if (cfg.f <= 0.0) return Tick{0};
    return convergence_time(run_sim(cfg), cfg.f, ratio);
}

SimConfig rate_config(const SimConfig& base, int view_size, double rho) {
    if (view_size < 1) throw ConfigError("v must be at least 1");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be > 0");
    SimConfig cfg = base;
    const double period = std::max(1.0, std::round(view_size / (2.0 * rho)));
    const double k = rho * period;
    if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k) || std::round(k) > view_size) {
        throw ConfigError("no integral k <= v gives rho = " + std::to_string(rho) + " at v = " + std::to_string(view_size));
    }
    cfg.params.view_size = view_size;
    cfg.params.sampling_rate = rho;
    cfg.params.replacement_count = static_cast<int>(std::round(k));
    return cfg;
}

std::vector<MaxRateEntry> max_sampling_rate(const SimConfig& base, const std::vector<int>& v_grid,
                                            const std::vector<double>& rho_grid,
                                            const std::vector<std::uint64_t>& seeds) {
    if (v_grid.empty() || rho_grid.empty()) throw ConfigError("max sampling rate needs non-empty v and rho grids");
    if (seeds.empty()) throw ConfigError("max sampling rate needs at least one seed");
    std::vector<MaxRateEntry> out;
    for (int v : v_grid) {
        MaxRateEntry e;
        e.view_size = v;
        for (double rho : rho_grid) {
            SimConfig cfg = rate_config(base, v, rho);
            std::size_t wins = 0;
            for (std::uint64_t s : seeds) {
                cfg.rng_seed = s;
                wins += isolation_free(run_sim(cfg)) ? 1 : 0;
            }
            const bool ok = 2 * wins > seeds.size();
            e.success.push_back(ok);
            if (ok && (!e.max_rho || rho > *e.max_rho)) e.max_rho = rho;
        }
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace basalt
