#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "basalt/adversary.hpp"
#include "basalt/basalt_node.hpp"
#include "basalt/brahms_node.hpp"
#include "basalt/node_id.hpp"

namespace basalt {

enum class Algorithm { Basalt, BasaltSimple, Brahms };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct BootstrapConfig {
    /// List length I. 0 means v.
    int size = 0;
    /// Byzantine share f0 of the list. Negative means f.
    double byzantine_fraction = -1.0;
    /// Draw an independent list for every correct node instead of one shared list.
    bool per_node = false;
};

struct SimConfig {
    int n = 1000;
    double f = 0.1;
    Algorithm algorithm = Algorithm::Basalt;
    /// v, tau, rho and k apply to both algorithms; `mode` is set from `algorithm`.
    ProtocolParams params;
    /// Brahms-only knobs (mix weights, fanouts, push limit).
    BrahmsParams brahms;
    AttackConfig attack;
    BootstrapConfig bootstrap;
    Tick ticks = 400;
    std::uint64_t rng_seed = 1;
    Tick metrics_interval = 5;
    /// Graph metrics are computed on ticks divisible by this. 0 disables them.
    Tick graph_metrics_interval = 0;
    std::string ranking = "uniform";
    std::size_t path_pairs = 100000;
    /// Correct nodes whose knowledge c(t) is tracked for `c_mean`.
    int probe_nodes = 32;

    int correct_count() const;
    int byzantine_count() const { return n - correct_count(); }
    ProtocolParams protocol() const;
    BrahmsParams brahms_params() const;
    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Measurement taken at one tick. Unavailable values are NaN.
struct MetricsRecord {
    Tick tick = 0;
    double byz_sample_fraction = 0.0;
    double byz_view_fraction = 0.0;
    int isolated_count = 0;
    double clustering = 0.0;
    double mean_path = 0.0;
    double indegree_spread = 0.0;
    double c_mean = 0.0;
    double disconnected_fraction = 0.0;
};

struct SimStats {
    std::uint64_t messages_emitted = 0;
    std::uint64_t messages_delivered = 0;
    /// Emitted on the last tick, hence never delivered.
    std::uint64_t messages_in_flight = 0;
    std::uint64_t samples = 0;
    std::uint64_t byzantine_samples = 0;
};

struct SimResult {
    std::vector<MetricsRecord> records;
    /// Index t-1 holds the counts for tick t.
    std::vector<std::uint32_t> samples_per_tick;
    std::vector<std::uint32_t> byz_samples_per_tick;
    /// Largest isolated_count observed on any tick t >= T/2.
    int max_isolated_second_half = 0;
    SimStats stats;

    /// Byzantine share of all samples emitted during the final 20% of ticks.
    double terminal_byz_sample_fraction() const;
    /// Mean byz_view_fraction over records in the final 20% of ticks.
    double terminal_byz_view_fraction() const;
};

SimResult run_sim(const SimConfig& cfg);

/// First record tick from which byz_sample_fraction stays <= ratio * f until the
/// end of the run. NaN records count as violations. With f = 0 the answer is 0.
std::optional<Tick> convergence_time(const SimResult& result, double f, double ratio = 1.25);
std::optional<Tick> convergence_time(const SimConfig& cfg, double ratio = 1.25);

struct MaxRateEntry {
    int view_size = 0;
    /// Largest successful rho in the grid, or nullopt if none succeeded.
    std::optional<double> max_rho;
    /// Majority verdict per grid rho, in grid order.
    std::vector<bool> success;
};

/// No correct node isolated on any tick t >= T/2.
inline bool isolation_free(const SimResult& r) { return r.max_isolated_second_half == 0; }

/// `base` with view size v and sampling rate rho. k is rho times the sampling
/// period closest to v/(2 rho) (at least one tick), so k = v/2 whenever that is
/// integral. Throws ConfigError when no integral k <= v exists.
SimConfig rate_config(const SimConfig& base, int view_size, double rho);

/// Largest rho per v for which the run stays isolation_free, each point decided
/// by majority over `seeds`, with configs from rate_config.
std::vector<MaxRateEntry> max_sampling_rate(const SimConfig& base, const std::vector<int>& v_grid,
                                            const std::vector<double>& rho_grid,
                                            const std::vector<std::uint64_t>& seeds = {1, 2, 3});

} // namespace basalt
