#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "basalt/ip_blocks.hpp"
#include "basalt/keyed_hash.hpp"
#include "basalt/node_id.hpp"
#include "basalt/ranking.hpp"

namespace basalt {

enum class PowerMethod { Analytic, MonteCarlo };

struct PowerOptions {
    PowerMethod method = PowerMethod::Analytic;
    int trials = 200;
    std::uint64_t seed = 1;
};

struct PowerEstimate {
    double power = 0.0;
    /// Standard error of the mean over placements; 0 for analytic results.
    double std_error = 0.0;
};

/// Probability that the global rank argmin is one of the attacker's addresses
/// when Q honest nodes are spread over the other active addresses of a table.
///
/// Prefix occupancy is binary for the attacker. Honest occupancy is either its
/// expectation 1-(1-w)^Q per prefix (analytic) or drawn by placing Q honest
/// addresses at random (Monte-Carlo), in which case the descent is exact.
class PowerModel {
public:
    PowerModel(const IpBlockTable& table, std::uint32_t attacker_asn);

    std::uint64_t attacker_addresses() const { return q_; }
    std::uint64_t honest_addresses() const { return honest_total_; }
    std::size_t attacker_blocks() const { return attacker_blocks_; }

    PowerEstimate power(const RankingFunction& ranking, double honest, const PowerOptions& options = {}) const;

    double uniform(double honest) const;
    double grouped_analytic(int bits, double honest) const;
    double hierarchical_analytic(double honest) const;
    PowerEstimate grouped_monte_carlo(int bits, int honest, int trials, Rng& rng) const;
    PowerEstimate hierarchical_monte_carlo(int honest, int trials, Rng& rng) const;

    /// Q random honest addresses drawn proportionally to active counts.
    std::vector<std::uint32_t> place_honest(int honest, Rng& rng) const;

    /// Exact descent for one honest placement.
    double grouped_exact(int bits, const std::vector<std::uint32_t>& honest) const;
    double hierarchical_exact(const std::vector<std::uint32_t>& honest) const;

private:
    // Honest children that are not attacker prefixes, grouped under a parent:
    // `count` children each carrying honest weight `weight`.
    struct HonestRun {
        std::uint32_t parent;
        std::uint64_t count;
        double weight;
    };
    struct Level {
        std::vector<HonestRun> runs;
        std::unordered_map<std::uint32_t, double> attacker_child_weight;
    };

    Level summarize(int child_bits, int parent_bits) const;
    std::unordered_map<std::uint32_t, double> occupancy(const Level& level, double honest) const;

    std::uint64_t q_ = 0;
    std::uint64_t honest_total_ = 0;
    std::size_t attacker_blocks_ = 0;
    std::vector<IpBlock> honest_blocks_;
    std::vector<std::uint64_t> honest_cumulative_;
    // Attacker active addresses per /24, /16 and /8 prefix.
    std::unordered_map<std::uint32_t, double> a24_;
    std::unordered_map<std::uint32_t, double> a16_;
    std::unordered_map<std::uint32_t, double> a8_;
    // Number of attacker children per attacker prefix.
    std::unordered_map<std::uint32_t, std::uint32_t> a24_per16_;
    std::unordered_map<std::uint32_t, std::uint32_t> a16_per8_;
    // Summaries for flat grouping (parent = root) and for the hierarchical descent.
    Level flat8_, flat16_, flat24_;
    Level tree16_, tree24_;
};

PowerEstimate attacker_power(const IpBlockTable& table, std::uint32_t attacker_asn, double honest,
                             const RankingFunction& ranking, const PowerOptions& options = {});

/// Fraction of fresh seeds for which the rank argmin over both populations is correct.
double botnet_selection_prob(const std::vector<NodeId>& correct, const std::vector<NodeId>& byzantine,
                             const RankingFunction& ranking, int trials, std::uint64_t seed = 1);

} // namespace basalt
