#pragma once

#include <cstdint>
#include <vector>

#include "basalt/keyed_hash.hpp"
#include "basalt/messages.hpp"
#include "basalt/node_id.hpp"

namespace basalt {

enum class Strategy { Flood, HitPoison };

struct AttackConfig {
    /// Pushes per Byzantine node per exchange, relative to one correct node's push rate.
    double force = 10.0;
    Strategy strategy = Strategy::Flood;
    /// Correct ids advertised per push under HitPoison.
    int advertised_correct_count = 100;

    void validate() const;
};

/// What a Byzantine push carries. Basalt pushes a view; Brahms pushes identify only their sender.
enum class PushStyle { View, SenderOnly };

/// The coordinated Byzantine population. All attackers share one generator.
class Adversary {
public:
    Adversary(AttackConfig config, std::vector<NodeId> correct, std::vector<NodeId> byzantine, int view_size,
              std::uint64_t rng_seed);

    const AttackConfig& config() const { return config_; }

    /// Reply to a pull: v ids drawn uniformly with replacement from the Byzantine population.
    PushMessage on_pull(NodeId attacker, NodeId from);

    /// Pushes sent by one attacker during one exchange. The number of distinct
    /// correct targets is floor(F * fanout), plus one with the fractional remainder as probability.
    std::vector<Message> on_tick(NodeId attacker, Tick now, PushStyle style, int fanout = 1);

    std::vector<NodeId> byzantine_payload();
    std::vector<NodeId> correct_payload(int count);

private:
    std::vector<std::size_t> distinct_targets(std::size_t count);

    AttackConfig config_;
    std::vector<NodeId> correct_;
    std::vector<NodeId> byzantine_;
    int view_size_;
    Rng rng_;
};

} // namespace basalt
