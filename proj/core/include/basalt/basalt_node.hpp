#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "basalt/keyed_hash.hpp"
#include "basalt/messages.hpp"
#include "basalt/node_id.hpp"
#include "basalt/ranking.hpp"

namespace basalt {

enum class Mode { Full, Simple };

struct ProtocolParams {
    int view_size = 100;          // v
    Tick exchange_interval = 1;   // tau, in ticks
    double sampling_rate = 1.0;   // rho, samples per tick
    int replacement_count = 50;   // k
    Mode mode = Mode::Full;

    /// Throws ConfigError unless 1 <= k <= v, rho > 0, tau >= 1 and k/rho is a
    /// whole number of ticks divisible by tau.
    void validate() const;

    /// k/rho in ticks. Requires validate() to pass.
    Tick sampling_period() const;
};

struct ViewSlot {
    Seed seed;
    std::optional<NodeId> peer;
    std::uint64_t hits = 0;
};

/// Receives every candidate list presented to the slots and every seed reset.
/// Used for measurement only.
class SlotObserver {
public:
    virtual ~SlotObserver() = default;
    virtual void on_presented(std::span<const NodeId> candidates) = 0;
    virtual void on_reset(std::size_t slot) = 0;
};

struct TickOutput {
    std::vector<Message> messages;
    std::vector<NodeId> samples;
};

/// One correct node running the stubborn chaotic search with hit counters
/// (Mode::Full) or without them (Mode::Simple).
class BasaltNode {
public:
    /// Draws v fresh seeds from a generator seeded with `rng_seed` and feeds
    /// `bootstrap` to every slot. Throws ConfigError if no bootstrap peer other
    /// than `self` is given.
    BasaltNode(NodeId self, ProtocolParams params, RankingFunction ranking, std::span<const NodeId> bootstrap,
               std::uint64_t rng_seed);

    NodeId id() const { return self_; }
    const ProtocolParams& params() const { return params_; }
    const RankingFunction& ranking() const { return ranking_; }

    /// Presents candidates to every slot. Occurrences of the node's own id are ignored.
    void update_sample(std::span<const NodeId> candidates);

    /// Returns the peer of a slot with the fewest hits and increments that slot's
    /// counter. In Mode::Simple, a uniformly random slot without counter change.
    NodeId select_peer();

    TickOutput on_tick(Tick now);
    PushMessage on_pull(NodeId from) const;
    /// Keeps at most v of `msg.peers`, then presents them with the sender appended.
    void on_push(const PushMessage& msg);

    /// Draws a new seed for slot i. The current peer stays and is re-ranked under it.
    void reset_slot(std::size_t i);

    std::size_t size() const { return peers_.size(); }
    ViewSlot slot(std::size_t i) const;
    NodeId peer(std::size_t i) const { return peers_[i]; }
    std::uint64_t hits(std::size_t i) const { return hits_[i]; }
    const std::vector<NodeId>& view() const { return peers_; }
    /// Slot index of the next sample, 0-based.
    std::size_t cursor() const { return cursor_; }

    void set_observer(SlotObserver* observer) { observer_ = observer; }

private:
    void update_uniform(std::span<const NodeId> candidates);
    void update_generic(std::span<const NodeId> candidates);
    void install(std::size_t i, NodeId p);

    NodeId self_;
    ProtocolParams params_;
    RankingFunction ranking_;
    Rng rng_;
    Tick sampling_period_;
    std::size_t cursor_ = 0;
    SlotObserver* observer_ = nullptr;

    std::vector<PreparedSeed> seeds_;
    std::vector<NodeId> peers_;
    std::vector<std::uint64_t> hits_;  // 0 marks an empty slot
    // best_[i * width + l] is word l of the current peer's rank under slot i's seed.
    std::vector<std::uint64_t> best_;
    // Uniform ranking keys laid out contiguously for the vectorised loop.
    std::vector<std::uint64_t> keys_;
    std::uint64_t salt_ = 0;
    // Address in the low 32 bits, role above, so the loop runs on 64-bit lanes only.
    std::vector<std::uint64_t> packed_;
    std::vector<NodeId> scratch_;
};

} // namespace basalt
