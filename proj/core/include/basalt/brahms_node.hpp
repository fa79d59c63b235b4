#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "basalt/basalt_node.hpp"
#include "basalt/keyed_hash.hpp"
#include "basalt/messages.hpp"
#include "basalt/node_id.hpp"
#include "basalt/ranking.hpp"

namespace basalt {

struct BrahmsParams {
    int view_size = 100;
    double alpha = 0.45;  // share of the view rebuilt from pushed ids
    double beta = 0.45;   // from pulled ids
    double gamma = 0.10;  // from samplers
    Tick exchange_interval = 1;
    double sampling_rate = 1.0;
    int replacement_count = 50;
    int push_fanout = 1;
    int pull_fanout = 1;
    /// Rounds with more pushes than this leave the view untouched. Negative means alpha * v.
    int push_limit = -1;

    void validate() const;
    Tick sampling_period() const;
    int push_slots() const;
    int pull_slots() const;
    int sampler_slots() const { return view_size - push_slots() - pull_slots(); }
    int effective_push_limit() const;
};

/// Keeps the id with the smallest uniform rank seen since the last reset.
class MinWiseSampler {
public:
    MinWiseSampler() = default;
    explicit MinWiseSampler(const Seed& seed) { reset(seed); }

    void reset(const Seed& seed);
    void offer(NodeId p);
    void offer(std::span<const NodeId> ids);
    /// As offer(ids), with `premixed[j]` = premix(salt, ids[j].addr) computed by the caller.
    void offer(std::span<const NodeId> ids, std::span<const std::uint64_t> premixed);

    const std::optional<NodeId>& element() const { return element_; }
    const Seed& seed() const { return seed_; }

private:
    Seed seed_;
    HashKey key_;
    std::uint64_t best_ = 0;
    std::optional<NodeId> element_;
};

struct BrahmsRound {
    bool view_updated = false;
    std::vector<NodeId> samples;
};

/// Brahms with round-robin sampler resets.
class BrahmsNode {
public:
    BrahmsNode(NodeId self, BrahmsParams params, std::span<const NodeId> bootstrap, std::uint64_t rng_seed);

    NodeId id() const { return self_; }
    const BrahmsParams& params() const { return params_; }

    /// One exchange round on explicit buffers: rebuilds the view unless the push
    /// limit is exceeded, offers every received id to the samplers and, when
    /// `sample` is set, emits and resets the next k samplers.
    BrahmsRound round(std::span<const NodeId> pushes, std::span<const NodeId> pulls, bool sample);

    /// Runs a round on the buffered messages when due, then sends pushes and pulls.
    TickOutput on_tick(Tick now);
    PushMessage on_pull(NodeId from) const;
    /// Push requests contribute their sender, pull replies their first v ids.
    void on_push(const PushMessage& msg);

    const std::vector<NodeId>& view() const { return view_; }
    const std::vector<MinWiseSampler>& samplers() const { return samplers_; }
    std::size_t cursor() const { return cursor_; }

private:
    void offer_all(std::span<const NodeId> ids);
    void fill_section(std::size_t begin, std::size_t count, std::span<const NodeId> source);
    std::vector<NodeId> emit_samples();
    NodeId random_view_member();

    NodeId self_;
    BrahmsParams params_;
    Rng rng_;
    Tick sampling_period_;
    std::size_t cursor_ = 0;
    std::vector<NodeId> view_;
    std::vector<MinWiseSampler> samplers_;
    std::vector<NodeId> push_buffer_;
    std::vector<NodeId> pull_buffer_;
    std::vector<NodeId> scratch_;
    std::vector<std::uint64_t> premixed_;
};

} // namespace basalt
