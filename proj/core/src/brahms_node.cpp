#include "basalt/brahms_node.hpp"

#include <algorithm>
#include <cmath>

#include "basalt/error.hpp"

namespace basalt {

void BrahmsParams::validate() const {
    if (view_size < 1) throw ConfigError("Brahms view size must be at least 1");
    if (!(alpha > 0.0) || !(beta > 0.0) || !(gamma > 0.0)) throw ConfigError("Brahms alpha, beta, gamma must be > 0");
    if (std::abs(alpha + beta + gamma - 1.0) > 1e-9) throw ConfigError("Brahms alpha + beta + gamma must equal 1");
    if (push_fanout < 0 || pull_fanout < 0) throw ConfigError("Brahms fanouts must be >= 0");
    ProtocolParams schedule;
    schedule.view_size = view_size;
    schedule.exchange_interval = exchange_interval;
    schedule.sampling_rate = sampling_rate;
    schedule.replacement_count = replacement_count;
    schedule.validate();
    if (sampler_slots() < 0) throw ConfigError("Brahms view sections exceed the view size");
}

Tick BrahmsParams::sampling_period() const {
    return static_cast<Tick>(std::llround(replacement_count / sampling_rate));
}

int BrahmsParams::push_slots() const { return static_cast<int>(std::lround(alpha * view_size)); }
int BrahmsParams::pull_slots() const { return static_cast<int>(std::lround(beta * view_size)); }
int BrahmsParams::effective_push_limit() const { return push_limit >= 0 ? push_limit : push_slots(); }

void MinWiseSampler::reset(const Seed& seed) {
    seed_ = seed;
    key_ = derive_key(seed, 32);
    element_.reset();
    best_ = 0;
}

void MinWiseSampler::offer(NodeId p) {
    const std::uint64_t h = keyed_hash(key_, p.addr);
    if (!element_ || h < best_) {
        best_ = h;
        element_ = p;
    }
}

void MinWiseSampler::offer(std::span<const NodeId> ids) {
    std::vector<std::uint64_t> premixed(ids.size());
    for (std::size_t j = 0; j < ids.size(); ++j) premixed[j] = premix(key_.salt, ids[j].addr);
    offer(ids, premixed);
}

void MinWiseSampler::offer(std::span<const NodeId> ids, std::span<const std::uint64_t> premixed) {
    if (ids.empty()) return;
    std::uint64_t low = finish(key_.key, premixed[0]);
    std::size_t at = 0;
    for (std::size_t j = 1; j < ids.size(); ++j) {
        const std::uint64_t h = finish(key_.key, premixed[j]);
        if (h < low) {
            low = h;
            at = j;
        }
    }
    if (!element_ || low < best_) {
        best_ = low;
        element_ = ids[at];
    }
}

BrahmsNode::BrahmsNode(NodeId self, BrahmsParams params, std::span<const NodeId> bootstrap, std::uint64_t rng_seed)
    : self_(self), params_(params), rng_(rng_seed) {
    params_.validate();
    sampling_period_ = params_.sampling_period();

    std::vector<NodeId> usable;
    for (NodeId p : bootstrap) {
        if (p != self_) usable.push_back(p);
    }
    if (usable.empty()) throw ConfigError("bootstrap list must contain at least one peer other than the node itself");

    const auto v = static_cast<std::size_t>(params_.view_size);
    samplers_.resize(v);
    for (auto& s : samplers_) s.reset(random_seed(rng_));

    if (usable.size() >= v) {
        std::vector<NodeId> pool = usable;
        std::shuffle(pool.begin(), pool.end(), rng_);
        view_.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(v));
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
        view_.resize(v);
        for (auto& slot : view_) slot = usable[pick(rng_)];
    }
    offer_all(usable);
}

void BrahmsNode::offer_all(std::span<const NodeId> ids) {
    if (ids.empty()) return;
    const std::uint64_t salt = domain_salt(32);
    premixed_.resize(ids.size());
    for (std::size_t j = 0; j < ids.size(); ++j) premixed_[j] = premix(salt, ids[j].addr);
    for (auto& s : samplers_) s.offer(ids, premixed_);
}

void BrahmsNode::fill_section(std::size_t begin, std::size_t count, std::span<const NodeId> source) {
    if (source.empty()) return;
    std::uniform_int_distribution<std::size_t> pick(0, source.size() - 1);
    for (std::size_t i = 0; i < count; ++i) view_[begin + i] = source[pick(rng_)];
}

BrahmsRound BrahmsNode::round(std::span<const NodeId> pushes, std::span<const NodeId> pulls, bool sample) {
    BrahmsRound out;
    const auto push_n = static_cast<std::size_t>(params_.push_slots());
    const auto pull_n = static_cast<std::size_t>(params_.pull_slots());
    const auto samp_n = static_cast<std::size_t>(params_.sampler_slots());

    if (pushes.size() <= static_cast<std::size_t>(params_.effective_push_limit())) {
        fill_section(0, push_n, pushes);
        fill_section(push_n, pull_n, pulls);
        scratch_.clear();
        for (const auto& s : samplers_) {
            if (s.element()) scratch_.push_back(*s.element());
        }
        fill_section(push_n + pull_n, samp_n, scratch_);
        out.view_updated = true;
    }

    offer_all(pushes);
    offer_all(pulls);

    if (sample) out.samples = emit_samples();
    return out;
}

std::vector<NodeId> BrahmsNode::emit_samples() {
    std::vector<NodeId> samples;
    const std::size_t v = samplers_.size();
    for (int j = 0; j < params_.replacement_count; ++j) {
        MinWiseSampler& s = samplers_[cursor_];
        if (s.element()) samples.push_back(*s.element());
        s.reset(random_seed(rng_));
        s.offer(std::span<const NodeId>(view_));
        cursor_ = (cursor_ + 1) % v;
    }
    return samples;
}

NodeId BrahmsNode::random_view_member() {
    std::uniform_int_distribution<std::size_t> pick(0, view_.size() - 1);
    return view_[pick(rng_)];
}

TickOutput BrahmsNode::on_tick(Tick now) {
    TickOutput out;
    const bool exchange = now % params_.exchange_interval == 0;
    const bool sample = now % sampling_period_ == 0;
    if (exchange) {
        BrahmsRound r = round(push_buffer_, pull_buffer_, sample);
        out.samples = std::move(r.samples);
        push_buffer_.clear();
        pull_buffer_.clear();
        for (int i = 0; i < params_.push_fanout; ++i) {
            out.messages.emplace_back(PushMessage{self_, random_view_member(), {}, false});
        }
        for (int i = 0; i < params_.pull_fanout; ++i) {
            out.messages.emplace_back(PullRequest{self_, random_view_member()});
        }
    } else if (sample) {
        out.samples = emit_samples();
    }
    return out;
}

PushMessage BrahmsNode::on_pull(NodeId from) const { return PushMessage{self_, from, view_, true}; }

void BrahmsNode::on_push(const PushMessage& msg) {
    if (msg.reply) {
        const std::size_t keep = std::min(msg.peers.size(), view_.size());
        for (std::size_t i = 0; i < keep; ++i) {
            if (msg.peers[i] != self_) pull_buffer_.push_back(msg.peers[i]);
        }
    } else if (msg.from != self_) {
        push_buffer_.push_back(msg.from);
    }
}

} // namespace basalt
