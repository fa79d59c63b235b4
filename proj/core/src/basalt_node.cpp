#include "basalt/basalt_node.hpp"

#include <cmath>
#include <limits>

#include "basalt/error.hpp"

namespace basalt {

namespace {

std::uint64_t pack(NodeId p) { return std::uint64_t{p.addr} | (std::uint64_t{static_cast<std::uint8_t>(p.role)} << 32); }

NodeId unpack(std::uint64_t x) {
    return NodeId(static_cast<std::uint32_t>(x), static_cast<Role>(static_cast<std::uint8_t>(x >> 32)));
}

} // namespace

void ProtocolParams::validate() const {
    if (view_size < 1) throw ConfigError("view size v must be at least 1");
    if (replacement_count < 1 || replacement_count > view_size) {
        throw ConfigError("replacement count k must lie in [1, v]");
    }
    if (!(sampling_rate > 0.0) || !std::isfinite(sampling_rate)) throw ConfigError("sampling rate rho must be > 0");
    if (exchange_interval < 1) throw ConfigError("exchange interval tau must be at least one tick");
    const double period = replacement_count / sampling_rate;
    const double rounded = std::round(period);
    if (rounded < 1.0 || std::abs(period - rounded) > 1e-9 * std::max(1.0, period)) {
        throw ConfigError("k/rho = " + std::to_string(period) + " is not a whole number of ticks");
    }
    if (static_cast<Tick>(rounded) % exchange_interval != 0) {
        throw ConfigError("k/rho must be a multiple of tau");
    }
}

Tick ProtocolParams::sampling_period() const {
    return static_cast<Tick>(std::llround(replacement_count / sampling_rate));
}

BasaltNode::BasaltNode(NodeId self, ProtocolParams params, RankingFunction ranking,
                       std::span<const NodeId> bootstrap, std::uint64_t rng_seed)
    : self_(self), params_(params), ranking_(std::move(ranking)), rng_(rng_seed) {
    params_.validate();
    sampling_period_ = params_.sampling_period();

    bool usable = false;
    for (NodeId p : bootstrap) usable = usable || p != self_;
    if (!usable) throw ConfigError("bootstrap list must contain at least one peer other than the node itself");

    const auto v = static_cast<std::size_t>(params_.view_size);
    const auto w = static_cast<std::size_t>(ranking_.width());
    seeds_.resize(v);
    peers_.assign(v, NodeId{});
    hits_.assign(v, 0);
    best_.assign(v * w, 0);
    packed_.assign(v, 0);
    keys_.assign(v, 0);
    for (std::size_t i = 0; i < v; ++i) {
        seeds_[i] = ranking_.prepare(random_seed(rng_));
        keys_[i] = seeds_[i].keys[0].key;
    }
    salt_ = seeds_[0].keys[0].salt;
    update_sample(bootstrap);
}

void BasaltNode::update_sample(std::span<const NodeId> candidates) {
    if (observer_ != nullptr) observer_->on_presented(candidates);
    if (ranking_.kind() == RankingKind::Uniform) {
        update_uniform(candidates);
    } else {
        update_generic(candidates);
    }
}

void BasaltNode::update_uniform(std::span<const NodeId> candidates) {
    const std::size_t v = peers_.size();
    const std::uint64_t inc = params_.mode == Mode::Full ? 1 : 0;
    std::uint64_t* __restrict best = best_.data();
    std::uint64_t* __restrict hits = hits_.data();
    std::uint64_t* __restrict packed = packed_.data();
    const std::uint64_t* __restrict keys = keys_.data();
    bool changed = false;

    for (NodeId c : candidates) {
        if (c == self_) continue;
        const std::uint64_t g = premix(salt_, c.addr);
        const std::uint64_t pc = pack(c);
        std::uint64_t installs = 0;
        for (std::size_t i = 0; i < v; ++i) {
            const std::uint64_t h = finish(keys[i], g);
            const std::uint64_t hi = hits[i];
            const bool empty = hi == 0;
            const bool same = !empty && packed[i] == pc;
            const bool lt = empty || h < best[i];
            best[i] = lt ? h : best[i];
            packed[i] = lt ? pc : packed[i];
            hits[i] = lt ? 1 : hi + (same ? inc : 0);
            installs += lt ? 1 : 0;
        }
        changed = changed || installs != 0;
    }
    if (changed) {
        for (std::size_t i = 0; i < v; ++i) peers_[i] = unpack(packed_[i]);
    }
}

void BasaltNode::update_generic(std::span<const NodeId> candidates) {
    const std::size_t v = peers_.size();
    const int w = ranking_.width();
    std::array<std::uint64_t, kMaxRankWidth> ops{};
    for (NodeId c : candidates) {
        if (c == self_) continue;
        for (int l = 0; l < w; ++l) {
            const auto li = static_cast<std::size_t>(l);
            ops[li] = premix(seeds_[0].keys[li].salt, ranking_.operand(l, c));
        }
        for (std::size_t i = 0; i < v; ++i) {
            if (hits_[i] == 0) {
                install(i, c);
                continue;
            }
            if (peers_[i] == c) {
                if (params_.mode == Mode::Full) ++hits_[i];
                continue;
            }
            const std::uint64_t* b = &best_[i * static_cast<std::size_t>(w)];
            bool lt = c.addr < peers_[i].addr;
            for (int l = 0; l < w; ++l) {
                const auto li = static_cast<std::size_t>(l);
                const std::uint64_t h = finish(seeds_[i].keys[li].key, ops[li]);
                if (h != b[l]) {
                    lt = h < b[l];
                    break;
                }
            }
            if (lt) install(i, c);
        }
    }
}

void BasaltNode::install(std::size_t i, NodeId p) {
    peers_[i] = p;
    packed_[i] = pack(p);
    hits_[i] = 1;
    const int w = ranking_.width();
    for (int l = 0; l < w; ++l) best_[i * static_cast<std::size_t>(w) + static_cast<std::size_t>(l)] = ranking_.word(seeds_[i], l, p);
}

NodeId BasaltNode::select_peer() {
    const std::size_t v = peers_.size();
    if (params_.mode == Mode::Simple) {
        std::size_t filled = 0;
        for (std::size_t i = 0; i < v; ++i) filled += hits_[i] != 0 ? 1 : 0;
        if (filled == 0) throw ProtocolError("selectPeer on an empty view");
        std::uniform_int_distribution<std::size_t> pick(0, filled - 1);
        std::size_t target = pick(rng_);
        for (std::size_t i = 0; i < v; ++i) {
            if (hits_[i] == 0) continue;
            if (target-- == 0) return peers_[i];
        }
    }
    std::uint64_t lowest = std::numeric_limits<std::uint64_t>::max();
    std::size_t ties = 0;
    for (std::size_t i = 0; i < v; ++i) {
        if (hits_[i] == 0) continue;
        if (hits_[i] < lowest) {
            lowest = hits_[i];
            ties = 1;
        } else if (hits_[i] == lowest) {
            ++ties;
        }
    }
    if (ties == 0) throw ProtocolError("selectPeer on an empty view");
    std::size_t target = ties == 1 ? 0 : std::uniform_int_distribution<std::size_t>(0, ties - 1)(rng_);
    for (std::size_t i = 0; i < v; ++i) {
        if (hits_[i] != lowest) continue;
        if (target-- == 0) {
            ++hits_[i];
            return peers_[i];
        }
    }
    throw ProtocolError("selectPeer: inconsistent hit counters");
}

void BasaltNode::reset_slot(std::size_t i) {
    seeds_[i] = ranking_.prepare(random_seed(rng_));
    keys_[i] = seeds_[i].keys[0].key;
    if (hits_[i] != 0) {
        const int w = ranking_.width();
        for (int l = 0; l < w; ++l) {
            best_[i * static_cast<std::size_t>(w) + static_cast<std::size_t>(l)] = ranking_.word(seeds_[i], l, peers_[i]);
        }
    }
    if (observer_ != nullptr) observer_->on_reset(i);
}

TickOutput BasaltNode::on_tick(Tick now) {
    TickOutput out;
    if (now % params_.exchange_interval == 0) {
        const NodeId p = select_peer();
        out.messages.emplace_back(PullRequest{self_, p});
        const NodeId q = select_peer();
        out.messages.emplace_back(PushMessage{self_, q, peers_, false});
    }
    if (now % sampling_period_ == 0) {
        const std::size_t v = peers_.size();
        for (int j = 0; j < params_.replacement_count; ++j) {
            out.samples.push_back(peers_[cursor_]);
            reset_slot(cursor_);
            cursor_ = (cursor_ + 1) % v;
        }
        scratch_ = peers_;
        update_sample(scratch_);
    }
    return out;
}

PushMessage BasaltNode::on_pull(NodeId from) const { return PushMessage{self_, from, peers_, true}; }

void BasaltNode::on_push(const PushMessage& msg) {
    const std::size_t keep = std::min(msg.peers.size(), peers_.size());
    scratch_.assign(msg.peers.begin(), msg.peers.begin() + static_cast<std::ptrdiff_t>(keep));
    scratch_.push_back(msg.from);
    update_sample(scratch_);
}

ViewSlot BasaltNode::slot(std::size_t i) const {
    ViewSlot s;
    s.seed = seeds_[i].seed;
    if (hits_[i] != 0) s.peer = peers_[i];
    s.hits = hits_[i];
    return s;
}

} // namespace basalt
