#include "basalt/adversary.hpp"

#include <algorithm>
#include <cmath>

#include "basalt/error.hpp"

namespace basalt {

void AttackConfig::validate() const {
    if (!(force >= 0.0) || !std::isfinite(force)) throw ConfigError("attack force F must be >= 0");
    if (strategy == Strategy::HitPoison && advertised_correct_count < 0) {
        throw ConfigError("advertised correct count must be >= 0");
    }
}

Adversary::Adversary(AttackConfig config, std::vector<NodeId> correct, std::vector<NodeId> byzantine, int view_size,
                     std::uint64_t rng_seed)
    : config_(config), correct_(std::move(correct)), byzantine_(std::move(byzantine)), view_size_(view_size),
      rng_(rng_seed) {
    config_.validate();
    if (view_size_ < 1) throw ConfigError("view size must be at least 1");
}

std::vector<NodeId> Adversary::byzantine_payload() {
    std::vector<NodeId> out;
    if (byzantine_.empty()) return out;
    out.reserve(static_cast<std::size_t>(view_size_));
    std::uniform_int_distribution<std::size_t> pick(0, byzantine_.size() - 1);
    for (int i = 0; i < view_size_; ++i) out.push_back(byzantine_[pick(rng_)]);
    return out;
}

std::vector<NodeId> Adversary::correct_payload(int count) {
    std::vector<NodeId> out;
    if (correct_.empty() || count <= 0) return out;
    out.reserve(static_cast<std::size_t>(count));
    std::uniform_int_distribution<std::size_t> pick(0, correct_.size() - 1);
    for (int i = 0; i < count; ++i) out.push_back(correct_[pick(rng_)]);
    return out;
}

PushMessage Adversary::on_pull(NodeId attacker, NodeId from) {
    return PushMessage{attacker, from, byzantine_payload(), true};
}

std::vector<std::size_t> Adversary::distinct_targets(std::size_t count) {
    const std::size_t q = correct_.size();
    count = std::min(count, q);
    std::vector<std::size_t> chosen;
    chosen.reserve(count);
    if (count * 4 > q) {
        std::vector<std::size_t> all(q);
        for (std::size_t i = 0; i < q; ++i) all[i] = i;
        for (std::size_t i = 0; i < count; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, q - 1);
            std::swap(all[i], all[pick(rng_)]);
            chosen.push_back(all[i]);
        }
        return chosen;
    }
    std::uniform_int_distribution<std::size_t> pick(0, q - 1);
    while (chosen.size() < count) {
        const std::size_t t = pick(rng_);
        if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) chosen.push_back(t);
    }
    return chosen;
}

std::vector<Message> Adversary::on_tick(NodeId attacker, Tick, PushStyle style, int fanout) {
    std::vector<Message> out;
    if (correct_.empty()) return out;
    const double rate = config_.force * fanout;
    const double whole = std::floor(rate);
    auto count = static_cast<std::size_t>(whole);
    if (rate > whole && std::bernoulli_distribution(rate - whole)(rng_)) ++count;

    for (std::size_t t : distinct_targets(count)) {
        PushMessage m{attacker, correct_[t], {}, false};
        if (style == PushStyle::View) {
            m.peers = config_.strategy == Strategy::HitPoison ? correct_payload(config_.advertised_correct_count)
                                                              : byzantine_payload();
        }
        out.emplace_back(std::move(m));
    }
    return out;
}

} // namespace basalt
