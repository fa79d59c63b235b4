#include "basalt/attacker_power.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "basalt/error.hpp"

namespace basalt {

namespace {

double occupied(double weight, double honest) {
    if (weight <= 0.0) return 0.0;
    if (weight >= 1.0) return 1.0;
    return -std::expm1(honest * std::log1p(-weight));
}

PowerEstimate summarize_trials(const std::vector<double>& xs) {
    PowerEstimate e;
    if (xs.empty()) return e;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    e.power = mean;
    if (xs.size() > 1) {
        var /= static_cast<double>(xs.size() - 1);
        e.std_error = std::sqrt(var / static_cast<double>(xs.size()));
    }
    return e;
}

} // namespace

PowerModel::PowerModel(const IpBlockTable& table, std::uint32_t attacker_asn) {
    for (const IpBlock& b : table.blocks()) {
        if (b.active_count == 0) continue;
        if (b.asn != attacker_asn) {
            honest_blocks_.push_back(b);
            honest_total_ += b.active_count;
            honest_cumulative_.push_back(honest_total_);
            continue;
        }
        q_ += b.active_count;
        ++attacker_blocks_;
        if (b.network.length <= 24) {
            const std::uint64_t n24 = std::uint64_t{1} << (24 - b.network.length);
            const double per = static_cast<double>(b.active_count) / static_cast<double>(n24);
            const std::uint32_t first = b.network.base >> 8;
            for (std::uint64_t i = 0; i < n24; ++i) a24_[first + static_cast<std::uint32_t>(i)] += per;
        } else {
            a24_[b.network.base >> 8] += static_cast<double>(b.active_count);
        }
    }
    if (q_ == 0) throw DomainError("attacker AS " + std::to_string(attacker_asn) + " has no active address in the table");
    if (honest_total_ == 0) throw DomainError("no active address left for honest nodes");

    for (const auto& [z, a] : a24_) {
        const std::uint32_t y = z >> 8;
        if (a16_.find(y) == a16_.end()) ++a16_per8_[y >> 8];
        a16_[y] += a;
        a8_[y >> 8] += a;
        ++a24_per16_[y];
    }
    flat8_ = summarize(8, 0);
    flat16_ = summarize(16, 0);
    flat24_ = summarize(24, 0);
    tree16_ = summarize(16, 8);
    tree24_ = summarize(24, 16);
}

PowerModel::Level PowerModel::summarize(int child_bits, int parent_bits) const {
    const auto& attacker = child_bits == 8 ? a8_ : child_bits == 16 ? a16_ : a24_;
    const auto* parents = parent_bits == 8 ? &a8_ : parent_bits == 16 ? &a16_ : nullptr;
    Level out;
    std::unordered_map<std::uint32_t, double> partial;
    for (const IpBlock& b : honest_blocks_) {
        const int len = b.network.length;
        if (parent_bits > 0 && len <= parent_bits) continue;
        const std::uint32_t parent = parent_bits == 0 ? 0 : b.network.base >> (32 - parent_bits);
        if (parents != nullptr && parents->find(parent) == parents->end()) continue;
        if (len <= child_bits) {
            const std::uint64_t count = std::uint64_t{1} << (child_bits - len);
            out.runs.push_back({parent, count, static_cast<double>(b.active_count) / static_cast<double>(count)});
        } else {
            partial[b.network.base >> (32 - child_bits)] += static_cast<double>(b.active_count);
        }
    }
    for (const auto& [c, w] : partial) {
        if (attacker.find(c) != attacker.end()) {
            out.attacker_child_weight[c] = w;
        } else {
            out.runs.push_back({parent_bits == 0 ? 0 : c >> (child_bits - parent_bits), 1, w});
        }
    }
    return out;
}

std::unordered_map<std::uint32_t, double> PowerModel::occupancy(const Level& level, double honest) const {
    std::unordered_map<std::uint32_t, double> out;
    const double total = static_cast<double>(honest_total_);
    for (const HonestRun& r : level.runs) {
        out[r.parent] += static_cast<double>(r.count) * occupied(r.weight / total, honest);
    }
    return out;
}

double PowerModel::uniform(double honest) const {
    const double q = static_cast<double>(q_);
    return q / (q + honest);
}

double PowerModel::grouped_analytic(int bits, double honest) const {
    const Level& level = bits == 8 ? flat8_ : bits == 16 ? flat16_ : flat24_;
    const auto& attacker = bits == 8 ? a8_ : bits == 16 ? a16_ : a24_;
    const double total = static_cast<double>(honest_total_);
    const auto occ = occupancy(level, honest);
    const double groups = static_cast<double>(attacker.size()) + (occ.empty() ? 0.0 : occ.begin()->second);
    double win = 0.0;
    for (const auto& [g, a] : attacker) {
        const auto it = level.attacker_child_weight.find(g);
        const double h = it == level.attacker_child_weight.end() ? 0.0 : honest * it->second / total;
        win += a / (a + h);
    }
    return win / groups;
}

double PowerModel::hierarchical_analytic(double honest) const {
    const double total = static_cast<double>(honest_total_);
    const auto occ8 = occupancy(flat8_, honest);
    const auto occ16 = occupancy(tree16_, honest);
    const auto occ24 = occupancy(tree24_, honest);
    auto get = [](const std::unordered_map<std::uint32_t, double>& m, std::uint32_t k) {
        const auto it = m.find(k);
        return it == m.end() ? 0.0 : it->second;
    };

    std::unordered_map<std::uint32_t, double> leaf_sum;
    for (const auto& [z, a] : a24_) {
        const double h = honest * get(tree24_.attacker_child_weight, z) / total;
        leaf_sum[z >> 8] += a / (a + h);
    }
    std::unordered_map<std::uint32_t, double> mid_sum;
    for (const auto& [y, s] : leaf_sum) {
        const double children = a24_per16_.at(y) + get(occ24, y);
        mid_sum[y >> 8] += s / children;
    }
    double f = 0.0;
    for (const auto& [x, s] : mid_sum) {
        const double children = a16_per8_.at(x) + get(occ16, x);
        f += s / children;
    }
    const double roots = static_cast<double>(a8_.size()) + get(occ8, 0);
    return f / roots;
}

std::vector<std::uint32_t> PowerModel::place_honest(int honest, Rng& rng) const {
    std::vector<std::uint32_t> out;
    out.reserve(static_cast<std::size_t>(std::max(honest, 0)));
    std::uniform_int_distribution<std::uint64_t> pick(0, honest_total_ - 1);
    for (int i = 0; i < honest; ++i) {
        const std::uint64_t u = pick(rng);
        const auto it = std::upper_bound(honest_cumulative_.begin(), honest_cumulative_.end(), u);
        const IpBlock& b = honest_blocks_[static_cast<std::size_t>(it - honest_cumulative_.begin())];
        const std::uint64_t offset = u - (*it - b.active_count);
        const std::uint64_t scaled = offset * b.network.size() / b.active_count;
        out.push_back(static_cast<std::uint32_t>(b.network.base + scaled));
    }
    return out;
}

double PowerModel::grouped_exact(int bits, const std::vector<std::uint32_t>& honest) const {
    const auto& attacker = bits == 8 ? a8_ : bits == 16 ? a16_ : a24_;
    std::unordered_map<std::uint32_t, double> h;
    for (std::uint32_t addr : honest) h[addr >> (32 - bits)] += 1.0;
    double groups = static_cast<double>(attacker.size());
    double win = static_cast<double>(attacker.size());
    for (const auto& [g, count] : h) {
        const auto it = attacker.find(g);
        if (it == attacker.end()) {
            groups += 1.0;
        } else {
            win -= 1.0 - it->second / (it->second + count);
        }
    }
    return win / groups;
}

double PowerModel::hierarchical_exact(const std::vector<std::uint32_t>& honest) const {
    std::unordered_map<std::uint32_t, double> h24;
    for (std::uint32_t addr : honest) h24[addr >> 8] += 1.0;

    // Per attacker /16: leaf win sum and number of occupied /24 children.
    std::unordered_map<std::uint32_t, std::pair<double, double>> mid;
    std::unordered_set<std::uint32_t> h16;
    std::unordered_set<std::uint32_t> h8;
    for (const auto& [z, count] : h24) {
        const std::uint32_t y = z >> 8;
        h16.insert(y);
        h8.insert(y >> 8);
        if (a16_.find(y) == a16_.end()) continue;
        auto& m = mid.try_emplace(y, static_cast<double>(a24_per16_.at(y)), static_cast<double>(a24_per16_.at(y)))
                      .first->second;
        const auto it = a24_.find(z);
        if (it == a24_.end()) {
            m.second += 1.0;
        } else {
            m.first -= 1.0 - it->second / (it->second + count);
        }
    }
    std::unordered_map<std::uint32_t, double> top_sum;
    std::unordered_map<std::uint32_t, double> top_children;
    for (const auto& [x, n16] : a16_per8_) {
        top_sum[x] = static_cast<double>(n16);
        top_children[x] = static_cast<double>(n16);
    }
    for (const auto& [y, m] : mid) top_sum[y >> 8] += m.first / m.second - 1.0;
    for (std::uint32_t y : h16) {
        const std::uint32_t x = y >> 8;
        if (a8_.find(x) != a8_.end() && a16_.find(y) == a16_.end()) top_children[x] += 1.0;
    }
    double roots = static_cast<double>(a8_.size());
    for (std::uint32_t x : h8) {
        if (a8_.find(x) == a8_.end()) roots += 1.0;
    }
    double f = 0.0;
    for (const auto& [x, s] : top_sum) f += s / top_children[x];
    return f / roots;
}

PowerEstimate PowerModel::grouped_monte_carlo(int bits, int honest, int trials, Rng& rng) const {
    std::vector<double> xs;
    for (int t = 0; t < trials; ++t) xs.push_back(grouped_exact(bits, place_honest(honest, rng)));
    return summarize_trials(xs);
}

PowerEstimate PowerModel::hierarchical_monte_carlo(int honest, int trials, Rng& rng) const {
    std::vector<double> xs;
    for (int t = 0; t < trials; ++t) xs.push_back(hierarchical_exact(place_honest(honest, rng)));
    return summarize_trials(xs);
}

PowerEstimate PowerModel::power(const RankingFunction& ranking, double honest, const PowerOptions& options) const {
    if (!(honest >= 0.0)) throw DomainError("honest node count must be >= 0");
    if (ranking.kind() == RankingKind::Uniform) return {uniform(honest), 0.0};
    const bool mc = options.method == PowerMethod::MonteCarlo;
    if (mc && options.trials < 1) throw ConfigError("Monte-Carlo attacker power needs at least one trial");
    Rng rng(options.seed);
    const int whole = static_cast<int>(std::lround(honest));
    if (ranking.kind() == RankingKind::Hierarchical) {
        return mc ? hierarchical_monte_carlo(whole, options.trials, rng) : PowerEstimate{hierarchical_analytic(honest), 0.0};
    }
    const int bits = ranking.level_bits(0);
    if (bits != 8 && bits != 16 && bits != 24) {
        throw ConfigError("attacker power supports prefix grouping only, not '" + ranking.name() + "'");
    }
    return mc ? grouped_monte_carlo(bits, whole, options.trials, rng) : PowerEstimate{grouped_analytic(bits, honest), 0.0};
}

PowerEstimate attacker_power(const IpBlockTable& table, std::uint32_t attacker_asn, double honest,
                             const RankingFunction& ranking, const PowerOptions& options) {
    return PowerModel(table, attacker_asn).power(ranking, honest, options);
}

double botnet_selection_prob(const std::vector<NodeId>& correct, const std::vector<NodeId>& byzantine,
                             const RankingFunction& ranking, int trials, std::uint64_t seed) {
    if (correct.empty() && byzantine.empty()) throw DomainError("no identifiers to select from");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (byzantine.empty()) return 1.0;
    if (correct.empty()) return 0.0;
    Rng rng(seed);
    std::uint64_t wins = 0;
    for (int t = 0; t < trials; ++t) {
        const PreparedSeed s = ranking.prepare(random_seed(rng));
        RankVector best = ranking.rank(s, correct[0]);
        NodeId arg = correct[0];
        bool arg_correct = true;
        auto consider = [&](NodeId p, bool is_correct) {
            const RankVector r = ranking.rank(s, p);
            const auto cmp = r <=> best;
            if (cmp < 0 || (cmp == 0 && p.addr < arg.addr)) {
                best = r;
                arg = p;
                arg_correct = is_correct;
            }
        };
        for (std::size_t i = 1; i < correct.size(); ++i) consider(correct[i], true);
        for (NodeId p : byzantine) consider(p, false);
        wins += arg_correct ? 1 : 0;
    }
    return static_cast<double>(wins) / static_cast<double>(trials);
}

} // namespace basalt
