#include "basalt/ranking.hpp"

#include "basalt/error.hpp"

namespace basalt {

namespace {
bool reserved_domain(std::uint8_t d) { return d == 8 || d == 16 || d == 24 || d == 32; }
} // namespace

RankingFunction RankingFunction::uniform() {
    return RankingFunction(RankingKind::Uniform, "uniform", {Level{32, 32, {}}});
}

RankingFunction RankingFunction::grouped_by_prefix(int bits) {
    if (bits != 8 && bits != 16 && bits != 24) {
        throw ConfigError("grouped ranking prefix must be 8, 16 or 24 bits, got " + std::to_string(bits));
    }
    const auto d = static_cast<std::uint8_t>(bits);
    return RankingFunction(RankingKind::Grouped, "grouped" + std::to_string(bits),
                           {Level{d, bits, {}}, Level{32, 32, {}}});
}

RankingFunction RankingFunction::grouped(GroupExtractor extractor) {
    if (!extractor.group) throw ConfigError("group extractor '" + extractor.name + "' has no function");
    if (reserved_domain(extractor.domain)) {
        throw ConfigError("group extractor domain " + std::to_string(extractor.domain) + " is reserved");
    }
    return RankingFunction(RankingKind::Grouped, "grouped:" + extractor.name,
                           {Level{extractor.domain, -1, std::move(extractor.group)}, Level{32, 32, {}}});
}

RankingFunction RankingFunction::hierarchical() {
    return RankingFunction(RankingKind::Hierarchical, "hierarchical",
                           {Level{8, 8, {}}, Level{16, 16, {}}, Level{24, 24, {}}, Level{32, 32, {}}});
}

PreparedSeed RankingFunction::prepare(const Seed& seed) const {
    PreparedSeed ps;
    ps.seed = seed;
    for (std::size_t i = 0; i < levels_.size(); ++i) ps.keys[i] = derive_key(seed, levels_[i].domain);
    return ps;
}

RankVector RankingFunction::rank(const PreparedSeed& s, NodeId p) const {
    RankVector r;
    r.size = static_cast<std::uint8_t>(levels_.size());
    for (int i = 0; i < width(); ++i) r.words[static_cast<std::size_t>(i)] = word(s, i, p);
    return r;
}

bool RankingFunction::precedes(const PreparedSeed& s, NodeId p, NodeId q) const {
    if (p == q) return false;
    for (int i = 0; i < width(); ++i) {
        const std::uint64_t a = operand(i, p);
        const std::uint64_t b = operand(i, q);
        if (a == b) continue;
        const HashKey key = s.keys[static_cast<std::size_t>(i)];
        return keyed_hash(key, a) < keyed_hash(key, b);
    }
    return p.addr < q.addr;
}

RankVector rank(const RankingFunction& fn, const Seed& s, NodeId p) { return fn.rank(fn.prepare(s), p); }

bool better(const RankingFunction& fn, const Seed& s, NodeId p, NodeId q) {
    return fn.precedes(fn.prepare(s), p, q);
}

RankingFunction parse_ranking(const std::string& name) {
    if (name == "uniform") return RankingFunction::uniform();
    if (name == "hierarchical") return RankingFunction::hierarchical();
    if (name == "grouped8") return RankingFunction::grouped_by_prefix(8);
    if (name == "grouped16") return RankingFunction::grouped_by_prefix(16);
    if (name == "grouped24") return RankingFunction::grouped_by_prefix(24);
    throw ConfigError("unknown ranking '" + name + "'");
}

} // namespace basalt
