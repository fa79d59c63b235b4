#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "basalt/keyed_hash.hpp"
#include "basalt/node_id.hpp"

namespace basalt {

inline constexpr int kMaxRankWidth = 4;

/// Lexicographically ordered tuple of 1 to 4 hash words.
struct RankVector {
    std::array<std::uint64_t, kMaxRankWidth> words{};
    std::uint8_t size = 0;

    friend std::strong_ordering operator<=>(const RankVector& a, const RankVector& b) {
        const int n = a.size < b.size ? a.size : b.size;
        for (int i = 0; i < n; ++i) {
            if (a.words[i] != b.words[i]) return a.words[i] <=> b.words[i];
        }
        return a.size <=> b.size;
    }
    friend bool operator==(const RankVector& a, const RankVector& b) { return (a <=> b) == 0; }
};

/// Maps an identifier to a group value for grouped ranking. `domain` separates
/// the hash of this extractor from every other level; values 8, 16, 24 and 32
/// are reserved for the built-in prefix levels.
struct GroupExtractor {
    std::string name;
    std::uint8_t domain = 0;
    std::function<std::uint64_t(NodeId)> group;
};

/// A seed together with the per-level hash keys derived from it.
struct PreparedSeed {
    Seed seed;
    std::array<HashKey, kMaxRankWidth> keys{};
};

enum class RankingKind { Uniform, Grouped, Hierarchical };

class RankingFunction {
public:
    /// ⟨h(s, p)⟩
    static RankingFunction uniform();
    /// ⟨h(s, prefix_bits(p)), h(s, p)⟩ for bits in {8, 16, 24}.
    static RankingFunction grouped_by_prefix(int bits);
    /// ⟨h(s, G(p)), h(s, p)⟩ for a caller-supplied extractor G.
    static RankingFunction grouped(GroupExtractor extractor);
    /// ⟨h(s, p/8), h(s, p/16), h(s, p/24), h(s, p)⟩
    static RankingFunction hierarchical();

    RankingKind kind() const { return kind_; }
    int width() const { return static_cast<int>(levels_.size()); }
    const std::string& name() const { return name_; }

    /// Prefix length of level `i`, or -1 for a custom extractor level.
    int level_bits(int i) const { return levels_[static_cast<std::size_t>(i)].bits; }

    PreparedSeed prepare(const Seed& seed) const;

    std::uint64_t operand(int level, NodeId p) const {
        const Level& l = levels_[static_cast<std::size_t>(level)];
        return l.bits >= 0 ? p.prefix(l.bits) : l.extract(p);
    }

    std::uint64_t word(const PreparedSeed& s, int level, NodeId p) const {
        return keyed_hash(s.keys[static_cast<std::size_t>(level)], operand(level, p));
    }

    RankVector rank(const PreparedSeed& s, NodeId p) const;

    /// True iff p ranks strictly before q under s, ties broken on the address.
    /// Stops hashing at the first differing word.
    bool precedes(const PreparedSeed& s, NodeId p, NodeId q) const;

private:
    struct Level {
        std::uint8_t domain = 32;
        int bits = 32;
        std::function<std::uint64_t(NodeId)> extract;
    };

    RankingFunction(RankingKind kind, std::string name, std::vector<Level> levels)
        : kind_(kind), name_(std::move(name)), levels_(std::move(levels)) {}

    RankingKind kind_;
    std::string name_;
    std::vector<Level> levels_;
};

RankVector rank(const RankingFunction& fn, const Seed& s, NodeId p);

/// p better matches s than q.
bool better(const RankingFunction& fn, const Seed& s, NodeId p, NodeId q);

/// Parses "uniform", "hierarchical", "grouped8", "grouped16" or "grouped24".
RankingFunction parse_ranking(const std::string& name);

} // namespace basalt
