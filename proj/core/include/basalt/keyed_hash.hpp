#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace basalt {

using Rng = std::mt19937_64;

/// A 256-bit ranking seed. Only ever drawn from a simulation-owned `Rng`.
struct Seed {
    std::array<std::uint64_t, 4> words{};

    friend bool operator==(const Seed&, const Seed&) = default;
};

inline Seed random_seed(Rng& rng) { return Seed{{rng(), rng(), rng(), rng()}}; }

/// Final mixing step of MurmurHash3 (64-bit). A bijection on 64-bit words.
constexpr std::uint64_t fmix64(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

/// splitmix64 output function applied to `x` (state increment included).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Per-(seed, domain) key of the ranking hash. `salt` depends on the domain
/// only, `key` on the whole seed and the domain.
struct HashKey {
    std::uint64_t salt = 0;
    std::uint64_t key = 0;
};

/// Seed-independent pre-mixing of an operand: fmix64(operand ^ domain salt).
std::uint64_t domain_salt(std::uint8_t domain);

/// Compresses the full 256-bit seed and a domain-separation byte into a key.
HashKey derive_key(const Seed& seed, std::uint8_t domain);

constexpr std::uint64_t premix(std::uint64_t salt, std::uint64_t operand) { return fmix64(operand ^ salt); }

/// Second round, applied to a premixed operand.
constexpr std::uint64_t finish(std::uint64_t key, std::uint64_t premixed) { return fmix64(premixed ^ key); }

/// The ranking hash h(<seed, operand>) for a prepared key. For a fixed key this
/// is a bijection on 64-bit operands, so two distinct operands never tie.
constexpr std::uint64_t keyed_hash(HashKey k, std::uint64_t operand) { return finish(k.key, premix(k.salt, operand)); }

inline std::uint64_t keyed_hash(const Seed& seed, std::uint8_t domain, std::uint64_t operand) {
    return keyed_hash(derive_key(seed, domain), operand);
}

} // namespace basalt
