#include "basalt/keyed_hash.hpp"

namespace basalt {

namespace {
constexpr std::uint64_t kSaltTag = 0x6261736174726b31ULL;
constexpr std::uint64_t kKeyTag = 0x6261736174726b32ULL;
} // namespace

std::uint64_t domain_salt(std::uint8_t domain) { return splitmix64(kSaltTag ^ (std::uint64_t{domain} << 56)); }

HashKey derive_key(const Seed& seed, std::uint8_t domain) {
    std::uint64_t x = splitmix64(kKeyTag ^ domain);
    for (std::uint64_t w : seed.words) x = splitmix64(x ^ w);
    return HashKey{domain_salt(domain), x};
}

} // namespace basalt
