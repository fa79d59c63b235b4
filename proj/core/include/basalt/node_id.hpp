#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace basalt {

using Tick = std::uint64_t;

enum class Role : std::uint8_t { Correct, Byzantine };

/// Identity of a node, i.e. its IPv4 address.
///
/// `role` is simulation metadata used for measurements only. It takes no part in
/// equality, ordering or hashing, and protocol code never reads it.
struct NodeId {
    std::uint32_t addr = 0;
    Role role = Role::Correct;

    constexpr NodeId() = default;
    constexpr explicit NodeId(std::uint32_t a, Role r = Role::Correct) : addr(a), role(r) {}

    constexpr bool byzantine() const { return role == Role::Byzantine; }

    /// The `bits` most significant bits of the address, right aligned.
    constexpr std::uint32_t prefix(int bits) const {
        if (bits <= 0) return 0;
        if (bits >= 32) return addr;
        return addr >> (32 - bits);
    }

    friend constexpr bool operator==(NodeId a, NodeId b) { return a.addr == b.addr; }
    friend constexpr std::strong_ordering operator<=>(NodeId a, NodeId b) { return a.addr <=> b.addr; }
};

std::string format_ipv4(std::uint32_t addr);
std::optional<std::uint32_t> parse_ipv4(std::string_view text);

inline std::string to_string(NodeId id) { return format_ipv4(id.addr); }

} // namespace basalt

template <>
struct std::hash<basalt::NodeId> {
    std::size_t operator()(basalt::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.addr); }
};
