#include "basalt/node_id.hpp"

#include <charconv>

namespace basalt {

std::string format_ipv4(std::uint32_t addr) {
    std::string out;
    out.reserve(15);
    for (int shift = 24; shift >= 0; shift -= 8) {
        out += std::to_string((addr >> shift) & 0xffu);
        if (shift != 0) out += '.';
    }
    return out;
}

std::optional<std::uint32_t> parse_ipv4(std::string_view text) {
    std::uint32_t addr = 0;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int octet = 0; octet < 4; ++octet) {
        if (octet != 0) {
            if (p == end || *p != '.') return std::nullopt;
            ++p;
        }
        unsigned value = 0;
        auto [next, ec] = std::from_chars(p, end, value);
        if (ec != std::errc{} || next == p || next - p > 3 || value > 255) return std::nullopt;
        addr = (addr << 8) | value;
        p = next;
    }
    if (p != end) return std::nullopt;
    return addr;
}

} // namespace basalt
