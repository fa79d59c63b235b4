#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace basalt {

struct Cidr {
    std::uint32_t base = 0;
    int length = 0;

    std::uint64_t size() const { return std::uint64_t{1} << (32 - length); }
    std::uint64_t end() const { return std::uint64_t{base} + size(); }
    bool contains(std::uint32_t addr) const { return addr >= base && addr < end(); }
};

/// Parses "a.b.c.d/len". Host bits are cleared.
std::optional<Cidr> parse_cidr(std::string_view text);
std::string format_cidr(const Cidr& c);

struct IpBlock {
    Cidr network;
    std::uint32_t asn = 0;
    std::uint64_t active_count = 0;
};

/// Non-overlapping CIDR blocks sorted by base address.
class IpBlockTable {
public:
    IpBlockTable() = default;
    /// Throws DataError on overlapping blocks or active_count above block size.
    explicit IpBlockTable(std::vector<IpBlock> blocks);

    /// Reads `network,asn,active_count` rows. DataError names the offending line.
    static IpBlockTable read_csv(std::istream& in);
    static IpBlockTable load_csv(const std::string& path);

    const std::vector<IpBlock>& blocks() const { return blocks_; }
    std::uint64_t active_addresses(std::uint32_t asn) const;
    std::size_t block_count(std::uint32_t asn) const;
    std::uint64_t total_active() const;

    /// ASNs ordered by decreasing active address count (ties by ASN).
    std::vector<std::uint32_t> asns_by_size() const;

private:
    std::vector<IpBlock> blocks_;
};

} // namespace basalt
