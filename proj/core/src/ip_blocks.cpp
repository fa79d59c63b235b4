#include "basalt/ip_blocks.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>

#include "basalt/error.hpp"
#include "basalt/node_id.hpp"

namespace basalt {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
std::optional<T> parse_uint(std::string_view s) {
    T value{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
    return value;
}

} // namespace

std::optional<Cidr> parse_cidr(std::string_view text) {
    const std::size_t slash = text.find('/');
    if (slash == std::string_view::npos) return std::nullopt;
    const auto addr = parse_ipv4(text.substr(0, slash));
    const auto len = parse_uint<int>(text.substr(slash + 1));
    if (!addr || !len || *len < 0 || *len > 32) return std::nullopt;
    Cidr c;
    c.length = *len;
    c.base = c.length == 0 ? 0 : (*addr & ~static_cast<std::uint32_t>((std::uint64_t{1} << (32 - c.length)) - 1));
    return c;
}

std::string format_cidr(const Cidr& c) { return format_ipv4(c.base) + "/" + std::to_string(c.length); }

IpBlockTable::IpBlockTable(std::vector<IpBlock> blocks) : blocks_(std::move(blocks)) {
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (blocks_[i].active_count > blocks_[i].network.size()) {
            throw DataError("active_count exceeds the size of " + format_cidr(blocks_[i].network));
        }
    }
    std::sort(blocks_.begin(), blocks_.end(),
              [](const IpBlock& a, const IpBlock& b) { return a.network.base < b.network.base; });
    for (std::size_t i = 1; i < blocks_.size(); ++i) {
        if (blocks_[i].network.base < blocks_[i - 1].network.end()) {
            throw DataError(format_cidr(blocks_[i].network) + " overlaps " + format_cidr(blocks_[i - 1].network));
        }
    }
}

IpBlockTable IpBlockTable::read_csv(std::istream& in) {
    std::string line;
    std::size_t row = 0;
    bool header = false;
    std::vector<IpBlock> blocks;
    std::vector<std::size_t> rows;
    while (std::getline(in, line)) {
        ++row;
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        const auto fields = split(text);
        if (!header) {
            if (fields.size() != 3 || fields[0] != "network" || fields[1] != "asn" || fields[2] != "active_count") {
                throw DataError("expected header 'network,asn,active_count'", row);
            }
            header = true;
            continue;
        }
        if (fields.size() != 3) throw DataError("expected 3 fields, got " + std::to_string(fields.size()), row);
        const auto net = parse_cidr(fields[0]);
        if (!net) throw DataError("malformed network '" + std::string(fields[0]) + "'", row);
        const auto asn = parse_uint<std::uint32_t>(fields[1]);
        if (!asn) throw DataError("malformed asn '" + std::string(fields[1]) + "'", row);
        const auto active = parse_uint<std::uint64_t>(fields[2]);
        if (!active) throw DataError("malformed active_count '" + std::string(fields[2]) + "'", row);
        if (*active > net->size()) throw DataError("active_count exceeds block size", row);
        blocks.push_back(IpBlock{*net, *asn, *active});
        rows.push_back(row);
    }
    if (!header) throw DataError("empty dataset");

    std::vector<std::size_t> order(blocks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return blocks[a].network.base < blocks[b].network.base; });
    for (std::size_t i = 1; i < order.size(); ++i) {
        const IpBlock& prev = blocks[order[i - 1]];
        const IpBlock& cur = blocks[order[i]];
        if (cur.network.base < prev.network.end()) {
            throw DataError(format_cidr(cur.network) + " overlaps " + format_cidr(prev.network) + " (row " +
                                std::to_string(rows[order[i - 1]]) + ")",
                            rows[order[i]]);
        }
    }
    return IpBlockTable(std::move(blocks));
}

IpBlockTable IpBlockTable::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset '" + path + "'");
    return read_csv(in);
}

std::uint64_t IpBlockTable::active_addresses(std::uint32_t asn) const {
    std::uint64_t total = 0;
    for (const auto& b : blocks_) {
        if (b.asn == asn) total += b.active_count;
    }
    return total;
}

std::size_t IpBlockTable::block_count(std::uint32_t asn) const {
    return static_cast<std::size_t>(
        std::count_if(blocks_.begin(), blocks_.end(), [asn](const IpBlock& b) { return b.asn == asn; }));
}

std::uint64_t IpBlockTable::total_active() const {
    std::uint64_t total = 0;
    for (const auto& b : blocks_) total += b.active_count;
    return total;
}

std::vector<std::uint32_t> IpBlockTable::asns_by_size() const {
    std::map<std::uint32_t, std::uint64_t> sizes;
    for (const auto& b : blocks_) sizes[b.asn] += b.active_count;
    std::vector<std::pair<std::uint32_t, std::uint64_t>> v(sizes.begin(), sizes.end());
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    std::vector<std::uint32_t> out;
    out.reserve(v.size());
    for (const auto& [asn, size] : v) out.push_back(asn);
    return out;
}

} // namespace basalt
