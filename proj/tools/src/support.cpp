#include "basalt_cli/support.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "basalt/graph_metrics.hpp"

namespace basalt::cli {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::string format_number(std::int64_t x) { return std::to_string(x); }

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i != 0) out_ << ',';
        out_ << csv_field(fields[i]);
    }
    out_ << '\n';
}

namespace {

std::uint64_t parse_u64(std::string_view s, const std::string& whole) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc{} || ptr != end) throw UsageError("seeds: cannot parse '" + whole + "'");
    return v;
}

} // namespace

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::string_view rest = text;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        std::string_view item = rest.substr(0, comma);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        const auto dots = item.find("..");
        if (dots == std::string_view::npos) {
            out.push_back(parse_u64(item, text));
            continue;
        }
        const std::uint64_t lo = parse_u64(item.substr(0, dots), text);
        const std::uint64_t hi = parse_u64(item.substr(dots + 2), text);
        if (hi < lo) throw UsageError("seeds: empty range '" + std::string(item) + "'");
        if (hi - lo >= 1000000) throw UsageError("seeds: range '" + std::string(item) + "' is too large");
        for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    }
    if (out.empty()) throw UsageError("seeds: empty list");
    return out;
}

BoxStats box_stats(const std::vector<double>& values) {
    BoxStats b;
    std::vector<double> finite;
    for (double x : values) {
        if (std::isfinite(x)) {
            finite.push_back(x);
        } else {
            ++b.non_finite;
        }
    }
    b.count = finite.size();
    const double nan = std::nan("");
    if (finite.empty()) {
        b.min = b.q1 = b.median = b.q3 = b.max = b.mean = b.stddev = nan;
        return b;
    }
    double sum = 0.0;
    for (double x : finite) sum += x;
    b.mean = sum / static_cast<double>(finite.size());
    double ss = 0.0;
    for (double x : finite) ss += (x - b.mean) * (x - b.mean);
    b.stddev = finite.size() > 1 ? std::sqrt(ss / static_cast<double>(finite.size() - 1)) : 0.0;
    b.min = percentile(finite, 0.0);
    b.q1 = percentile(finite, 0.25);
    b.median = percentile(finite, 0.5);
    b.q3 = percentile(finite, 0.75);
    b.max = percentile(finite, 1.0);
    return b;
}

int default_jobs() {
    if (const char* env = std::getenv("BASALT_JOBS")) {
        int v = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc{} && ptr == s.data() + s.size() && v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

} // namespace basalt::cli
