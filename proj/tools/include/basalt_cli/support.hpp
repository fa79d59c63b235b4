#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace basalt::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kData = 3 };

/// Bad flag values or grids. Maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// "%.6g", with "nan", "inf" and "-inf" spelled out and "-0" folded to "0".
std::string format_number(double x);
std::string format_number(std::int64_t x);
inline std::string format_number(int x) { return format_number(static_cast<std::int64_t>(x)); }
inline std::string format_number(std::uint64_t x) { return std::to_string(x); }

/// RFC-4180 quoting: fields containing a comma, quote or line break are quoted.
std::string csv_field(std::string_view s);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void row(const std::vector<std::string>& fields);

private:
    std::ostream& out_;
};

/// Parses "1..5", "3", "1,4,9" or mixtures such as "1..3,10".
std::vector<std::uint64_t> parse_seeds(const std::string& text);

/// min, quartiles and max by linear interpolation over the finite values, and
/// how many values were NaN or infinite.
struct BoxStats {
    std::size_t count = 0;
    std::size_t non_finite = 0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
};

BoxStats box_stats(const std::vector<double>& values);

/// BASALT_JOBS if set to a positive integer, otherwise the hardware thread count.
int default_jobs();

/// Calls fn(i) for i in [0, n) on up to `jobs` threads. The first exception
/// stops further work and is rethrown after all workers have joined.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace basalt::cli
