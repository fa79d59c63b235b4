#include "basalt/graph_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace basalt {

namespace {

std::vector<std::vector<std::uint32_t>> undirected(const ViewGraph& g) {
    std::vector<std::vector<std::uint32_t>> adj(g.total);
    for (std::size_t u = 0; u < g.correct; ++u) {
        for (std::uint32_t w : g.out[u]) {
            if (w == u) continue;
            adj[u].push_back(w);
            adj[w].push_back(static_cast<std::uint32_t>(u));
        }
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    return adj;
}

} // namespace

double clustering_coefficient(const ViewGraph& g) {
    if (g.correct == 0) return 0.0;
    const auto adj = undirected(g);
    std::vector<std::uint32_t> mark(g.total, 0);
    std::uint32_t stamp = 0;
    double sum = 0.0;
    for (std::size_t u = 0; u < g.correct; ++u) {
        const auto& nu = adj[u];
        const double d = static_cast<double>(nu.size());
        if (nu.size() < 2) continue;
        ++stamp;
        double byz = 0.0;
        for (std::uint32_t a : nu) {
            mark[a] = stamp;
            if (a >= g.correct) byz += 1.0;
        }
        double links = byz * (byz - 1.0) / 2.0;
        for (std::uint32_t a : nu) {
            for (std::uint32_t b : adj[a]) {
                if (b > a && mark[b] == stamp) links += 1.0;
            }
        }
        sum += links / (d * (d - 1.0) / 2.0);
    }
    return sum / static_cast<double>(g.correct);
}

PathStats mean_path_length(const ViewGraph& g, Rng& rng, std::size_t pair_budget, std::size_t exact_limit) {
    PathStats stats;
    const std::size_t q = g.correct;
    if (q < 2) return stats;

    std::vector<std::vector<std::uint32_t>> out(q);
    for (std::size_t u = 0; u < q; ++u) {
        for (std::uint32_t w : g.out[u]) {
            if (w < q && w != u) out[u].push_back(w);
        }
        std::sort(out[u].begin(), out[u].end());
        out[u].erase(std::unique(out[u].begin(), out[u].end()), out[u].end());
    }

    std::vector<std::uint32_t> sources;
    if (q <= exact_limit) {
        sources.resize(q);
        std::iota(sources.begin(), sources.end(), 0u);
    } else {
        const std::size_t wanted = std::min(q, (pair_budget + q - 2) / (q - 1));
        std::vector<std::uint32_t> all(q);
        std::iota(all.begin(), all.end(), 0u);
        for (std::size_t i = 0; i < wanted; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, q - 1);
            std::swap(all[i], all[pick(rng)]);
        }
        sources.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(wanted));
    }

    constexpr std::uint32_t kUnseen = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> dist(q);
    std::vector<std::uint32_t> frontier;
    frontier.reserve(q);
    double total = 0.0;
    std::size_t reached = 0;
    for (std::uint32_t s : sources) {
        std::fill(dist.begin(), dist.end(), kUnseen);
        dist[s] = 0;
        frontier.clear();
        frontier.push_back(s);
        for (std::size_t head = 0; head < frontier.size(); ++head) {
            const std::uint32_t u = frontier[head];
            for (std::uint32_t w : out[u]) {
                if (dist[w] != kUnseen) continue;
                dist[w] = dist[u] + 1;
                total += dist[w];
                ++reached;
                frontier.push_back(w);
            }
        }
    }
    stats.pairs = sources.size() * (q - 1);
    stats.mean = reached == 0 ? std::numeric_limits<double>::quiet_NaN() : total / static_cast<double>(reached);
    stats.disconnected_fraction = 1.0 - static_cast<double>(reached) / static_cast<double>(stats.pairs);
    return stats;
}

double percentile(std::vector<double>& values, double q) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double indegree_spread(const ViewGraph& g) {
    const std::size_t q = g.correct;
    if (q == 0) return 0.0;
    std::vector<double> indeg(q, 0.0);
    std::vector<std::uint32_t> seen;
    for (std::size_t u = 0; u < q; ++u) {
        seen.clear();
        for (std::uint32_t w : g.out[u]) {
            if (w < q && w != u) seen.push_back(w);
        }
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        for (std::uint32_t w : seen) indeg[w] += 1.0;
    }
    const double p90 = percentile(indeg, 0.9);
    const double p10 = percentile(indeg, 0.1);
    return p90 - p10;
}

GraphMetrics graph_metrics(const ViewGraph& g, Rng& rng, std::size_t pair_budget) {
    GraphMetrics m;
    m.clustering = clustering_coefficient(g);
    const PathStats p = mean_path_length(g, rng, pair_budget);
    m.mean_path = p.mean;
    m.disconnected_fraction = p.disconnected_fraction;
    m.indegree_spread = indegree_spread(g);
    return m;
}

} // namespace basalt
