#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "basalt/keyed_hash.hpp"

namespace basalt {

/// Directed view graph. Nodes [0, correct) are correct and own an out-list;
/// nodes [correct, total) are Byzantine and have no out-list.
struct ViewGraph {
    std::size_t correct = 0;
    std::size_t total = 0;
    std::vector<std::vector<std::uint32_t>> out;
};

struct PathStats {
    double mean = 0.0;                   // over connected ordered pairs
    double disconnected_fraction = 0.0;  // of measured ordered pairs
    std::size_t pairs = 0;
};

struct GraphMetrics {
    double clustering = 0.0;
    double mean_path = 0.0;
    double disconnected_fraction = 0.0;
    double indegree_spread = 0.0;
};

/// Mean local clustering coefficient of correct nodes on the undirected
/// projection, with every pair of Byzantine nodes treated as adjacent.
double clustering_coefficient(const ViewGraph& g);

/// Directed shortest paths between correct nodes once Byzantine nodes are
/// removed. All sources are used when `correct <= exact_limit`; otherwise
/// random sources are drawn until at least `pair_budget` pairs are measured.
PathStats mean_path_length(const ViewGraph& g, Rng& rng, std::size_t pair_budget = 100000,
                           std::size_t exact_limit = 2000);

/// 90th minus 10th percentile of correct in-degrees, counting distinct correct sources.
double indegree_spread(const ViewGraph& g);

/// Linear-interpolation percentile (q in [0, 1]). Sorts `values`.
double percentile(std::vector<double>& values, double q);

GraphMetrics graph_metrics(const ViewGraph& g, Rng& rng, std::size_t pair_budget = 100000);

} // namespace basalt
