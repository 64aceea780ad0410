#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gml/graph.hpp"

namespace gml {

/// Erdős–Rényi G(n, p): every unordered pair is an edge independently with
/// probability p. Throws ParameterError for n == 0 or p outside [0, 1].
Graph gen_er(std::size_t n, double p, std::uint64_t seed);

/// Barabási–Albert preferential attachment.
///
/// Starts from m isolated nodes. Node v (v = m..n-1) attaches to m distinct
/// existing nodes drawn sequentially without replacement with probability
/// proportional to their current degree; when every existing node has degree
/// zero the draw is uniform. The result always has m·(n−m) edges.
/// Throws ParameterError unless 1 <= m < n.
Graph gen_ba(std::size_t n, std::size_t m, std::uint64_t seed);

/// Configuration model by stub matching.
///
/// Every node contributes deg[i] stubs; a uniformly random perfect matching of
/// the stubs is drawn. A matching that produces a self-loop or a repeated edge
/// is discarded and the whole matching restarted, up to max_retries times.
/// Throws ParameterError for an odd degree sum and RealizationError when the
/// retry budget runs out.
Graph config_rewire(std::span<const std::size_t> deg, std::uint64_t seed,
                    std::size_t max_retries = 200);

/// Degree-preserving randomization by double-edge swaps: picks two edges
/// (a,b), (c,d) and rewires them to (a,d), (c,b) whenever that keeps the graph
/// simple. Performs `swaps` accepted swaps (bounded by 100·swaps attempts).
Graph swap_rewire(const Graph& g, std::size_t swaps, std::uint64_t seed);

/// Relabels nodes with an explicit permutation: node i becomes perm[i], so the
/// result has adjacency P·A·Pᵀ.
Graph permute_nodes(const Graph& g, std::span<const std::size_t> perm);

/// Relabels nodes with a uniformly random permutation.
Graph permute_nodes(const Graph& g, std::uint64_t seed);

std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed);

enum class BenchmarkKind { BaVsEr, BaVsConfig };

BenchmarkKind parse_benchmark_kind(std::string_view name);
std::string_view to_string(BenchmarkKind kind);

struct LabeledGraph {
  Graph graph;
  int label = 0;
  // Index of the BA attachment share (0..4) the graph belongs to or is matched to.
  int group = 0;
  // For BA-vs-Config fakes: index of the real BA graph that was rewired; -1 otherwise.
  int source = -1;
};

using LabeledGraphSet = std::vector<LabeledGraph>;

/// The five BA attachment counts m ∈ {1, N/8, N/4, 3N/8, N/2}, each rounded
/// half-up and clamped to at least 1.
std::vector<std::size_t> ba_attachment_shares(std::size_t n);

/// Edge probability that gives an ER graph the expected edge count of BA(n, m).
double matched_er_probability(std::size_t n, std::size_t m);

/// Labeled benchmark: `count_per_class` node-shuffled BA graphs (label 0),
/// split evenly over the five attachment shares, followed by the same number
/// of label-1 graphs. For BaVsEr the label-1 graphs are density-matched ER
/// graphs per share; for BaVsConfig each label-1 graph is a degree-preserving
/// rewiring of the BA graph at the same position.
///
/// Requires n >= 10 and count_per_class divisible by 5.
LabeledGraphSet build_benchmark(BenchmarkKind kind, std::size_t n, std::size_t count_per_class,
                                std::uint64_t seed, std::size_t max_retries = 200);

}  // namespace gml
