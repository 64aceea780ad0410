#include "gml/graphgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gml/error.hpp"
#include "gml/rng.hpp"

namespace gml {

namespace {

// Stream tags for build_benchmark sub-seeds.
constexpr std::uint64_t kTagBa = 1;
constexpr std::uint64_t kTagShuffle = 2;
constexpr std::uint64_t kTagEr = 3;
constexpr std::uint64_t kTagConfig = 4;

}  // namespace

Graph gen_er(std::size_t n, double p, std::uint64_t seed) {
  if (n == 0) throw ParameterError("gen_er: n must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("gen_er: p must lie in [0, 1]");
  Rng rng(seed);
  Graph g(n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (rng.bernoulli(p)) g.add_edge(u, v);
  return g;
}

Graph gen_ba(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m == 0 || m >= n) {
    throw ParameterError("gen_ba: need 1 <= m < n (m=" + std::to_string(m) +
                         ", n=" + std::to_string(n) + ")");
  }
  Rng rng(seed);
  Graph g(n);
  std::vector<double> degree(n, 0.0);
  std::vector<bool> taken(n);
  std::vector<std::size_t> targets;
  targets.reserve(m);

  for (std::size_t v = m; v < n; ++v) {
    std::fill(taken.begin(), taken.end(), false);
    targets.clear();
    for (std::size_t pick = 0; pick < m; ++pick) {
      double total = 0.0;
      std::size_t free_nodes = 0;
      for (std::size_t u = 0; u < v; ++u) {
        if (taken[u]) continue;
        total += degree[u];
        ++free_nodes;
      }
      std::size_t chosen = v;
      if (total > 0.0) {
        double r = rng.uniform() * total;
        for (std::size_t u = 0; u < v; ++u) {
          if (taken[u] || degree[u] <= 0.0) continue;
          chosen = u;
          r -= degree[u];
          if (r < 0.0) break;
        }
      } else {
        // Degree-free start: uniform over the nodes not yet chosen.
        std::size_t k = rng.below(free_nodes);
        for (std::size_t u = 0; u < v; ++u) {
          if (taken[u]) continue;
          if (k-- == 0) {
            chosen = u;
            break;
          }
        }
      }
      taken[chosen] = true;
      targets.push_back(chosen);
    }
    for (std::size_t u : targets) {
      g.add_edge(u, v);
      degree[u] += 1.0;
    }
    degree[v] = static_cast<double>(m);
  }
  return g;
}

Graph config_rewire(std::span<const std::size_t> deg, std::uint64_t seed,
                    std::size_t max_retries) {
  const std::size_t n = deg.size();
  const std::size_t total = std::accumulate(deg.begin(), deg.end(), std::size_t{0});
  if (total % 2 != 0) {
    throw ParameterError("config_rewire: degree sum " + std::to_string(total) + " is odd");
  }
  std::vector<std::size_t> stubs;
  stubs.reserve(total);
  for (std::size_t u = 0; u < n; ++u) stubs.insert(stubs.end(), deg[u], u);

  Rng rng(seed);
  for (std::size_t attempt = 0; attempt <= max_retries; ++attempt) {
    rng.shuffle(std::span<std::size_t>(stubs));
    Graph g(n);
    bool simple = true;
    for (std::size_t k = 0; k + 1 < stubs.size(); k += 2) {
      const std::size_t a = stubs[k], b = stubs[k + 1];
      if (a == b || g.has_edge(a, b)) {
        simple = false;
        break;
      }
      g.add_edge(a, b);
    }
    if (simple) return g;
  }
  throw RealizationError("config_rewire: no simple matching found in " +
                         std::to_string(max_retries) + " retries");
}

Graph swap_rewire(const Graph& g, std::size_t swaps, std::uint64_t seed) {
  Graph out = g;
  auto edges = out.edges();
  if (edges.size() < 2) return out;
  Rng rng(seed);
  const std::size_t max_attempts = 100 * swaps;
  std::size_t done = 0;
  for (std::size_t attempt = 0; attempt < max_attempts && done < swaps; ++attempt) {
    const std::size_t i = rng.below(edges.size());
    std::size_t j = rng.below(edges.size() - 1);
    if (j >= i) ++j;
    auto [a, b] = edges[i];
    auto [c, d] = edges[j];
    if (rng.bernoulli(0.5)) std::swap(c, d);
    if (a == c || a == d || b == c || b == d) continue;
    if (out.has_edge(a, d) || out.has_edge(c, b)) continue;
    out.remove_edge(a, b);
    out.remove_edge(c, d);
    out.add_edge(a, d);
    out.add_edge(c, b);
    edges[i] = {std::min(a, d), std::max(a, d)};
    edges[j] = {std::min(c, b), std::max(c, b)};
    ++done;
  }
  return out;
}

std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(perm));
  return perm;
}

Graph permute_nodes(const Graph& g, std::span<const std::size_t> perm) {
  const std::size_t n = g.node_count();
  if (perm.size() != n) throw ParameterError("permute_nodes: permutation size mismatch");
  Graph out(n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (g.has_edge(u, v)) out.add_edge(perm[u], perm[v]);
  return out;
}

Graph permute_nodes(const Graph& g, std::uint64_t seed) {
  return permute_nodes(g, random_permutation(g.node_count(), seed));
}

BenchmarkKind parse_benchmark_kind(std::string_view name) {
  if (name == "ba_vs_er") return BenchmarkKind::BaVsEr;
  if (name == "ba_vs_config") return BenchmarkKind::BaVsConfig;
  throw ParameterError("unknown benchmark kind '" + std::string(name) + "'");
}

std::string_view to_string(BenchmarkKind kind) {
  return kind == BenchmarkKind::BaVsEr ? "ba_vs_er" : "ba_vs_config";
}

std::vector<std::size_t> ba_attachment_shares(std::size_t n) {
  std::vector<std::size_t> shares{1};
  for (double frac : {1.0 / 8.0, 1.0 / 4.0, 3.0 / 8.0, 1.0 / 2.0}) {
    const auto m = static_cast<std::size_t>(std::floor(static_cast<double>(n) * frac + 0.5));
    shares.push_back(std::max<std::size_t>(m, 1));
  }
  return shares;
}

double matched_er_probability(std::size_t n, std::size_t m) {
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(m) * static_cast<double>(n - m) / pairs;
}

LabeledGraphSet build_benchmark(BenchmarkKind kind, std::size_t n, std::size_t count_per_class,
                                std::uint64_t seed, std::size_t max_retries) {
  if (n < 10) throw ParameterError("build_benchmark: n must be at least 10");
  if (count_per_class == 0 || count_per_class % 5 != 0) {
    throw ParameterError("build_benchmark: count_per_class must be a positive multiple of 5");
  }
  const auto shares = ba_attachment_shares(n);
  const std::size_t per_share = count_per_class / 5;

  LabeledGraphSet out;
  out.reserve(2 * count_per_class);
  for (std::size_t s = 0; s < shares.size(); ++s) {
    for (std::size_t k = 0; k < per_share; ++k) {
      const std::uint64_t idx = s * per_share + k;
      Graph ba = gen_ba(n, shares[s], derive_seed(derive_seed(seed, kTagBa), idx));
      ba = permute_nodes(ba, derive_seed(derive_seed(seed, kTagShuffle), idx));
      out.push_back({std::move(ba), 0, static_cast<int>(s), -1});
    }
  }
  for (std::size_t idx = 0; idx < count_per_class; ++idx) {
    const auto s = static_cast<std::size_t>(out[idx].group);
    if (kind == BenchmarkKind::BaVsEr) {
      const double p = matched_er_probability(n, shares[s]);
      Graph er = gen_er(n, p, derive_seed(derive_seed(seed, kTagEr), idx));
      out.push_back({std::move(er), 1, static_cast<int>(s), -1});
    } else {
      const Graph& real = out[idx].graph;
      const std::uint64_t sub = derive_seed(derive_seed(seed, kTagConfig), idx);
      Graph fake;
      try {
        fake = config_rewire(real.degrees(), sub, max_retries);
      } catch (const RealizationError&) {
        fake = swap_rewire(real, 10 * real.edge_count(), sub);
      }
      out.push_back({std::move(fake), 1, static_cast<int>(s), static_cast<int>(idx)});
    }
  }
  return out;
}

}  // namespace gml
