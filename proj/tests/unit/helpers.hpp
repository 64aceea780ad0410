#pragma once

#include <cstdint>
#include <vector>

#include "gml/graph.hpp"
#include "gml/matrix.hpp"
#include "gml/rng.hpp"

namespace gml::testing {

// Uniform random simple graph with a random density, for property tests.
inline Graph random_graph(std::size_t n, Rng& rng) {
  Graph g(n);
  const double p = rng.uniform(0.1, 0.9);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (rng.bernoulli(p)) g.add_edge(u, v);
  return g;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-scale, scale);
  return m;
}

inline Graph from_edges(std::size_t n, std::initializer_list<std::pair<std::size_t, std::size_t>> edges) {
  Graph g(n);
  for (auto [u, v] : edges) g.add_edge(u, v);
  return g;
}

}  // namespace gml::testing
