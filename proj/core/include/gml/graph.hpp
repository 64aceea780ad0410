#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "gml/matrix.hpp"

namespace gml {

/// Simple undirected graph stored as a dense n×n 0/1 adjacency.
///
/// The mutators keep the adjacency symmetric with a zero diagonal, so every
/// Graph built through add_edge satisfies the simple-graph invariants.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n) : n_(n), adj_(n * n, 0) {}

  std::size_t node_count() const noexcept { return n_; }

  bool has_edge(std::size_t u, std::size_t v) const { return adj_[u * n_ + v] != 0; }

  // Throws ParameterError on out-of-range endpoints or a self-loop.
  void add_edge(std::size_t u, std::size_t v);
  void remove_edge(std::size_t u, std::size_t v);

  std::size_t edge_count() const noexcept;
  std::size_t degree(std::size_t u) const;
  std::vector<std::size_t> degrees() const;

  // Edges as (u, v) with u < v, in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  Matrix adjacency() const;

  // Raw row access, 0/1 bytes.
  const std::uint8_t* row(std::size_t u) const { return adj_.data() + u * n_; }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> adj_;
};

Graph complete_graph(std::size_t n);
Graph path_graph(std::size_t n);

}  // namespace gml
