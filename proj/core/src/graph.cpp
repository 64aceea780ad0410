#include "gml/graph.hpp"

#include <string>

#include "gml/error.hpp"

namespace gml {

void Graph::add_edge(std::size_t u, std::size_t v) {
  if (u >= n_ || v >= n_) {
    throw ParameterError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                         ") out of range for n=" + std::to_string(n_));
  }
  if (u == v) throw ParameterError("self-loop at node " + std::to_string(u));
  adj_[u * n_ + v] = 1;
  adj_[v * n_ + u] = 1;
}

void Graph::remove_edge(std::size_t u, std::size_t v) {
  adj_[u * n_ + v] = 0;
  adj_[v * n_ + u] = 0;
}

std::size_t Graph::edge_count() const noexcept {
  std::size_t twice = 0;
  for (auto b : adj_) twice += b;
  return twice / 2;
}

std::size_t Graph::degree(std::size_t u) const {
  std::size_t d = 0;
  const auto* r = row(u);
  for (std::size_t v = 0; v < n_; ++v) d += r[v];
  return d;
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> out(n_);
  for (std::size_t u = 0; u < n_; ++u) out[u] = degree(u);
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> Graph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t u = 0; u < n_; ++u)
    for (std::size_t v = u + 1; v < n_; ++v)
      if (has_edge(u, v)) out.emplace_back(u, v);
  return out;
}

Matrix Graph::adjacency() const {
  Matrix a(n_, n_);
  for (std::size_t i = 0; i < adj_.size(); ++i) a.data()[i] = adj_[i];
  return a;
}

Graph complete_graph(std::size_t n) {
  Graph g(n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) g.add_edge(u, v);
  return g;
}

Graph path_graph(std::size_t n) {
  Graph g(n);
  for (std::size_t u = 0; u + 1 < n; ++u) g.add_edge(u, u + 1);
  return g;
}

}  // namespace gml
