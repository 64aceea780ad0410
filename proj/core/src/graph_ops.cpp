#include "gml/graph_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gml/error.hpp"

namespace gml {

std::string_view to_string(PropagationRule rule) {
  switch (rule) {
    case PropagationRule::Adjacency:
      return "A";
    case PropagationRule::RandomWalk:
      return "DA";
    case PropagationRule::SymmetricNorm:
      return "DAD";
  }
  return "?";
}

PropagationRule parse_rule(std::string_view name) {
  if (name == "A" || name == "f1" || name == "adjacency") return PropagationRule::Adjacency;
  if (name == "DA" || name == "f2" || name == "random_walk") return PropagationRule::RandomWalk;
  if (name == "DAD" || name == "f3" || name == "symmetric") return PropagationRule::SymmetricNorm;
  throw ParameterError("unknown propagation rule '" + std::string(name) + "'");
}

std::vector<double> degree_vector(const Graph& g) {
  std::vector<double> d(g.node_count());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<double>(g.degree(i));
  return d;
}

Matrix propagation_matrix(const Graph& g, PropagationRule rule) {
  Matrix a = g.adjacency();
  if (rule == PropagationRule::Adjacency) return a;

  const auto deg = degree_vector(g);
  const std::size_t n = g.node_count();
  std::vector<double> scale(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (deg[i] > 0.0) {
      scale[i] = rule == PropagationRule::RandomWalk ? 1.0 / deg[i] : 1.0 / std::sqrt(deg[i]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (a(i, j) == 0.0) continue;
      a(i, j) = rule == PropagationRule::RandomWalk ? scale[i] : scale[i] * scale[j];
    }
  }
  return a;
}

Matrix graph_power(const Graph& g, std::size_t p) {
  if (p == 0) throw ParameterError("graph_power: p must be at least 1");
  const Matrix a = g.adjacency();
  Matrix out = a;
  for (std::size_t k = 1; k < p; ++k) out = matmul(out, a);
  return out;
}

std::vector<double> moment_vector(const Graph& g, std::size_t p) {
  if (p == 0) throw ParameterError("moment_vector: p must be at least 1");
  const std::size_t n = g.node_count();
  // Aᵖ·1 via p matrix-vector products.
  std::vector<double> v(n, 1.0), next(n);
  for (std::size_t k = 0; k < p; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto* row = g.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (row[j]) s += v[j];
      next[i] = s;
    }
    std::swap(v, next);
  }
  return v;
}

MomentTarget::MomentTarget(std::vector<double> coefficients)
    : coefficients_(std::move(coefficients)) {
  if (std::none_of(coefficients_.begin(), coefficients_.end(),
                   [](double c) { return c != 0.0; })) {
    throw ParameterError("MomentTarget: at least one coefficient must be nonzero");
  }
}

MomentTarget MomentTarget::single(std::size_t order) {
  if (order == 0) throw ParameterError("MomentTarget: order must be at least 1");
  std::vector<double> c(order, 0.0);
  c.back() = 1.0;
  return MomentTarget(std::move(c));
}

std::vector<double> mixed_moment_vector(const Graph& g, const MomentTarget& target) {
  std::vector<double> out(g.node_count(), 0.0);
  const auto coeffs = target.coefficients();
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    if (coeffs[m] == 0.0) continue;
    const auto mv = moment_vector(g, m + 1);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += coeffs[m] * mv[i];
  }
  return out;
}

GraphOperators GraphOperators::build(const Graph& g) {
  return {g.node_count(), propagation_matrix(g, PropagationRule::Adjacency),
          propagation_matrix(g, PropagationRule::RandomWalk),
          propagation_matrix(g, PropagationRule::SymmetricNorm)};
}

GraphOperators GraphOperators::build(const Graph& g, std::span<const PropagationRule> rules) {
  GraphOperators ops;
  ops.n = g.node_count();
  ops.adjacency = propagation_matrix(g, PropagationRule::Adjacency);
  for (auto rule : rules) {
    if (rule == PropagationRule::RandomWalk && ops.random_walk.empty()) {
      ops.random_walk = propagation_matrix(g, rule);
    } else if (rule == PropagationRule::SymmetricNorm && ops.symmetric.empty()) {
      ops.symmetric = propagation_matrix(g, rule);
    }
  }
  return ops;
}

const Matrix& GraphOperators::get(PropagationRule rule) const {
  switch (rule) {
    case PropagationRule::Adjacency:
      return adjacency;
    case PropagationRule::RandomWalk:
      if (random_walk.empty()) throw ParameterError("GraphOperators: D^-1 A was not built");
      return random_walk;
    case PropagationRule::SymmetricNorm:
      if (symmetric.empty()) throw ParameterError("GraphOperators: D^-1/2 A D^-1/2 was not built");
      return symmetric;
  }
  return adjacency;
}

}  // namespace gml
