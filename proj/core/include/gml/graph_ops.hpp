#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "gml/graph.hpp"
#include "gml/matrix.hpp"

namespace gml {

/// Propagation rule f(A) applied by a GCN layer.
enum class PropagationRule {
  Adjacency,      // A
  RandomWalk,     // D⁻¹A
  SymmetricNorm,  // D⁻¹ᐟ²AD⁻¹ᐟ²
};

inline constexpr std::array<PropagationRule, 3> kAllRules{
    PropagationRule::Adjacency, PropagationRule::RandomWalk, PropagationRule::SymmetricNorm};

// Names used in config files and CSVs: "A", "DA", "DAD" (aliases f1, f2, f3).
std::string_view to_string(PropagationRule rule);
PropagationRule parse_rule(std::string_view name);

std::vector<double> degree_vector(const Graph& g);

/// f(A) for the given rule. Isolated nodes get a zero row (and column) in the
/// normalized operators: (D⁻¹)ₖₖ is taken as 0 when degree(k) = 0.
Matrix propagation_matrix(const Graph& g, PropagationRule rule);

/// Aᵖ by repeated dense multiplication; p >= 1.
Matrix graph_power(const Graph& g, std::size_t p);

/// Node-wise moment Mₚ: entry i is Σⱼ (Aᵖ)ᵢⱼ, the number of length-p walks from i.
std::vector<double> moment_vector(const Graph& g, std::size_t p);

/// Linear combination Σₘ aₘ·Mₘ of moments of orders 1..p.
class MomentTarget {
 public:
  // Throws ParameterError if coefficients are empty or all zero.
  explicit MomentTarget(std::vector<double> coefficients);

  static MomentTarget single(std::size_t order);

  std::size_t order() const noexcept { return coefficients_.size(); }
  std::span<const double> coefficients() const noexcept { return coefficients_; }

 private:
  std::vector<double> coefficients_;
};

std::vector<double> mixed_moment_vector(const Graph& g, const MomentTarget& target);

/// Precomputed operators for one graph, shared across forward passes.
struct GraphOperators {
  std::size_t n = 0;
  Matrix adjacency;
  Matrix random_walk;
  Matrix symmetric;

  static GraphOperators build(const Graph& g);
  // Adjacency plus only the normalized operators the listed rules need.
  static GraphOperators build(const Graph& g, std::span<const PropagationRule> rules);
  const Matrix& get(PropagationRule rule) const;
};

}  // namespace gml
