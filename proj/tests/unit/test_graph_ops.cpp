#include <algorithm>

#include "doctest.h"
#include "gml/error.hpp"
#include "gml/graph_ops.hpp"
#include "gml/graphgen.hpp"
#include "helpers.hpp"

using namespace gml;
using gml::testing::random_graph;

namespace {

// Number of length-p walks from i to j, by explicit recursion over neighbours.
double count_walks(const Graph& g, std::size_t i, std::size_t j, std::size_t p) {
  if (p == 0) return i == j ? 1.0 : 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < g.node_count(); ++k)
    if (g.has_edge(i, k)) total += count_walks(g, k, j, p - 1);
  return total;
}

}  // namespace

TEST_CASE("degree_vector") {
  CHECK(degree_vector(complete_graph(3)) == std::vector<double>{2, 2, 2});
  CHECK(degree_vector(Graph(4)) == std::vector<double>{0, 0, 0, 0});
  CHECK(degree_vector(path_graph(3)) == std::vector<double>{1, 2, 1});
}

TEST_CASE("propagation_matrix") {
  const auto rw = propagation_matrix(complete_graph(3), PropagationRule::RandomWalk);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(rw(i, j) == (i == j ? 0.0 : 0.5));

  const Graph g = gen_ba(12, 2, 3);
  CHECK(propagation_matrix(g, PropagationRule::Adjacency) == g.adjacency());

  Graph iso(4);
  iso.add_edge(0, 1);
  iso.add_edge(1, 2);  // node 3 isolated
  for (auto rule : {PropagationRule::RandomWalk, PropagationRule::SymmetricNorm}) {
    const auto m = propagation_matrix(iso, rule);
    for (std::size_t j = 0; j < 4; ++j) CHECK(m(3, j) == 0.0);
  }
}

TEST_CASE("propagation_matrix properties") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Graph g = random_graph(2 + rng.below(9), rng);
    const auto rw = propagation_matrix(g, PropagationRule::RandomWalk);
    for (double s : row_sums(rw)) CHECK((std::abs(s) < 1e-12 || std::abs(s - 1.0) < 1e-12));
    const auto sym = propagation_matrix(g, PropagationRule::SymmetricNorm);
    CHECK(sym == transpose(sym));
  }
}

TEST_CASE("graph_power examples") {
  const Graph g = gen_er(7, 0.5, 2);
  CHECK(graph_power(g, 1) == g.adjacency());
  const Matrix expected{{1, 0, 1}, {0, 2, 0}, {1, 0, 1}};
  CHECK(graph_power(path_graph(3), 2) == expected);
  const auto k3 = graph_power(complete_graph(3), 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(k3(i, i) == 2.0);
  CHECK_THROWS_AS(graph_power(g, 0), ParameterError);
}

TEST_CASE("graph_power matches walk enumeration for n <= 6, p <= 4") {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const Graph g = random_graph(1 + rng.below(6), rng);
    for (std::size_t p = 1; p <= 4; ++p) {
      const auto power = graph_power(g, p);
      const auto moments = moment_vector(g, p);
      for (std::size_t i = 0; i < g.node_count(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < g.node_count(); ++j) {
          const double walks = count_walks(g, i, j, p);
          CHECK(power(i, j) == walks);
          row += walks;
        }
        CHECK(moments[i] == row);
      }
    }
  }
}

TEST_CASE("moment_vector examples") {
  CHECK(moment_vector(complete_graph(3), 1) == std::vector<double>{2, 2, 2});
  CHECK(moment_vector(path_graph(3), 2) == std::vector<double>{2, 2, 2});
  CHECK(moment_vector(Graph(5), 3) == std::vector<double>(5, 0.0));
  CHECK_THROWS_AS(moment_vector(Graph(2), 0), ParameterError);
}

TEST_CASE("moment_vector is permutation equivariant") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const Graph g = random_graph(2 + rng.below(10), rng);
    const auto perm = random_permutation(g.node_count(), trial);
    const Graph h = permute_nodes(g, perm);
    for (std::size_t p = 1; p <= 3; ++p) {
      const auto a = moment_vector(g, p), b = moment_vector(h, p);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[perm[i]] == a[i]);
    }
  }
}

TEST_CASE("mixed_moment_vector") {
  const Graph g = gen_ba(10, 2, 1);
  CHECK(mixed_moment_vector(g, MomentTarget({1, 0, 0})) == moment_vector(g, 1));
  CHECK(mixed_moment_vector(complete_graph(3), MomentTarget({1, 1})) ==
        std::vector<double>{6, 6, 6});
  CHECK_THROWS_AS(MomentTarget({0, 0, 0}), ParameterError);
  CHECK_THROWS_AS(MomentTarget(std::vector<double>{}), ParameterError);
  CHECK(MomentTarget::single(3).coefficients().size() == 3);
}

TEST_CASE("rule names") {
  CHECK(parse_rule("f3") == PropagationRule::SymmetricNorm);
  CHECK(parse_rule("DA") == PropagationRule::RandomWalk);
  CHECK(to_string(PropagationRule::Adjacency) == "A");
  CHECK_THROWS_AS(parse_rule("B"), ParameterError);
}

TEST_CASE("GraphOperators builds only requested rules") {
  const Graph g = gen_ba(8, 2, 1);
  const std::vector<PropagationRule> rules{PropagationRule::SymmetricNorm};
  const auto ops = GraphOperators::build(g, rules);
  CHECK(ops.get(PropagationRule::SymmetricNorm) ==
        propagation_matrix(g, PropagationRule::SymmetricNorm));
  CHECK_THROWS_AS(ops.get(PropagationRule::RandomWalk), ParameterError);
  CHECK(GraphOperators::build(g).get(PropagationRule::RandomWalk) ==
        propagation_matrix(g, PropagationRule::RandomWalk));
}
