#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "gml/error.hpp"
#include "gml/graph_ops.hpp"
#include "gml/graphgen.hpp"
#include "gml/nn.hpp"
#include "helpers.hpp"

using namespace gml;
using gml::testing::random_graph;

namespace {

std::vector<double> column(const Matrix& m) {
  return {m.data().begin(), m.data().end()};
}

ModelParams constant_params(const ModelSpec& spec, double weight, double bias) {
  ModelParams p = init_params(spec, 0);
  for (auto& e : p.entries) e.value.fill(e.name.ends_with(".b") ? bias : weight);
  return p;
}

// Central differences per parameter entry. Entries whose gradient is tiny
// next to the largest one are compared absolutely, since finite-difference
// truncation error there exceeds the gradient itself.
bool gradients_match(Tape& tape, NodeId loss, double tol) {
  const auto analytic = tape.backward(loss);
  const std::vector<NodeId> params(tape.parameters().begin(), tape.parameters().end());
  double scale = 0.0;
  for (const auto& g : analytic)
    for (double v : g.data()) scale = std::max(scale, std::abs(v));
  bool ok = true;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const Matrix original = tape.value(params[p]);
    for (std::size_t e = 0; e < original.size(); ++e) {
      Matrix probe = original;
      probe.data()[e] += 1e-6;
      tape.set_value(params[p], probe);
      tape.replay();
      const double up = tape.value(loss)(0, 0);
      probe.data()[e] = original.data()[e] - 1e-6;
      tape.set_value(params[p], probe);
      tape.replay();
      const double fd = (up - tape.value(loss)(0, 0)) / 2e-6;
      const double ad = analytic[p].data()[e];
      ok = ok && std::abs(ad - fd) <= tol * std::max(std::abs(ad) + std::abs(fd), 1e-2 * scale);
    }
    tape.set_value(params[p], original);
  }
  tape.replay();
  return ok;
}

}  // namespace

TEST_CASE("init_attributes") {
  CHECK(init_attributes(3) == Matrix{{1}, {1}, {1}});
  CHECK(init_attributes(Graph(1)) == Matrix{{1}});
  CHECK(init_attributes(gen_ba(12, 2, 1)).sum() == 12.0);
}

TEST_CASE("gcn_layer") {
  const Graph g = gen_ba(20, 2, 5);
  Tape t;
  const auto h = t.constant(init_attributes(g));
  const auto w = t.parameter(Matrix{{1}});
  const auto b = t.parameter(Matrix{{0}});
  const auto y = gcn_layer(t, g.adjacency(), h, w, b, Activation::Linear);
  CHECK(column(t.value(y)) == degree_vector(g));

  const auto zero = t.parameter(Matrix{{0}});
  CHECK(t.value(gcn_layer(t, g.adjacency(), h, zero, std::nullopt, Activation::Relu)) ==
        Matrix(20, 1));

  const auto y2 = gcn_layer(t, g.adjacency(), y, w, std::nullopt, Activation::Linear);
  CHECK(column(t.value(y2)) == moment_vector(g, 2));
}

TEST_CASE("unit-weight linear plain GCN computes moments exactly") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = random_graph(3 + rng.below(10), rng);
    for (std::size_t layers = 1; layers <= 4; ++layers) {
      ModelSpec spec;
      spec.layers = layers;
      spec.use_bias = false;
      const auto model = build_model(spec, g, constant_params(spec, 1.0, 0.0));
      CHECK(column(model.tape.value(model.output)) == moment_vector(g, layers));
    }
  }
}

TEST_CASE("residual head over unit-weight layers computes mixed moments") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = random_graph(3 + rng.below(8), rng);
    const std::vector<double> a{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    ModelSpec spec;
    spec.layers = 3;
    spec.use_bias = false;
    spec.residual = true;
    auto params = constant_params(spec, 1.0, 0.0);
    // Head input is [h3 | h2 | h1].
    params.at("head.W") = Matrix{{a[2]}, {a[1]}, {a[0]}};
    const auto model = build_model(spec, g, params);
    const auto expected = mixed_moment_vector(g, MomentTarget(a));
    const auto got = column(model.tape.value(model.output));
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
  }

  Tape t;
  const Graph g = gen_ba(10, 2, 2);
  const auto a1 = t.constant(Matrix::column(moment_vector(g, 1)));
  const auto a2 = t.constant(Matrix::column(moment_vector(g, 2)));
  const NodeId outs[] = {a2, a1};
  const auto y = residual_head(t, outs, t.parameter(Matrix{{1}, {1}}), std::nullopt,
                               Activation::Linear);
  CHECK(column(t.value(y)) == mixed_moment_vector(g, MomentTarget({1, 1})));
  const NodeId single[] = {a1};
  CHECK(t.value(residual_head(t, single, t.parameter(Matrix{{1}}), std::nullopt,
                              Activation::Linear)) == t.value(a1));
  const NodeId mismatched[] = {a1, t.constant(Matrix(3, 1))};
  CHECK_THROWS_AS(residual_head(t, mismatched, t.parameter(Matrix(2, 1)), std::nullopt,
                                Activation::Linear),
                  ShapeError);
}

TEST_CASE("modular block") {
  const Graph k3 = complete_graph(3);
  Tape t;
  const auto h = t.constant(init_attributes(k3));
  std::vector<NodeId> branches;
  for (auto rule : kAllRules) {
    branches.push_back(t.matmul(t.matmul(t.constant(propagation_matrix(k3, rule)), h),
                                t.parameter(Matrix{{1}})));
  }
  CHECK(column(t.value(branches[0])) == std::vector<double>{2, 2, 2});
  CHECK(column(t.value(branches[1])) == std::vector<double>{1, 1, 1});
  for (double v : column(t.value(branches[2]))) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));

  // Single branch with identity mixing reduces to a GCN layer.
  const Graph g = gen_ba(15, 3, 4);
  Tape u;
  const auto x = u.constant(init_attributes(g));
  const auto w = u.parameter(Matrix{{0.7, -0.3}});
  BlockParams bp{{w}, u.parameter(Matrix::identity(2)), std::nullopt};
  const PropagationRule only[] = {PropagationRule::Adjacency};
  const auto block = modular_block(u, g, x, only, bp, Activation::Tanh);
  const auto layer = gcn_layer(u, g.adjacency(), x, w, std::nullopt, Activation::Tanh);
  CHECK(u.value(block) == u.value(layer));

  // Output width is `units` for any rule count.
  for (std::size_t r = 1; r <= 3; ++r) {
    ModelSpec spec;
    spec.arch = Architecture::ModularGcn;
    spec.units = 5;
    spec.rules.assign(kAllRules.begin(), kAllRules.begin() + static_cast<std::ptrdiff_t>(r));
    spec.residual = false;
    const auto params = init_params(spec, 3);
    CHECK(params.at("block.0.mix.W").cols() == 5);
  }
}

TEST_CASE("classifier head") {
  Rng rng(6);
  Tape t;
  const auto h = t.constant(gml::testing::random_matrix(7, 4, rng));
  const auto p = classifier_head(t, h, t.parameter(Matrix(4, 3)), t.parameter(Matrix(1, 3)));
  for (double v : t.value(p).data()) CHECK(v == doctest::Approx(1.0 / 3.0));

  const auto one = t.constant(gml::testing::random_matrix(1, 4, rng));
  const auto w = t.parameter(gml::testing::random_matrix(4, 2, rng));
  const auto b = t.parameter(gml::testing::random_matrix(1, 2, rng));
  // Copy before recording more nodes; value() references move when the tape grows.
  const Matrix pooled = t.value(classifier_head(t, one, w, b));
  CHECK(pooled == t.value(t.softmax_rows(classifier_logits(t, one, w, b))));

  for (int trial = 0; trial < 20; ++trial) {
    const auto x = t.constant(gml::testing::random_matrix(1 + rng.below(9), 4, rng, 5.0));
    const auto q = classifier_head(t, x, t.parameter(gml::testing::random_matrix(4, 3, rng, 5.0)),
                                   t.parameter(gml::testing::random_matrix(1, 3, rng)));
    CHECK(std::abs(t.value(q).sum() - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(classifier_head(t, h, t.parameter(Matrix(4, 1)), t.parameter(Matrix(1, 1))),
                  ShapeError);
}

TEST_CASE("fc baseline") {
  const Graph g = gen_er(6, 0.5, 1);
  Tape t;
  FcParams p{t.parameter(Matrix(36, 4)), t.parameter(Matrix(1, 4)), t.parameter(Matrix(4, 6)),
             t.parameter(Matrix(1, 6, 2.5))};
  const auto y = fc_baseline(t, g, p);
  CHECK(t.value(y) == Matrix(1, 6, 2.5));

  ModelSpec spec;
  spec.arch = Architecture::FcBaseline;
  spec.units = 3;
  spec.graph_size = 9;
  const auto model = build_model(spec, gen_er(9, 0.3, 2), init_params(spec, 1));
  CHECK(model.tape.value(model.output).rows() == 1);
  CHECK(model.tape.value(model.output).cols() == 9);
  CHECK_THROWS_AS(build_model(spec, gen_er(8, 0.3, 2), init_params(spec, 1)), ShapeError);
}

TEST_CASE("GIN propagation from ScaleAdd matches the explicit operator") {
  const Graph g = gen_ba(10, 2, 9);
  Rng rng(1);
  const double eps = 0.3;
  Tape t;
  const auto h = t.constant(gml::testing::random_matrix(10, 2, rng));
  const auto w = t.parameter(gml::testing::random_matrix(2, 3, rng));
  const auto y = gin_layer(t, t.constant(g.adjacency()), h, w, eps, Activation::Relu);
  Matrix op = g.adjacency();
  for (std::size_t i = 0; i < 10; ++i) op(i, i) += 1.0 + eps;
  const auto ref = t.activation(t.matmul(t.matmul(t.constant(op), h), w), Activation::Relu);
  CHECK(max_abs_diff(t.value(y), t.value(ref)) < 1e-12);
}

TEST_CASE("spec validation and parameter layout") {
  ModelSpec spec;
  spec.layers = 0;
  CHECK_THROWS_AS(spec.validate(), ShapeError);
  spec.layers = 2;
  spec.head = HeadKind::ClassifierMeanPool;
  spec.classes = 1;
  CHECK_THROWS_AS(spec.validate(), ShapeError);
  spec.classes = 2;
  spec.arch = Architecture::ModularGcn;
  spec.rules.clear();
  CHECK_THROWS_AS(spec.validate(), ShapeError);
  spec.rules = {PropagationRule::Adjacency, PropagationRule::Adjacency};
  CHECK_THROWS_AS(spec.validate(), ShapeError);

  // Equal parameter counts for the ablation widths used by the experiments.
  ModelSpec m;
  m.arch = Architecture::ModularGcn;
  m.layers = 3;
  m.units = 16;
  m.residual = true;
  m.head = HeadKind::ClassifierMeanPool;
  m.rules.assign(kAllRules.begin(), kAllRules.end());
  m.branch_units = 16;
  const auto reference = parameter_count(m);
  m.rules = {PropagationRule::Adjacency, PropagationRule::SymmetricNorm};
  m.branch_units = 24;
  CHECK(parameter_count(m) == reference);
  m.rules = {PropagationRule::Adjacency};
  m.branch_units = 48;
  CHECK(parameter_count(m) == reference);

  ModelSpec plain;
  auto params = init_params(plain, 1);
  params.entries.pop_back();
  CHECK_THROWS_AS(build_model(plain, gen_ba(5, 1, 1), params), ShapeError);
}

TEST_CASE("build_model is deterministic and the degree solution is exact") {
  const Graph g = gen_ba(20, 2, 3);
  ModelSpec spec;
  const auto params = constant_params(spec, 1.0, 0.0);
  const auto a = build_model(spec, g, params);
  const auto b = build_model(spec, g, params);
  CHECK(column(a.tape.value(a.output)) == degree_vector(g));
  CHECK(a.tape.value(a.output) == b.tape.value(b.output));
}

TEST_CASE("node outputs are permutation equivariant and pooled outputs invariant") {
  Rng rng(31);
  const Activation acts[] = {Activation::Linear, Activation::Relu, Activation::Sigmoid,
                             Activation::Tanh};
  for (int trial = 0; trial < 30; ++trial) {
    const Graph g = random_graph(4 + rng.below(8), rng);
    const auto perm = random_permutation(g.node_count(), trial);
    const Graph h = permute_nodes(g, perm);

    ModelSpec spec;
    spec.arch = trial % 2 ? Architecture::ModularGcn : Architecture::PlainGcn;
    if (spec.arch == Architecture::ModularGcn) spec.rules.assign(kAllRules.begin(), kAllRules.end());
    spec.layers = 1 + rng.below(3);
    spec.units = 1 + rng.below(4);
    spec.activation = acts[trial % 4];
    spec.residual = rng.bernoulli(0.5);
    const auto params = init_params(spec, trial);
    const auto a = build_model(spec, g, params);
    const auto b = build_model(spec, h, params);
    const auto& ya = a.tape.value(a.output);
    const auto& yb = b.tape.value(b.output);
    // Bit-exact equality is not guaranteed once summation order changes, so
    // compare to a few ulps of the output scale.
    double scale = 1.0;
    for (double v : ya.data()) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(std::abs(yb(perm[i], 0) - ya(i, 0)) <= 1e-12 * scale);

    spec.head = HeadKind::ClassifierMeanPool;
    spec.classes = 3;
    const auto cp = init_params(spec, trial + 100);
    const auto ca = build_model(spec, g, cp);
    const auto cb = build_model(spec, h, cp);
    CHECK(max_abs_diff(ca.tape.value(ca.output), cb.tape.value(cb.output)) < 1e-12);
  }
}

TEST_CASE("full models pass gradient checks") {
  Rng rng(77);
  const Activation acts[] = {Activation::Linear, Activation::Relu, Activation::Sigmoid,
                             Activation::Tanh};
  for (int trial = 0; trial < 24; ++trial) {
    const Graph g = gen_ba(6 + rng.below(5), 1 + rng.below(2), trial);
    ModelSpec spec;
    spec.arch = trial % 3 == 0 ? Architecture::PlainGcn : Architecture::ModularGcn;
    if (spec.arch == Architecture::ModularGcn) spec.rules.assign(kAllRules.begin(), kAllRules.end());
    spec.layers = 1 + rng.below(3);
    spec.units = 1 + rng.below(3);
    spec.activation = acts[trial % 4];
    spec.residual = trial % 2 == 0;
    spec.head = trial % 4 < 2 ? HeadKind::ClassifierMeanPool : HeadKind::RegressionAggregate;
    // Random biases keep relu inputs away from the kink at exactly zero.
    auto params = init_params(spec, trial);
    for (auto& e : params.entries) {
      if (e.name.ends_with(".b")) e.value = gml::testing::random_matrix(1, e.value.cols(), rng, 0.5);
    }
    auto model = build_model(spec, g, params);
    NodeId loss;
    if (spec.head == HeadKind::ClassifierMeanPool) {
      loss = model.tape.cross_entropy_loss(model.logits, model.tape.constant(Matrix{{0, 1}}));
    } else {
      // Unit-scale targets; raw moments make the loss large enough for
      // finite-difference roundoff to dominate tiny saturated gradients.
      loss = model.tape.mse_loss(
          model.output, model.tape.constant(gml::testing::random_matrix(g.node_count(), 1, rng)));
    }
    INFO("trial " << trial);
    CHECK(gradients_match(model.tape, loss, 1e-5));
  }
}

TEST_CASE("names round trip") {
  CHECK(parse_architecture("modular") == Architecture::ModularGcn);
  CHECK(parse_head(to_string(HeadKind::ClassifierMeanPool)) == HeadKind::ClassifierMeanPool);
  CHECK_THROWS(parse_architecture("mlp"));
}
