#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "gml/error.hpp"
#include "gml/graph_ops.hpp"
#include "gml/graphgen.hpp"
#include "gml/rng.hpp"
#include "gml/training.hpp"

using namespace gml;

namespace {

std::vector<RegressionSample> degree_samples(std::size_t count, std::size_t n, std::uint64_t seed) {
  std::vector<RegressionSample> out;
  for (std::size_t i = 0; i < count; ++i) {
    Graph g = gen_ba(n, 2, derive_seed(seed, i));
    auto target = degree_vector(g);
    out.push_back({std::move(g), std::move(target)});
  }
  return out;
}

}  // namespace

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.val_frac = 0.2;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.lr = 0.0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("split sizes, disjointness and determinism") {
  TrainConfig c;
  c.seed = 4;
  const Split s = split(1000, {}, c);
  CHECK(s.train.size() == 700);
  CHECK(s.val.size() == 150);
  CHECK(s.test.size() == 150);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 1000);
  CHECK(*all.rbegin() == 999);

  const Split again = split(1000, {}, c);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);
  c.seed = 5;
  CHECK(split(1000, {}, c).test != s.test);

  CHECK_THROWS_AS(split(9, {}, c), ParameterError);
  const std::vector<int> short_labels(5, 0);
  CHECK_THROWS_AS(split(10, short_labels, c), ParameterError);
}

TEST_CASE("stratified split keeps class balance") {
  TrainConfig c;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    c.seed = seed;
    std::vector<int> labels(1000);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>((i * 7 + seed) % 2);
    const Split s = split(labels.size(), labels, c);
    for (const auto* part : {&s.train, &s.val, &s.test}) {
      const auto ones = std::count_if(part->begin(), part->end(), [&](auto i) { return labels[i] == 1; });
      const auto zeros = static_cast<std::ptrdiff_t>(part->size()) - ones;
      CHECK(std::abs(ones - zeros) <= 1);
    }
  }
}

TEST_CASE("adam step") {
  TrainConfig c;
  std::vector<Matrix> params{Matrix{{1.0, -2.0}}};
  const std::vector<Matrix> grads{Matrix{{0.5, -3.0}}};
  AdamState state;
  adam_step(params, grads, state, c);
  // First bias-corrected step moves each entry by lr·g/(|g| + eps).
  CHECK(params[0](0, 0) == doctest::Approx(1.0 - 1e-3 * 0.5 / (0.5 + 1e-8)).epsilon(1e-14));
  CHECK(params[0](0, 1) == doctest::Approx(-2.0 + 1e-3 * 3.0 / (3.0 + 1e-8)).epsilon(1e-14));
  CHECK(state.step == 1);

  std::vector<Matrix> still{Matrix{{0.25}}};
  AdamState fresh;
  for (int i = 0; i < 10; ++i) adam_step(still, std::vector<Matrix>{Matrix{{0.0}}}, fresh, c);
  CHECK(still[0](0, 0) == 0.25);

  CHECK_THROWS_AS(adam_step(params, std::vector<Matrix>{Matrix(2, 2)}, state, c), ShapeError);
}

TEST_CASE("zero targets are fit exactly") {
  auto data = degree_samples(20, 10, 3);
  for (auto& s : data) std::fill(s.target.begin(), s.target.end(), 0.0);
  TrainConfig c;
  c.lr = 1e-2;
  c.epochs = 3000;
  c.patience = 3000;
  const auto report = train_regression(ModelSpec{}, data, c);
  CHECK(report.test_metric < 1e-8);
}

TEST_CASE("degree target is learned by one linear layer") {
  const auto data = degree_samples(60, 20, 8);
  TrainConfig c;
  c.lr = 1e-2;
  c.epochs = 1500;
  c.patience = 200;
  ModelSpec spec;
  const auto report = train_regression(spec, data, c);
  CHECK(report.metric == "mse");
  CHECK(report.test_metric < 1e-6);
  CHECK(report.target_scale > 0.0);
}

TEST_CASE("single-sample loss does not increase at a small learning rate") {
  const auto data = degree_samples(3, 12, 5);
  const std::span<const RegressionSample> all(data);
  TrainConfig c;
  c.lr = 1e-4;
  c.epochs = 50;
  c.patience = 50;
  const auto report = train_regression(ModelSpec{}, all.first(1), all.subspan(1, 1), all.subspan(2), c);
  REQUIRE(report.epochs.size() == 50);
  for (std::size_t i = 1; i < report.epochs.size(); ++i) {
    CHECK(report.epochs[i].train_loss <= report.epochs[i - 1].train_loss);
  }
}

TEST_CASE("training is deterministic for a fixed seed") {
  const auto data = degree_samples(30, 12, 2);
  TrainConfig c;
  c.epochs = 20;
  c.seed = 17;
  ModelSpec spec;
  spec.layers = 2;
  spec.units = 3;
  spec.activation = Activation::Tanh;
  const auto a = train_regression(spec, data, c);
  const auto b = train_regression(spec, data, c);
  std::ostringstream sa, sb;
  write_report_csv(sa, a);
  write_report_csv(sb, b);
  CHECK(sa.str() == sb.str());
  c.seed = 18;
  const auto d = train_regression(spec, data, c);
  CHECK(d.epochs.back().train_loss != a.epochs.back().train_loss);
}

TEST_CASE("indistinguishable classes give chance accuracy") {
  LabeledGraphSet data;
  for (std::size_t i = 0; i < 300; ++i) {
    const Graph g = gen_ba(10, 2, i);
    data.push_back({g, 0, 0, -1});
    data.push_back({g, 1, 0, -1});
  }
  ModelSpec spec;
  spec.arch = Architecture::ModularGcn;
  spec.rules.assign(kAllRules.begin(), kAllRules.end());
  spec.head = HeadKind::ClassifierMeanPool;
  spec.units = 4;
  TrainConfig c;
  c.epochs = 5;
  const auto report = train_classifier(spec, data, c);
  CHECK(report.metric == "accuracy");
  CHECK(std::abs(report.test_metric - 0.5) <= 0.07);
}

TEST_CASE("classifier input checks") {
  ModelSpec spec;
  spec.head = HeadKind::ClassifierMeanPool;
  LabeledGraphSet one_class;
  for (std::size_t i = 0; i < 20; ++i) one_class.push_back({gen_ba(8, 1, i), 0, 0, -1});
  CHECK_THROWS_AS(train_classifier(spec, one_class, TrainConfig{}), ParameterError);
  one_class[0].label = 2;
  CHECK_THROWS_AS(train_classifier(spec, one_class, TrainConfig{}), ParameterError);
  CHECK_THROWS_AS(train_regression(spec, degree_samples(20, 8, 1), TrainConfig{}), ShapeError);

  std::vector<RegressionSample> bad = degree_samples(20, 8, 1);
  bad[3].target.pop_back();
  CHECK_THROWS_AS(train_regression(ModelSpec{}, bad, TrainConfig{}), ShapeError);
}

TEST_CASE("report CSV format") {
  TrainReport r;
  r.metric = "mse";
  r.epochs = {{1, 2.0, 1.5}, {2, 1.0, 1.75}, {3, 0.5, 0.25}};
  r.best_epoch = 3;
  r.best_val_loss = 0.25;
  r.test_metric = 0.125;
  std::ostringstream out;
  write_report_csv(out, r);
  CHECK(out.str() ==
        "row,epoch,train_loss,val_loss,metric\n"
        "epoch,1,2,1.5,1.5\n"
        "epoch,2,1,1.75,1.5\n"
        "epoch,3,0.5,0.25,0.25\n"
        "summary,3,0.5,0.25,0.125\n");
}
