#include "gml/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

#include "gml/error.hpp"
#include "gml/rng.hpp"

namespace gml {

void TrainConfig::validate() const {
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
    throw ParameterError("TrainConfig: split fractions must sum to 1");
  }
  if (train_frac <= 0.0 || val_frac < 0.0 || test_frac < 0.0) {
    throw ParameterError("TrainConfig: split fractions must be non-negative, train positive");
  }
  if (epochs == 0 || batch_size == 0 || patience == 0) {
    throw ParameterError("TrainConfig: epochs, batch size and patience must be positive");
  }
  if (!(lr > 0.0)) throw ParameterError("TrainConfig: learning rate must be positive");
}

void write_report_csv(std::ostream& out, const TrainReport& report) {
  out << "row,epoch,train_loss,val_loss,metric\n";
  double best = std::numeric_limits<double>::infinity();
  double best_train = 0.0;
  char buf[160];
  for (const auto& e : report.epochs) {
    best = std::min(best, e.val_loss);
    if (e.epoch == report.best_epoch) best_train = e.train_loss;
    std::snprintf(buf, sizeof buf, "epoch,%zu,%.10g,%.10g,%.10g\n", e.epoch, e.train_loss,
                  e.val_loss, best);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "summary,%zu,%.10g,%.10g,%.10g\n", report.best_epoch, best_train,
                report.best_val_loss, report.test_metric);
  out << buf;
}

namespace {

// Part sizes for n items: val and test rounded half-up, train takes the rest.
std::array<std::size_t, 3> part_sizes(std::size_t n, const TrainConfig& c) {
  const auto round = [](double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); };
  std::size_t val = round(static_cast<double>(n) * c.val_frac);
  std::size_t test = round(static_cast<double>(n) * c.test_frac);
  if (val + test > n) test = n - val;
  return {n - val - test, val, test};
}

}  // namespace

Split split(std::size_t size, std::span<const int> labels, const TrainConfig& config) {
  config.validate();
  if (size < 10) throw ParameterError("split: dataset must contain at least 10 items");
  if (!labels.empty() && labels.size() != size) {
    throw ParameterError("split: label count does not match dataset size");
  }
  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < size; ++i) strata[labels.empty() ? 0 : labels[i]].push_back(i);

  Rng rng(derive_seed(config.seed, 0x5B1D));
  Split out;
  for (auto& [label, idx] : strata) {
    rng.shuffle(std::span<std::size_t>(idx));
    const auto [n_train, n_val, n_test] = part_sizes(idx.size(), config);
    out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.val.insert(out.val.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                   idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                    idx.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

void adam_step(std::span<Matrix> params, std::span<const Matrix> grads, AdamState& state,
               const TrainConfig& config) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter/gradient count mismatch");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.rows(), p.cols());
      state.v.emplace_back(p.rows(), p.cols());
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params[k].same_shape(grads[k])) {
      throw ShapeError("adam_step: gradient " + grads[k].shape_string() + " for parameter " +
                       params[k].shape_string());
    }
    auto p = params[k].data();
    const auto g = grads[k].data();
    auto m = state.m[k].data();
    auto v = state.v[k].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      p[i] -= config.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.adam_eps);
    }
  }
}

namespace {

struct Prepared {
  GraphOperators ops;
  Matrix target;  // regression target shaped like the model output, or 1×c one-hot
  int label = 0;
};

struct Evaluation {
  double loss = 0.0;
  double metric = 0.0;
};

enum class Task { Regression, Classification };

NodeId record_loss(Task task, BuiltModel& model, const Prepared& sample) {
  const NodeId target = model.tape.constant(sample.target);
  return task == Task::Regression ? model.tape.mse_loss(model.output, target)
                                  : model.tape.cross_entropy_loss(model.logits, target);
}

Evaluation evaluate(Task task, const ModelSpec& spec, const ModelParams& params,
                    std::span<const Prepared> samples) {
  Evaluation ev;
  if (samples.empty()) return ev;
  std::size_t correct = 0;
  for (const auto& s : samples) {
    BuiltModel model = build_model(spec, s.ops, params);
    const NodeId loss = record_loss(task, model, s);
    ev.loss += model.tape.value(loss)(0, 0);
    if (task == Task::Classification) {
      const auto probs = model.tape.value(model.output).row_span(0);
      const auto best = std::max_element(probs.begin(), probs.end()) - probs.begin();
      if (best == s.label) ++correct;
    }
  }
  const double n = static_cast<double>(samples.size());
  ev.loss /= n;
  ev.metric = task == Task::Regression ? ev.loss : static_cast<double>(correct) / n;
  return ev;
}

TrainReport run_training(Task task, const ModelSpec& spec, std::span<const Prepared> train,
                         std::span<const Prepared> val, std::span<const Prepared> test,
                         const TrainConfig& config) {
  config.validate();
  if (train.empty()) throw ParameterError("training: empty training split");
  const auto start = std::chrono::steady_clock::now();

  TrainReport report;
  report.metric = task == Task::Regression ? "mse" : "accuracy";
  report.seed = config.seed;

  ModelParams params = init_params(spec, derive_seed(config.seed, 0x1417));
  AdamState adam;
  Rng order_rng(derive_seed(config.seed, 0x0BDE));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<Matrix> grad_sum, values;
  report.best_val_loss = std::numeric_limits<double>::infinity();
  report.best_params = params;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    double train_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      grad_sum.clear();
      // Gradients are summed in batch order, so results do not depend on scheduling.
      for (std::size_t k = begin; k < end; ++k) {
        const Prepared& s = train[order[k]];
        BuiltModel model = build_model(spec, s.ops, params);
        const NodeId loss = record_loss(task, model, s);
        train_loss += model.tape.value(loss)(0, 0);
        auto grads = model.tape.backward(loss);
        if (grad_sum.empty()) {
          grad_sum = std::move(grads);
        } else {
          for (std::size_t p = 0; p < grads.size(); ++p) grad_sum[p] += grads[p];
        }
      }
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (auto& g : grad_sum) g *= inv;
      values.clear();
      for (auto& e : params.entries) values.push_back(std::move(e.value));
      adam_step(values, grad_sum, adam, config);
      for (std::size_t p = 0; p < values.size(); ++p) params.entries[p].value = std::move(values[p]);
    }
    train_loss /= static_cast<double>(train.size());

    const double val_loss = val.empty() ? train_loss : evaluate(task, spec, params, val).loss;
    report.epochs.push_back({epoch, train_loss, val_loss});
    if (val_loss < report.best_val_loss) {
      report.best_val_loss = val_loss;
      report.best_epoch = epoch;
      report.best_params = params;
    } else if (epoch - report.best_epoch >= config.patience) {
      break;
    }
  }

  const auto final_eval = evaluate(task, spec, report.best_params, test.empty() ? val : test);
  report.test_loss = final_eval.loss;
  report.test_metric = final_eval.metric;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<Prepared> prepare_regression(const ModelSpec& spec,
                                         std::span<const RegressionSample> samples, double mean,
                                         double scale) {
  std::vector<Prepared> out;
  out.reserve(samples.size());
  const bool fc = spec.arch == Architecture::FcBaseline;
  for (const auto& s : samples) {
    const std::size_t n = s.graph.node_count();
    if (s.target.size() != n) {
      throw ShapeError("train_regression: target length " + std::to_string(s.target.size()) +
                       " for a graph with " + std::to_string(n) + " nodes");
    }
    Prepared p{GraphOperators::build(s.graph, spec.rules), fc ? Matrix(1, n) : Matrix(n, 1), 0};
    for (std::size_t i = 0; i < n; ++i) p.target.data()[i] = (s.target[i] - mean) / scale;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

TrainReport train_regression(const ModelSpec& spec, std::span<const RegressionSample> train,
                             std::span<const RegressionSample> val,
                             std::span<const RegressionSample> test, const TrainConfig& config) {
  spec.validate();
  if (spec.head != HeadKind::RegressionAggregate) {
    throw ShapeError("train_regression: model must use the regression head");
  }
  double sum = 0.0, sq = 0.0;
  std::size_t count = 0;
  for (auto part : {train, val, test}) {
    for (const auto& s : part) {
      for (double v : s.target) {
        sum += v;
        sq += v * v;
        ++count;
      }
    }
  }
  const double mean = count ? sum / static_cast<double>(count) : 0.0;
  const double var = count ? std::max(0.0, sq / static_cast<double>(count) - mean * mean) : 0.0;
  const double scale = var > 1e-24 ? std::sqrt(var) : 1.0;

  const auto tr = prepare_regression(spec, train, mean, scale);
  const auto va = prepare_regression(spec, val, mean, scale);
  const auto te = prepare_regression(spec, test, mean, scale);
  TrainReport report = run_training(Task::Regression, spec, tr, va, te, config);
  report.target_mean = mean;
  report.target_scale = scale;
  return report;
}

TrainReport train_regression(const ModelSpec& spec, std::span<const RegressionSample> data,
                             const TrainConfig& config) {
  const Split parts = split(data.size(), {}, config);
  const auto gather = [&](const std::vector<std::size_t>& idx) {
    std::vector<RegressionSample> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(data[i]);
    return out;
  };
  const auto tr = gather(parts.train), va = gather(parts.val), te = gather(parts.test);
  return train_regression(spec, tr, va, te, config);
}

TrainReport train_classifier(const ModelSpec& spec, std::span<const LabeledGraph> data,
                             const TrainConfig& config) {
  spec.validate();
  if (spec.head != HeadKind::ClassifierMeanPool) {
    throw ShapeError("train_classifier: model must use the classifier head");
  }
  std::vector<int> labels;
  labels.reserve(data.size());
  for (const auto& d : data) {
    if (d.label < 0 || static_cast<std::size_t>(d.label) >= spec.classes) {
      throw ParameterError("train_classifier: label " + std::to_string(d.label) +
                           " outside [0, classes)");
    }
    labels.push_back(d.label);
  }
  std::vector<int> distinct = labels;
  std::sort(distinct.begin(), distinct.end());
  if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 2) {
    throw ParameterError("train_classifier: at least two classes must be present");
  }

  const Split parts = split(data.size(), labels, config);
  const auto prepare = [&](const std::vector<std::size_t>& idx) {
    std::vector<Prepared> out;
    out.reserve(idx.size());
    for (auto i : idx) {
      Prepared p{GraphOperators::build(data[i].graph, spec.rules), Matrix(1, spec.classes),
                 data[i].label};
      p.target(0, static_cast<std::size_t>(data[i].label)) = 1.0;
      out.push_back(std::move(p));
    }
    return out;
  };
  const auto tr = prepare(parts.train), va = prepare(parts.val), te = prepare(parts.test);
  return run_training(Task::Classification, spec, tr, va, te, config);
}

}  // namespace gml
