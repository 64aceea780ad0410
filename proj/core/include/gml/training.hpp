#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gml/graph.hpp"
#include "gml/graphgen.hpp"
#include "gml/matrix.hpp"
#include "gml/nn.hpp"

namespace gml {

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t epochs = 300;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double train_frac = 0.7;
  double val_frac = 0.15;
  double test_frac = 0.15;
  std::size_t patience = 30;

  // Throws ParameterError if fractions do not sum to 1 or a count is zero.
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainReport {
  std::string metric;  // "mse" (normalized units) or "accuracy"
  std::vector<EpochRecord> epochs;
  double best_val_loss = 0.0;
  std::size_t best_epoch = 0;
  double test_metric = 0.0;
  double test_loss = 0.0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  // Standardization applied to regression targets.
  double target_mean = 0.0;
  double target_scale = 1.0;
  ModelParams best_params;
};

// One row per epoch, then a summary row. Columns: row,epoch,train_loss,val_loss,metric;
// `metric` holds the best validation loss so far on epoch rows and the test metric on the
// summary row, whose epoch column is the best epoch.
void write_report_csv(std::ostream& out, const TrainReport& report);

struct Split {
  std::vector<std::size_t> train, val, test;
};

/// Deterministic partition of [0, size). With labels, each class is split
/// separately so every part keeps the class balance. Throws ParameterError
/// when size < 10.
Split split(std::size_t size, std::span<const int> labels, const TrainConfig& config);

struct AdamState {
  std::vector<Matrix> m, v;
  std::size_t step = 0;
};

/// One bias-corrected Adam update in place.
void adam_step(std::span<Matrix> params, std::span<const Matrix> grads, AdamState& state,
               const TrainConfig& config);

struct RegressionSample {
  Graph graph;
  std::vector<double> target;
};

/// Minimizes the per-node MSE of standardized targets (mean 0, variance 1 over
/// every target entry of the dataset); reports MSE in those units.
TrainReport train_regression(const ModelSpec& spec, std::span<const RegressionSample> data,
                             const TrainConfig& config);
TrainReport train_regression(const ModelSpec& spec, std::span<const RegressionSample> train,
                             std::span<const RegressionSample> val,
                             std::span<const RegressionSample> test, const TrainConfig& config);

/// Minimizes the cross-entropy of mean-pooled class probabilities; the test
/// metric is accuracy of the arg-max class.
TrainReport train_classifier(const ModelSpec& spec, std::span<const LabeledGraph> data,
                             const TrainConfig& config);

}  // namespace gml
