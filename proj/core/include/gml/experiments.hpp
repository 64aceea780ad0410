#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gml/autodiff.hpp"
#include "gml/graph_ops.hpp"
#include "gml/graphgen.hpp"
#include "gml/training.hpp"

namespace gml {

/// Optimizer budget for one experiment; the remaining Adam settings come from
/// ExperimentConfig::train.
struct Budget {
  std::size_t epochs = 300;
  std::size_t patience = 30;
  double lr = 1e-3;
};

struct ExperimentConfig {
  std::filesystem::path out_dir = ".";
  std::uint64_t data_seed = 1;      // dataset generation
  std::uint64_t train_seed = 1001;  // initialization and batch order
  std::size_t seeds = 3;            // training seeds per cell; the median is reported
  TrainConfig train;

  // Fully connected baseline on ER graphs, degree target.
  std::size_t fc_n = 20;
  double fc_p = 0.2;
  std::vector<std::size_t> fc_units{1, 2, 5, 10, 20, 50};
  std::vector<std::size_t> fc_samples{500, 1000, 5000, 10000};
  std::size_t fc_holdout = 300;  // size of the shared validation and test sets
  Budget fc_budget{60, 15, 3e-3};

  // Single GCN layer on BA graphs, degree target.
  std::size_t gcn_n = 20;
  std::size_t gcn_m = 2;
  std::vector<PropagationRule> gcn_rules{PropagationRule::Adjacency, PropagationRule::RandomWalk};
  std::vector<std::size_t> gcn_samples{50, 200, 1000};
  std::size_t gcn_holdout = 100;
  Budget gcn_budget{2000, 200, 1e-2};

  // Depth against moment order, plain GCN with rule A on BA graphs.
  std::size_t grid_n = 20;
  std::size_t grid_m = 2;
  std::vector<std::size_t> grid_orders{1, 2, 3};
  std::vector<std::size_t> grid_layers{1, 2, 3, 4};
  std::vector<Activation> grid_activations{Activation::Linear, Activation::Relu,
                                           Activation::Sigmoid, Activation::Tanh};
  std::size_t grid_units = 8;
  std::size_t grid_residual_units = 8;
  std::size_t grid_samples = 200;
  Budget grid_budget{1000, 200, 1e-2};

  // Mixed-order target Σ (A + A² + A³)·1 with and without the residual head.
  std::vector<double> mixed_coefficients{1.0, 1.0, 1.0};
  std::size_t mixed_layers = 3;
  std::size_t mixed_units = 4;

  // Graph classification with the modular model.
  std::vector<BenchmarkKind> cls_tasks{BenchmarkKind::BaVsEr, BenchmarkKind::BaVsConfig};
  std::vector<std::size_t> cls_sizes{10, 20, 30, 50};
  std::vector<std::size_t> cls_layers{1, 2, 3};
  std::vector<std::size_t> cls_units{8, 16};
  std::size_t cls_per_class = 500;
  std::size_t cls_seeds = 1;
  // Linear blocks saturate the pooled softmax on the rewired task at this
  // scale; tanh keeps it trainable.
  Activation cls_activation = Activation::Tanh;
  Budget cls_budget{250, 40, 1e-3};

  // Rule-subset ablation, BA vs ER.
  std::size_t abl_n = 30;
  std::size_t abl_layers = 3;
  std::size_t abl_units = 16;
  std::vector<std::vector<PropagationRule>> abl_subsets{
      {PropagationRule::Adjacency},
      {PropagationRule::SymmetricNorm},
      {PropagationRule::Adjacency, PropagationRule::SymmetricNorm},
      {PropagationRule::Adjacency, PropagationRule::RandomWalk, PropagationRule::SymmetricNorm}};
  Activation abl_activation = Activation::Linear;
  Budget abl_budget{300, 30, 1e-3};

  // KS statistics of node moments, BA graphs against their rewirings.
  std::size_t ks_n = 30;
  std::size_t ks_per_class = 100;
  std::vector<std::size_t> ks_orders{1, 2, 3, 4};
  std::size_t ks_pairs = 500;

  // Throws ConfigError naming the first empty axis or invalid value.
  void validate() const;
};

struct FcRow {
  std::size_t units = 0, samples = 0;
  double best_val_mse = 0.0, test_mse = 0.0;
};

struct SingleGcnRow {
  PropagationRule rule{};
  std::size_t samples = 0;
  std::string curve_file;
  double test_mse = 0.0;
};

struct MomentsRow {
  std::size_t order = 0, layers = 0;
  Activation activation{};
  bool residual = false;
  double test_mse = 0.0;
};

struct MixedRow {
  bool residual = false, bias = false;
  double test_mse = 0.0;
};

struct ClassificationRow {
  BenchmarkKind task{};
  std::size_t n = 0, layers = 0, units = 0;
  double accuracy = 0.0;
};

struct AblationRow {
  std::vector<PropagationRule> subset;
  std::size_t branch_units = 0;
  std::size_t parameters = 0;
  double accuracy = 0.0;
};

struct KsRow {
  std::size_t order = 0, pair = 0;
  bool real_fake = false;
  double statistic = 0.0;
};

// Each experiment writes <out_dir>/<id>.csv and returns its rows.
std::vector<FcRow> exp_fc_sweep(const ExperimentConfig& cfg);
std::vector<SingleGcnRow> exp_single_gcn(const ExperimentConfig& cfg);
std::vector<MomentsRow> exp_moments_grid(const ExperimentConfig& cfg, bool residual);
std::vector<MixedRow> exp_mixed_moment(const ExperimentConfig& cfg);
std::vector<ClassificationRow> exp_classification_sweep(const ExperimentConfig& cfg);
std::vector<AblationRow> exp_ablation(const ExperimentConfig& cfg);
std::vector<KsRow> exp_ks(const ExperimentConfig& cfg);

/// Branch width for a rule subset whose parameter count is closest to the
/// reference count (ties go to the wider branch).
std::size_t matched_branch_units(const ModelSpec& spec, std::size_t reference_parameters);

// "A+DAD" style label for a rule subset.
std::string subset_label(const std::vector<PropagationRule>& rules);

// The first seven ids are the run_all defaults; mixed_moment runs on request.
inline constexpr const char* kExperimentIds[] = {
    "fc_sweep",       "single_gcn",           "moments_grid", "moments_grid_residual",
    "classification_sweep", "ablation", "ks", "mixed_moment"};
inline constexpr std::size_t kDefaultExperimentCount = 7;

struct ManifestEntry {
  std::string id;
  std::filesystem::path csv;
  std::uint64_t data_seed = 0;
  std::uint64_t train_seed = 0;
  std::string config_hash;
  double runtime_seconds = 0.0;
};

/// Runs one experiment by id; throws ConfigError for an unknown id.
/// `config_text` is the resolved configuration, hashed into the entry.
ManifestEntry run_experiment(const std::string& id, const ExperimentConfig& cfg,
                             std::string_view config_text = {});

/// Runs the seven default experiments (the moments grid twice) in fixed
/// order and rewrites <out_dir>/manifest.txt after each one, so a failure
/// leaves a partial manifest behind.
std::vector<ManifestEntry> run_all(const ExperimentConfig& cfg, std::string_view config_text = {});

// Flat "key = value" text: entry fields as <id>.<field>, then the config
// lines prefixed with "config.".
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries,
                    std::string_view config_text = {});

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string config_hash(std::string_view text);

}  // namespace gml
