#include "gml/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "gml/error.hpp"
#include "gml/graph_ops.hpp"
#include "gml/rng.hpp"
#include "gml/stats.hpp"

namespace gml {

namespace {

// Dataset tags, combined with data_seed.
enum : std::uint64_t {
  kDataFc = 0xD001,
  kDataGcn = 0xD002,
  kDataGrid = 0xD003,
  kDataMixed = 0xD004,
  kDataCls = 0xD005,
  kDataAbl = 0xD006,
  kDataKs = 0xD007,
};

// Training tags, combined with train_seed.
enum : std::uint64_t {
  kTrainFc = 0x7001,
  kTrainGcn = 0x7002,
  kTrainGrid = 0x7003,
  kTrainMixed = 0x7004,
  kTrainCls = 0x7005,
  kTrainAbl = 0x7006,
};

template <class T>
void require_axis(const std::vector<T>& axis, const char* name) {
  if (axis.empty()) throw ConfigError(std::string("experiment axis ") + name + " is empty");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_csv(const ExperimentConfig& cfg, const std::string& id, const char* header) {
  std::filesystem::create_directories(cfg.out_dir);
  const auto path = cfg.out_dir / (id + ".csv");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << header << '\n';
  return out;
}

TrainConfig make_train(const ExperimentConfig& cfg, const Budget& budget, std::uint64_t seed) {
  TrainConfig t = cfg.train;
  t.epochs = budget.epochs;
  t.patience = budget.patience;
  t.lr = budget.lr;
  t.seed = seed;
  return t;
}

std::uint64_t cell_seed(const ExperimentConfig& cfg, std::uint64_t tag, std::uint64_t cell,
                        std::size_t k) {
  return derive_seed(derive_seed(derive_seed(cfg.train_seed, tag), cell), k);
}

std::vector<RegressionSample> ba_samples(std::size_t count, std::size_t n, std::size_t m,
                                         std::uint64_t seed, const MomentTarget& target) {
  std::vector<RegressionSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Graph g = gen_ba(n, m, derive_seed(seed, i));
    auto y = mixed_moment_vector(g, target);
    out.push_back({std::move(g), std::move(y)});
  }
  return out;
}

struct Median {
  std::vector<double> a, b;
  void add(double x, double y = 0.0) {
    a.push_back(x);
    b.push_back(y);
  }
};

}  // namespace

void ExperimentConfig::validate() const {
  require_axis(fc_units, "fc.units");
  require_axis(fc_samples, "fc.samples");
  require_axis(gcn_rules, "gcn.rules");
  require_axis(gcn_samples, "gcn.samples");
  require_axis(grid_orders, "grid.orders");
  require_axis(grid_layers, "grid.layers");
  require_axis(grid_activations, "grid.activations");
  require_axis(mixed_coefficients, "mixed.coefficients");
  require_axis(cls_tasks, "cls.tasks");
  require_axis(cls_sizes, "cls.sizes");
  require_axis(cls_layers, "cls.layers");
  require_axis(cls_units, "cls.units");
  require_axis(abl_subsets, "abl.subsets");
  require_axis(ks_orders, "ks.orders");
  if (seeds == 0 || cls_seeds == 0) throw ConfigError("experiment seed counts must be positive");
  if (fc_holdout == 0 || gcn_holdout == 0) throw ConfigError("holdout sizes must be positive");
  if (grid_samples < 10) throw ConfigError("grid.samples must be at least 10");
  if (ks_pairs == 0) throw ConfigError("ks.pairs must be positive");
  for (const auto& s : abl_subsets) require_axis(s, "abl.subsets entry");
  try {
    train.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

std::string subset_label(const std::vector<PropagationRule>& rules) {
  std::string out;
  for (auto r : rules) {
    if (!out.empty()) out += '+';
    out += to_string(r);
  }
  return out;
}

std::size_t matched_branch_units(const ModelSpec& spec, std::size_t reference_parameters) {
  ModelSpec s = spec;
  std::size_t best = 1;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t b = 1; b <= 16 * std::max<std::size_t>(spec.units, 1); ++b) {
    s.branch_units = b;
    const double gap = std::abs(static_cast<double>(parameter_count(s)) -
                                static_cast<double>(reference_parameters));
    if (gap <= best_gap) {
      best_gap = gap;
      best = b;
    }
  }
  return best;
}

std::vector<FcRow> exp_fc_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t max_samples = *std::max_element(cfg.fc_samples.begin(), cfg.fc_samples.end());
  const std::uint64_t data = derive_seed(cfg.data_seed, kDataFc);
  std::vector<RegressionSample> all;
  all.reserve(max_samples + 2 * cfg.fc_holdout);
  for (std::size_t i = 0; i < max_samples + 2 * cfg.fc_holdout; ++i) {
    Graph g = gen_er(cfg.fc_n, cfg.fc_p, derive_seed(data, i));
    auto y = moment_vector(g, 1);
    all.push_back({std::move(g), std::move(y)});
  }
  const std::span<const RegressionSample> val(all.data(), cfg.fc_holdout);
  const std::span<const RegressionSample> test(all.data() + cfg.fc_holdout, cfg.fc_holdout);
  const RegressionSample* pool = all.data() + 2 * cfg.fc_holdout;

  auto out = open_csv(cfg, "fc_sweep", "units,samples,best_val_mse,test_mse");
  std::vector<FcRow> rows;
  std::uint64_t cell = 0;
  for (std::size_t units : cfg.fc_units) {
    for (std::size_t samples : cfg.fc_samples) {
      ModelSpec spec;
      spec.arch = Architecture::FcBaseline;
      spec.units = units;
      spec.graph_size = cfg.fc_n;
      Median med;
      for (std::size_t k = 0; k < cfg.seeds; ++k) {
        const auto report = train_regression(spec, std::span(pool, samples), val, test,
                                             make_train(cfg, cfg.fc_budget,
                                                        cell_seed(cfg, kTrainFc, cell, k)));
        med.add(report.best_val_loss, report.test_metric);
      }
      ++cell;
      FcRow row{units, samples, median(med.a), median(med.b)};
      out << row.units << ',' << row.samples << ',' << fmt(row.best_val_mse) << ','
          << fmt(row.test_mse) << '\n';
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<SingleGcnRow> exp_single_gcn(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t max_samples =
      *std::max_element(cfg.gcn_samples.begin(), cfg.gcn_samples.end());
  const auto all = ba_samples(max_samples + 2 * cfg.gcn_holdout, cfg.gcn_n, cfg.gcn_m,
                              derive_seed(cfg.data_seed, kDataGcn), MomentTarget::single(1));
  const std::span<const RegressionSample> val(all.data(), cfg.gcn_holdout);
  const std::span<const RegressionSample> test(all.data() + cfg.gcn_holdout, cfg.gcn_holdout);
  const RegressionSample* pool = all.data() + 2 * cfg.gcn_holdout;

  auto out = open_csv(cfg, "single_gcn", "rule,samples,curve_file,test_mse");
  std::vector<SingleGcnRow> rows;
  std::uint64_t cell = 0;
  for (auto rule : cfg.gcn_rules) {
    for (std::size_t samples : cfg.gcn_samples) {
      ModelSpec spec;
      spec.rules = {rule};
      std::vector<double> mse;
      SingleGcnRow row{rule, samples, {}, 0.0};
      row.curve_file =
          "single_gcn_" + std::string(to_string(rule)) + "_" + std::to_string(samples) + ".csv";
      for (std::size_t k = 0; k < cfg.seeds; ++k) {
        const auto report = train_regression(spec, std::span(pool, samples), val, test,
                                             make_train(cfg, cfg.gcn_budget,
                                                        cell_seed(cfg, kTrainGcn, cell, k)));
        mse.push_back(report.test_metric);
        if (k == 0) {
          std::ofstream curve(cfg.out_dir / row.curve_file, std::ios::binary);
          if (!curve) throw std::runtime_error("cannot write " + row.curve_file);
          write_report_csv(curve, report);
        }
      }
      ++cell;
      row.test_mse = median(mse);
      out << to_string(rule) << ',' << samples << ',' << row.curve_file << ','
          << fmt(row.test_mse) << '\n';
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<MomentsRow> exp_moments_grid(const ExperimentConfig& cfg, bool residual) {
  cfg.validate();
  const std::uint64_t data = derive_seed(cfg.data_seed, kDataGrid);
  const std::string id = residual ? "moments_grid_residual" : "moments_grid";
  auto out = open_csv(cfg, id, "order,layers,activation,residual,test_mse");
  std::vector<MomentsRow> rows;
  std::uint64_t cell = residual ? 1000 : 0;
  for (std::size_t order : cfg.grid_orders) {
    // The same graphs for every order; only the target changes.
    const auto samples =
        ba_samples(cfg.grid_samples, cfg.grid_n, cfg.grid_m, data, MomentTarget::single(order));
    for (std::size_t layers : cfg.grid_layers) {
      for (auto act : cfg.grid_activations) {
        ModelSpec spec;
        spec.layers = layers;
        spec.units = residual ? cfg.grid_residual_units : cfg.grid_units;
        spec.activation = act;
        spec.residual = residual;
        std::vector<double> mse;
        for (std::size_t k = 0; k < cfg.seeds; ++k) {
          mse.push_back(train_regression(spec, samples,
                                         make_train(cfg, cfg.grid_budget,
                                                    cell_seed(cfg, kTrainGrid, cell, k)))
                            .test_metric);
        }
        ++cell;
        MomentsRow row{order, layers, act, residual, median(mse)};
        out << order << ',' << layers << ',' << to_string(act) << ',' << (residual ? 1 : 0)
            << ',' << fmt(row.test_mse) << '\n';
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::vector<MixedRow> exp_mixed_moment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto samples = ba_samples(cfg.grid_samples, cfg.grid_n, cfg.grid_m,
                                  derive_seed(cfg.data_seed, kDataMixed),
                                  MomentTarget(cfg.mixed_coefficients));
  auto out = open_csv(cfg, "mixed_moment", "residual,bias,layers,units,test_mse");
  std::vector<MixedRow> rows;
  std::uint64_t cell = 0;
  for (bool residual : {true, false}) {
    ModelSpec spec;
    spec.layers = cfg.mixed_layers;
    spec.units = cfg.mixed_units;
    spec.residual = residual;
    spec.use_bias = residual;
    std::vector<double> mse;
    for (std::size_t k = 0; k < cfg.seeds; ++k) {
      mse.push_back(
          train_regression(spec, samples,
                           make_train(cfg, cfg.grid_budget, cell_seed(cfg, kTrainMixed, cell, k)))
              .test_metric);
    }
    ++cell;
    MixedRow row{residual, spec.use_bias, median(mse)};
    out << (residual ? 1 : 0) << ',' << (spec.use_bias ? 1 : 0) << ',' << spec.layers << ','
        << spec.units << ',' << fmt(row.test_mse) << '\n';
    rows.push_back(row);
  }
  return rows;
}

namespace {

ModelSpec classifier_spec(std::size_t layers, std::size_t units,
                          std::vector<PropagationRule> rules, Activation act) {
  ModelSpec spec;
  spec.arch = Architecture::ModularGcn;
  spec.layers = layers;
  spec.units = units;
  spec.rules = std::move(rules);
  spec.activation = act;
  spec.residual = true;
  spec.head = HeadKind::ClassifierMeanPool;
  spec.classes = 2;
  return spec;
}

}  // namespace

std::vector<ClassificationRow> exp_classification_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  auto out = open_csv(cfg, "classification_sweep", "task,n,layers,units,accuracy");
  std::vector<ClassificationRow> rows;
  std::uint64_t cell = 0;
  for (auto task : cfg.cls_tasks) {
    for (std::size_t n : cfg.cls_sizes) {
      const auto data = build_benchmark(
          task, n, cfg.cls_per_class,
          derive_seed(derive_seed(cfg.data_seed, kDataCls), static_cast<std::uint64_t>(task) * 1000 + n));
      for (std::size_t layers : cfg.cls_layers) {
        for (std::size_t units : cfg.cls_units) {
          const auto spec = classifier_spec(layers, units, {kAllRules.begin(), kAllRules.end()},
                                            cfg.cls_activation);
          std::vector<double> acc;
          for (std::size_t k = 0; k < cfg.cls_seeds; ++k) {
            acc.push_back(train_classifier(spec, data,
                                           make_train(cfg, cfg.cls_budget,
                                                      cell_seed(cfg, kTrainCls, cell, k)))
                              .test_metric);
          }
          ++cell;
          ClassificationRow row{task, n, layers, units, median(acc)};
          out << to_string(task) << ',' << n << ',' << layers << ',' << units << ','
              << fmt(row.accuracy) << '\n';
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

std::vector<AblationRow> exp_ablation(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto data = build_benchmark(BenchmarkKind::BaVsEr, cfg.abl_n, cfg.cls_per_class,
                                    derive_seed(cfg.data_seed, kDataAbl));
  const auto reference = classifier_spec(cfg.abl_layers, cfg.abl_units,
                                         {kAllRules.begin(), kAllRules.end()}, cfg.abl_activation);
  const std::size_t reference_count = parameter_count(reference);

  auto out = open_csv(cfg, "ablation", "subset,branch_units,parameters,accuracy");
  std::vector<AblationRow> rows;
  std::uint64_t cell = 0;
  for (const auto& subset : cfg.abl_subsets) {
    auto spec = classifier_spec(cfg.abl_layers, cfg.abl_units, subset, cfg.abl_activation);
    spec.branch_units = matched_branch_units(spec, reference_count);
    const std::size_t count = parameter_count(spec);
    if (std::abs(static_cast<double>(count) - static_cast<double>(reference_count)) >
        0.02 * static_cast<double>(reference_count)) {
      throw ConfigError("ablation: cannot match parameter count for subset " +
                        subset_label(subset));
    }
    std::vector<double> acc;
    for (std::size_t k = 0; k < cfg.seeds; ++k) {
      acc.push_back(
          train_classifier(spec, data,
                           make_train(cfg, cfg.abl_budget, cell_seed(cfg, kTrainAbl, cell, k)))
              .test_metric);
    }
    ++cell;
    AblationRow row{subset, spec.branch_units, count, median(acc)};
    out << subset_label(subset) << ',' << row.branch_units << ',' << row.parameters << ','
        << fmt(row.accuracy) << '\n';
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<KsRow> exp_ks(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::uint64_t seed = derive_seed(cfg.data_seed, kDataKs);
  const auto set = build_benchmark(BenchmarkKind::BaVsConfig, cfg.ks_n, cfg.ks_per_class, seed);
  std::vector<Graph> reals, fakes(cfg.ks_per_class);
  std::vector<int> groups;
  for (const auto& item : set) {
    if (item.label == 0) {
      reals.push_back(item.graph);
      groups.push_back(item.group);
    }
  }
  for (const auto& item : set) {
    if (item.label == 1) fakes.at(static_cast<std::size_t>(item.source)) = item.graph;
  }

  auto out = open_csv(cfg, "ks", "order,pair,kind,statistic");
  std::vector<KsRow> rows;
  for (std::size_t order : cfg.ks_orders) {
    const auto profile =
        ks_profile(reals, fakes, groups, order, cfg.ks_pairs, derive_seed(seed, 100 + order));
    const auto emit = [&](const std::vector<double>& stats, bool real_fake) {
      for (std::size_t i = 0; i < stats.size(); ++i) {
        rows.push_back({order, i, real_fake, stats[i]});
        out << order << ',' << i << ',' << (real_fake ? "real_fake" : "real_real") << ','
            << fmt(stats[i]) << '\n';
      }
    };
    emit(profile.real_real, false);
    emit(profile.real_fake, true);
  }
  return rows;
}

std::string config_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ManifestEntry run_experiment(const std::string& id, const ExperimentConfig& cfg,
                             std::string_view config_text) {
  const auto start = std::chrono::steady_clock::now();
  if (id == "fc_sweep") {
    exp_fc_sweep(cfg);
  } else if (id == "single_gcn") {
    exp_single_gcn(cfg);
  } else if (id == "moments_grid") {
    exp_moments_grid(cfg, false);
  } else if (id == "moments_grid_residual") {
    exp_moments_grid(cfg, true);
  } else if (id == "mixed_moment") {
    exp_mixed_moment(cfg);
  } else if (id == "classification_sweep") {
    exp_classification_sweep(cfg);
  } else if (id == "ablation") {
    exp_ablation(cfg);
  } else if (id == "ks") {
    exp_ks(cfg);
  } else {
    throw ConfigError("unknown experiment '" + id + "'");
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {id,
          cfg.out_dir / (id + ".csv"),
          cfg.data_seed,
          cfg.train_seed,
          config_hash(config_text),
          std::max(seconds, 1e-9)};
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries,
                    std::string_view config_text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "entries = " << entries.size() << '\n';
  for (const auto& e : entries) {
    out << e.id << ".csv = " << e.csv.string() << '\n'
        << e.id << ".data_seed = " << e.data_seed << '\n'
        << e.id << ".train_seed = " << e.train_seed << '\n'
        << e.id << ".config_hash = " << e.config_hash << '\n'
        << e.id << ".runtime_seconds = " << fmt(e.runtime_seconds) << '\n';
  }
  std::istringstream lines{std::string(config_text)};
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty()) out << "config." << line << '\n';
  }
}

std::vector<ManifestEntry> run_all(const ExperimentConfig& cfg, std::string_view config_text) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  const auto manifest = cfg.out_dir / "manifest.txt";
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < kDefaultExperimentCount; ++i) {
    entries.push_back(run_experiment(kExperimentIds[i], cfg, config_text));
    write_manifest(manifest, entries, config_text);
  }
  return entries;
}

}  // namespace gml
