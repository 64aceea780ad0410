#include "gml/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <vector>

#include "gml/config.hpp"
#include "gml/error.hpp"
#include "gml/experiments.hpp"
#include "gml/graph_ops.hpp"
#include "gml/graphgen.hpp"
#include "gml/io.hpp"
#include "gml/rng.hpp"
#include "gml/stats.hpp"
#include "gml/training.hpp"

namespace gml {

namespace {

// Misuse of the command line; reported with the usage text and exit code 1.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::filesystem::path default_out_dir() {
  const char* env = std::getenv("GML_OUT_DIR");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("results");
}

LabeledGraphSet generate(const DataSettings& d) {
  LabeledGraphSet out;
  if (d.kind == "ba" || d.kind == "er") {
    out.reserve(d.count);
    for (std::size_t i = 0; i < d.count; ++i) {
      const auto seed = derive_seed(d.seed, i);
      out.push_back({d.kind == "ba" ? gen_ba(d.n, d.m, seed) : gen_er(d.n, d.p, seed), 0, 0, -1});
    }
    return out;
  }
  BenchmarkKind kind{};
  try {
    kind = parse_benchmark_kind(d.kind);
  } catch (const ParameterError&) {
    throw UsageError("data.kind must be ba, er, ba_vs_er or ba_vs_config");
  }
  // `count` is per class for the benchmarks.
  return build_benchmark(kind, d.n, d.count, d.seed);
}

LabeledGraphSet input_graphs(const Settings& s) {
  return s.data.input.empty() ? generate(s.data) : load_graphset(s.data.input);
}

int cmd_generate(const Settings& s, std::ostream& out) {
  const auto graphs = generate(s.data);
  const std::filesystem::path path =
      s.out.empty() ? default_out_dir() / "graphs.txt" : std::filesystem::path(s.out);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  save_graphset(path, graphs);
  out << "wrote " << graphs.size() << " graphs to " << path.string() << '\n';
  return 0;
}

int cmd_moments(const Settings& s, std::ostream& out) {
  if (s.data.order == 0) throw UsageError("data.order must be at least 1");
  const auto graphs = input_graphs(s);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    out << "graph " << i;
    for (double v : moment_vector(graphs[i].graph, s.data.order)) out << ' ' << fmt(v);
    out << '\n';
  }
  return 0;
}

int cmd_train(Settings s, std::ostream& out) {
  const auto graphs = input_graphs(s);
  TrainReport report;
  if (s.task == "regression") {
    s.model.head = HeadKind::RegressionAggregate;
    if (s.model.arch == Architecture::FcBaseline && !graphs.empty()) {
      s.model.graph_size = graphs.front().graph.node_count();
    }
    std::vector<RegressionSample> data;
    data.reserve(graphs.size());
    for (const auto& g : graphs) data.push_back({g.graph, moment_vector(g.graph, s.data.order)});
    report = train_regression(s.model, data, s.train);
  } else {
    s.model.head = HeadKind::ClassifierMeanPool;
    report = train_classifier(s.model, graphs, s.train);
  }
  out << "metric " << report.metric << " = " << fmt(report.test_metric) << '\n'
      << "best_epoch = " << report.best_epoch << '\n'
      << "best_val_loss = " << fmt(report.best_val_loss) << '\n'
      << "epochs_run = " << report.epochs.size() << '\n';
  if (!s.out.empty()) {
    std::ofstream csv(s.out, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + s.out);
    write_report_csv(csv, report);
    out << "report written to " << s.out << '\n';
  }
  return 0;
}

int cmd_experiment(Settings s, const std::vector<std::string>& positional, std::ostream& out) {
  if (positional.size() != 1) throw UsageError("experiment needs one id or 'all'");
  s.experiment.out_dir = s.out.empty() ? default_out_dir() : std::filesystem::path(s.out);
  const std::string config_text = resolved_text(s);
  std::vector<ManifestEntry> entries;
  if (positional[0] == "all") {
    entries = run_all(s.experiment, config_text);
  } else {
    bool known = false;
    for (const char* id : kExperimentIds) known = known || positional[0] == id;
    if (!known) throw UsageError("unknown experiment '" + positional[0] + "'");
    std::filesystem::create_directories(s.experiment.out_dir);
    entries.push_back(run_experiment(positional[0], s.experiment, config_text));
    write_manifest(s.experiment.out_dir / "manifest.txt", entries, config_text);
  }
  for (const auto& e : entries) {
    out << e.id << " -> " << e.csv.string() << " (" << fmt(e.runtime_seconds) << " s)\n";
  }
  return 0;
}

int cmd_kstest(const Settings& s, std::ostream& out) {
  const auto& cfg = s.experiment;
  Settings local = s;
  local.experiment.out_dir = s.out.empty() ? default_out_dir() : std::filesystem::path(s.out);
  const auto rows = exp_ks(local.experiment);
  out << "order  mean_rr    std_rr     mean_rf    std_rf\n";
  for (std::size_t order : cfg.ks_orders) {
    std::vector<double> rr, rf;
    for (const auto& r : rows) {
      if (r.order == order) (r.real_fake ? rf : rr).push_back(r.statistic);
    }
    const auto a = summarize(rr), b = summarize(rf);
    char line[128];
    std::snprintf(line, sizeof line, "%-6zu %-10.4f %-10.4f %-10.4f %-10.4f\n", order, a.mean,
                  a.stddev, b.mean, b.stddev);
    out << line;
  }
  return 0;
}

}  // namespace

std::string usage_text() {
  return "usage: gml <command> [args] [--key=value ...]\n"
         "\n"
         "commands:\n"
         "  generate              write a graph-set file\n"
         "                        (--kind=ba|er|ba_vs_er|ba_vs_config --n --m --p --count --seed --out)\n"
         "  moments [file]        print node moments of every graph (--order, --input)\n"
         "  train                 train a model (--train.task=regression|classification, model.*, train.*)\n"
         "  experiment <id>|all   run experiments, CSVs and manifest.txt into --out or $GML_OUT_DIR\n"
         "  kstest                KS statistics of BA graphs against configuration rewirings\n"
         "\n"
         "options:\n"
         "  --config=<file>       read key = value settings first\n"
         "  --<key>=<value>       override one setting, e.g. --train.lr=0.01\n"
         "\n"
         "experiments: fc_sweep single_gcn moments_grid moments_grid_residual\n"
         "             classification_sweep ablation ks mixed_moment\n";
}

int cli_main(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    (args.empty() ? err : out) << usage_text();
    return args.empty() ? 1 : 0;
  }
  const std::string command = args[0];
  try {
    std::vector<std::string> positional, overrides;
    std::optional<std::filesystem::path> config_file;
    for (std::size_t i = 1; i < args.size(); ++i) {
      const std::string& a = args[i];
      if (a.rfind("--config=", 0) == 0) {
        config_file = a.substr(9);
      } else if (a.rfind("--", 0) == 0) {
        overrides.push_back(a);
      } else {
        positional.push_back(a);
      }
    }
    Settings settings = parse_config(config_file, overrides);

    if (command == "generate") {
      if (!positional.empty()) throw UsageError("generate takes no positional arguments");
      return cmd_generate(settings, out);
    }
    if (command == "moments") {
      if (positional.size() > 1) throw UsageError("moments takes at most one file");
      if (!positional.empty()) settings.data.input = positional[0];
      return cmd_moments(settings, out);
    }
    if (command == "train") {
      if (!positional.empty()) throw UsageError("train takes no positional arguments");
      return cmd_train(settings, out);
    }
    if (command == "experiment") return cmd_experiment(settings, positional, out);
    if (command == "kstest") {
      if (!positional.empty()) throw UsageError("kstest takes no positional arguments");
      return cmd_kstest(settings, out);
    }
    throw UsageError("unknown command '" + command + "'");
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << usage_text();
    return 1;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace gml
