#include "gml/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "gml/error.hpp"

namespace gml {

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key));
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) bad_value(key, text);
  return value;
}

// from_chars for double is missing from older libstdc++ builds; strtod is exact enough.
template <>
double parse_number<double>(std::string_view key, std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(value)) bad_value(key, text);
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  bad_value(key, text);
}

std::string show(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
std::string show(std::size_t v) { return std::to_string(v); }
std::string show(bool v) { return v ? "true" : "false"; }

template <class T, class Show>
std::string join(const std::vector<T>& values, Show show_one, const char* sep = ",") {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += sep;
    out += show_one(v);
  }
  return out;
}

// Wraps a parser of named enums so its exceptions become ConfigErrors for `key`.
template <class F>
auto named(std::string_view key, std::string_view text, F parse) {
  try {
    return parse(text);
  } catch (const std::invalid_argument&) {
    bad_value(key, text);
  }
}

template <class T, class F>
std::vector<T> parse_list(std::string_view key, std::string_view text, F parse_one) {
  std::vector<T> out;
  if (trim(text).empty()) return out;
  for (auto part : split(text, ',')) out.push_back(parse_one(key, part));
  return out;
}

std::vector<PropagationRule> parse_rules(std::string_view key, std::string_view text) {
  return parse_list<PropagationRule>(key, text, [](std::string_view k, std::string_view v) {
    return named(k, v, parse_rule);
  });
}

std::string show_rules(const std::vector<PropagationRule>& rules) {
  return join(rules, [](PropagationRule r) { return std::string(to_string(r)); });
}

struct Field {
  std::string key;
  std::function<void(Settings&, std::string_view)> set;
  std::function<std::string(const Settings&)> get;
};

template <class Get>
Field size_field(std::string key, Get member) {
  return {key,
          [=](Settings& s, std::string_view v) {
            member(s) = parse_number<std::size_t>(key, v);
          },
          [=](const Settings& s) { return show(member(const_cast<Settings&>(s))); }};
}

template <class Get>
Field u64_field(std::string key, Get member) {
  return {key,
          [=](Settings& s, std::string_view v) {
            member(s) = parse_number<std::uint64_t>(key, v);
          },
          [=](const Settings& s) { return std::to_string(member(const_cast<Settings&>(s))); }};
}

template <class Get>
Field double_field(std::string key, Get member) {
  return {key,
          [=](Settings& s, std::string_view v) { member(s) = parse_number<double>(key, v); },
          [=](const Settings& s) { return show(member(const_cast<Settings&>(s))); }};
}

template <class Get>
Field bool_field(std::string key, Get member) {
  return {key, [=](Settings& s, std::string_view v) { member(s) = parse_bool(key, v); },
          [=](const Settings& s) { return show(member(const_cast<Settings&>(s))); }};
}

template <class Get>
Field string_field(std::string key, Get member) {
  return {key, [=](Settings& s, std::string_view v) { member(s) = std::string(v); },
          [=](const Settings& s) { return member(const_cast<Settings&>(s)); }};
}

template <class Get>
Field sizes_field(std::string key, Get member) {
  return {key,
          [=](Settings& s, std::string_view v) {
            member(s) = parse_list<std::size_t>(key, v, parse_number<std::size_t>);
          },
          [=](const Settings& s) {
            return join(member(const_cast<Settings&>(s)), [](std::size_t x) { return show(x); });
          }};
}

template <class Get>
Field rules_field(std::string key, Get member) {
  return {key, [=](Settings& s, std::string_view v) { member(s) = parse_rules(key, v); },
          [=](const Settings& s) { return show_rules(member(const_cast<Settings&>(s))); }};
}

template <class Get>
Field activation_field(std::string key, Get member) {
  return {key,
          [=](Settings& s, std::string_view v) { member(s) = named(key, v, parse_activation); },
          [=](const Settings& s) {
            return std::string(to_string(member(const_cast<Settings&>(s))));
          }};
}

template <class Get>
void add_budget(std::vector<Field>& f, const std::string& prefix, Get budget) {
  f.push_back(size_field(prefix + ".epochs", [=](Settings& s) -> auto& { return budget(s).epochs; }));
  f.push_back(
      size_field(prefix + ".patience", [=](Settings& s) -> auto& { return budget(s).patience; }));
  f.push_back(double_field(prefix + ".lr", [=](Settings& s) -> auto& { return budget(s).lr; }));
}

#define GML_MEMBER(expr) [](Settings& s) -> auto& { return s.expr; }

std::vector<Field> build_fields() {
  std::vector<Field> f;
  f.push_back(string_field("data.kind", GML_MEMBER(data.kind)));
  f.push_back(size_field("data.n", GML_MEMBER(data.n)));
  f.push_back(size_field("data.m", GML_MEMBER(data.m)));
  f.push_back(double_field("data.p", GML_MEMBER(data.p)));
  f.push_back(size_field("data.count", GML_MEMBER(data.count)));
  f.push_back(u64_field("data.seed", GML_MEMBER(data.seed)));
  f.push_back(string_field("data.input", GML_MEMBER(data.input)));
  f.push_back(size_field("data.order", GML_MEMBER(data.order)));
  f.push_back(string_field("io.out", GML_MEMBER(out)));

  f.push_back({"model.arch",
               [](Settings& s, std::string_view v) {
                 s.model.arch = named("model.arch", v, parse_architecture);
               },
               [](const Settings& s) { return std::string(to_string(s.model.arch)); }});
  f.push_back(size_field("model.layers", GML_MEMBER(model.layers)));
  f.push_back(size_field("model.units", GML_MEMBER(model.units)));
  f.push_back(size_field("model.branch_units", GML_MEMBER(model.branch_units)));
  f.push_back(rules_field("model.rules", GML_MEMBER(model.rules)));
  f.push_back(activation_field("model.activation", GML_MEMBER(model.activation)));
  f.push_back(bool_field("model.bias", GML_MEMBER(model.use_bias)));
  f.push_back(bool_field("model.residual", GML_MEMBER(model.residual)));
  f.push_back(size_field("model.classes", GML_MEMBER(model.classes)));

  f.push_back({"train.task",
               [](Settings& s, std::string_view v) {
                 if (v != "regression" && v != "classification") bad_value("train.task", v);
                 s.task = std::string(v);
               },
               [](const Settings& s) { return s.task; }});
  f.push_back(double_field("train.lr", GML_MEMBER(train.lr)));
  f.push_back(double_field("train.beta1", GML_MEMBER(train.beta1)));
  f.push_back(double_field("train.beta2", GML_MEMBER(train.beta2)));
  f.push_back(double_field("train.eps", GML_MEMBER(train.adam_eps)));
  f.push_back(size_field("train.epochs", GML_MEMBER(train.epochs)));
  f.push_back(size_field("train.batch_size", GML_MEMBER(train.batch_size)));
  f.push_back(u64_field("train.seed", GML_MEMBER(train.seed)));
  f.push_back(double_field("train.train_frac", GML_MEMBER(train.train_frac)));
  f.push_back(double_field("train.val_frac", GML_MEMBER(train.val_frac)));
  f.push_back(double_field("train.test_frac", GML_MEMBER(train.test_frac)));
  f.push_back(size_field("train.patience", GML_MEMBER(train.patience)));

  f.push_back(u64_field("exp.data_seed", GML_MEMBER(experiment.data_seed)));
  f.push_back(u64_field("exp.train_seed", GML_MEMBER(experiment.train_seed)));
  f.push_back(size_field("exp.seeds", GML_MEMBER(experiment.seeds)));

  f.push_back(size_field("exp.fc.n", GML_MEMBER(experiment.fc_n)));
  f.push_back(double_field("exp.fc.p", GML_MEMBER(experiment.fc_p)));
  f.push_back(sizes_field("exp.fc.units", GML_MEMBER(experiment.fc_units)));
  f.push_back(sizes_field("exp.fc.samples", GML_MEMBER(experiment.fc_samples)));
  f.push_back(size_field("exp.fc.holdout", GML_MEMBER(experiment.fc_holdout)));
  add_budget(f, "exp.fc", GML_MEMBER(experiment.fc_budget));

  f.push_back(size_field("exp.gcn.n", GML_MEMBER(experiment.gcn_n)));
  f.push_back(size_field("exp.gcn.m", GML_MEMBER(experiment.gcn_m)));
  f.push_back(rules_field("exp.gcn.rules", GML_MEMBER(experiment.gcn_rules)));
  f.push_back(sizes_field("exp.gcn.samples", GML_MEMBER(experiment.gcn_samples)));
  f.push_back(size_field("exp.gcn.holdout", GML_MEMBER(experiment.gcn_holdout)));
  add_budget(f, "exp.gcn", GML_MEMBER(experiment.gcn_budget));

  f.push_back(size_field("exp.grid.n", GML_MEMBER(experiment.grid_n)));
  f.push_back(size_field("exp.grid.m", GML_MEMBER(experiment.grid_m)));
  f.push_back(sizes_field("exp.grid.orders", GML_MEMBER(experiment.grid_orders)));
  f.push_back(sizes_field("exp.grid.layers", GML_MEMBER(experiment.grid_layers)));
  f.push_back({"exp.grid.activations",
               [](Settings& s, std::string_view v) {
                 s.experiment.grid_activations = parse_list<Activation>(
                     "exp.grid.activations", v, [](std::string_view k, std::string_view x) {
                       return named(k, x, parse_activation);
                     });
               },
               [](const Settings& s) {
                 return join(s.experiment.grid_activations,
                             [](Activation a) { return std::string(to_string(a)); });
               }});
  f.push_back(size_field("exp.grid.units", GML_MEMBER(experiment.grid_units)));
  f.push_back(size_field("exp.grid.residual_units", GML_MEMBER(experiment.grid_residual_units)));
  f.push_back(size_field("exp.grid.samples", GML_MEMBER(experiment.grid_samples)));
  add_budget(f, "exp.grid", GML_MEMBER(experiment.grid_budget));

  f.push_back({"exp.mixed.coefficients",
               [](Settings& s, std::string_view v) {
                 s.experiment.mixed_coefficients =
                     parse_list<double>("exp.mixed.coefficients", v, parse_number<double>);
               },
               [](const Settings& s) {
                 return join(s.experiment.mixed_coefficients, [](double x) { return show(x); });
               }});
  f.push_back(size_field("exp.mixed.layers", GML_MEMBER(experiment.mixed_layers)));
  f.push_back(size_field("exp.mixed.units", GML_MEMBER(experiment.mixed_units)));

  f.push_back({"exp.cls.tasks",
               [](Settings& s, std::string_view v) {
                 s.experiment.cls_tasks = parse_list<BenchmarkKind>(
                     "exp.cls.tasks", v, [](std::string_view k, std::string_view x) {
                       return named(k, x, parse_benchmark_kind);
                     });
               },
               [](const Settings& s) {
                 return join(s.experiment.cls_tasks,
                             [](BenchmarkKind b) { return std::string(to_string(b)); });
               }});
  f.push_back(sizes_field("exp.cls.sizes", GML_MEMBER(experiment.cls_sizes)));
  f.push_back(sizes_field("exp.cls.layers", GML_MEMBER(experiment.cls_layers)));
  f.push_back(sizes_field("exp.cls.units", GML_MEMBER(experiment.cls_units)));
  f.push_back(size_field("exp.cls.per_class", GML_MEMBER(experiment.cls_per_class)));
  f.push_back(size_field("exp.cls.seeds", GML_MEMBER(experiment.cls_seeds)));
  f.push_back(activation_field("exp.cls.activation", GML_MEMBER(experiment.cls_activation)));
  add_budget(f, "exp.cls", GML_MEMBER(experiment.cls_budget));

  f.push_back(size_field("exp.abl.n", GML_MEMBER(experiment.abl_n)));
  f.push_back(size_field("exp.abl.layers", GML_MEMBER(experiment.abl_layers)));
  f.push_back(size_field("exp.abl.units", GML_MEMBER(experiment.abl_units)));
  // Subsets are separated by ';', rules within a subset by '+'.
  f.push_back({"exp.abl.subsets",
               [](Settings& s, std::string_view v) {
                 std::vector<std::vector<PropagationRule>> subsets;
                 for (auto part : split(v, ';')) {
                   std::vector<PropagationRule> rules;
                   for (auto r : split(part, '+')) rules.push_back(named("exp.abl.subsets", r, parse_rule));
                   subsets.push_back(std::move(rules));
                 }
                 s.experiment.abl_subsets = std::move(subsets);
               },
               [](const Settings& s) {
                 return join(s.experiment.abl_subsets,
                             [](const std::vector<PropagationRule>& r) { return subset_label(r); },
                             ";");
               }});
  f.push_back(activation_field("exp.abl.activation", GML_MEMBER(experiment.abl_activation)));
  add_budget(f, "exp.abl", GML_MEMBER(experiment.abl_budget));

  f.push_back(size_field("exp.ks.n", GML_MEMBER(experiment.ks_n)));
  f.push_back(size_field("exp.ks.per_class", GML_MEMBER(experiment.ks_per_class)));
  f.push_back(sizes_field("exp.ks.orders", GML_MEMBER(experiment.ks_orders)));
  f.push_back(size_field("exp.ks.pairs", GML_MEMBER(experiment.ks_pairs)));
  return f;
}

#undef GML_MEMBER

const std::vector<Field>& fields() {
  static const std::vector<Field> table = build_fields();
  return table;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
  }();
  return keys;
}

std::string resolve_alias(std::string_view key) {
  static constexpr std::pair<std::string_view, std::string_view> aliases[] = {
      {"kind", "data.kind"},   {"n", "data.n"},         {"m", "data.m"},
      {"p", "data.p"},         {"count", "data.count"}, {"seed", "data.seed"},
      {"input", "data.input"}, {"order", "data.order"}, {"out", "io.out"}};
  for (const auto& [alias, full] : aliases)
    if (key == alias) return std::string(full);
  return std::string(key);
}

void set_value(Settings& settings, std::string_view key, std::string_view value) {
  const std::string full = resolve_alias(trim(key));
  const Field* f = find_field(full);
  if (!f) throw ConfigError("unknown key " + full);
  f->set(settings, trim(value));
}

std::string get_value(const Settings& settings, std::string_view key) {
  const std::string full = resolve_alias(key);
  const Field* f = find_field(full);
  if (!f) throw ConfigError("unknown key " + full);
  return f->get(settings);
}

void apply_config_text(Settings& settings, std::string_view text) {
  std::size_t number = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++number;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    }
    try {
      set_value(settings, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
}

void apply_config_file(Settings& settings, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  apply_config_text(settings, text.str());
}

void apply_override(Settings& settings, std::string_view arg) {
  if (arg.substr(0, 2) != "--") throw ConfigError("expected --key=value, got '" + std::string(arg) + "'");
  arg.remove_prefix(2);
  const auto eq = arg.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("expected --key=value, got '--" + std::string(arg) + "'");
  }
  set_value(settings, arg.substr(0, eq), arg.substr(eq + 1));
}

Settings parse_config(const std::optional<std::filesystem::path>& file,
                      std::span<const std::string> overrides) {
  Settings settings;
  if (file) apply_config_file(settings, *file);
  for (const auto& arg : overrides) apply_override(settings, arg);
  return settings;
}

std::string resolved_text(const Settings& settings) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(settings) + "\n";
  return out;
}

}  // namespace gml
