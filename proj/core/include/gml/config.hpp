#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gml/experiments.hpp"
#include "gml/nn.hpp"
#include "gml/training.hpp"

namespace gml {

struct DataSettings {
  std::string kind = "ba";  // ba, er, ba_vs_er, ba_vs_config
  std::size_t n = 20;
  std::size_t m = 2;
  double p = 0.2;
  std::size_t count = 10;
  std::uint64_t seed = 1;
  std::string input;      // graph-set file; generated from the fields above when empty
  std::size_t order = 1;  // moment order for regression targets
};

struct Settings {
  DataSettings data;
  ModelSpec model;
  TrainConfig train;
  std::string task = "regression";  // or "classification"
  ExperimentConfig experiment;
  std::string out;  // output file or directory, depending on the command
};

// Flat key table. Keys are namespaced (data.*, model.*, train.*, exp.*, io.out);
// the short aliases kind, n, m, p, count, seed, input, order and out map onto them.
const std::vector<std::string>& config_keys();
std::string resolve_alias(std::string_view key);

/// Sets one key from its text value. Throws ConfigError "unknown key <key>"
/// or "invalid value '<v>' for <key>".
void set_value(Settings& settings, std::string_view key, std::string_view value);
std::string get_value(const Settings& settings, std::string_view key);

/// Applies `key = value` lines; '#' starts a comment, blank lines are skipped.
/// Errors name the offending line.
void apply_config_text(Settings& settings, std::string_view text);
void apply_config_file(Settings& settings, const std::filesystem::path& path);

/// Applies one "--key=value" argument.
void apply_override(Settings& settings, std::string_view arg);

/// File values first, then overrides in order.
Settings parse_config(const std::optional<std::filesystem::path>& file,
                      std::span<const std::string> overrides);

/// Every key with its resolved value, one "key = value" line each, in table order.
std::string resolved_text(const Settings& settings);

}  // namespace gml
