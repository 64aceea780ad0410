#include "gml/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gml/error.hpp"
#include "gml/graph_ops.hpp"
#include "gml/rng.hpp"

namespace gml {

double ks_statistic(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw ParameterError("ks_statistic: samples must be non-empty");
  std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  // Past the end of one sample the other ECDF only moves toward 1, so the gap shrinks.
  return d;
}

KsProfile ks_profile(std::span<const Graph> reals, std::span<const Graph> fakes,
                     std::span<const int> groups, std::size_t order, std::size_t pair_count,
                     std::uint64_t seed) {
  if (reals.empty() || fakes.empty()) throw ParameterError("ks_profile: empty graph set");
  if (fakes.size() != reals.size()) {
    throw ParameterError("ks_profile: every real graph needs a rewiring partner");
  }
  if (!groups.empty() && groups.size() != reals.size()) {
    throw ParameterError("ks_profile: groups must match the real graph count");
  }
  if (order == 0) throw ParameterError("ks_profile: order must be at least 1");

  std::vector<std::vector<double>> real_m, fake_m;
  real_m.reserve(reals.size());
  fake_m.reserve(fakes.size());
  for (const auto& g : reals) real_m.push_back(moment_vector(g, order));
  for (const auto& g : fakes) fake_m.push_back(moment_vector(g, order));

  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < reals.size(); ++i) members[groups.empty() ? 0 : groups[i]].push_back(i);

  KsProfile out;
  out.order = order;
  out.real_real.reserve(pair_count);
  out.real_fake.reserve(pair_count);
  Rng rng(seed);
  for (std::size_t k = 0; k < pair_count; ++k) {
    const std::size_t i = rng.below(reals.size());
    const auto& peers = members[groups.empty() ? 0 : groups[i]];
    std::size_t j = i;
    if (peers.size() > 1) {
      // Uniform over the group minus i.
      std::size_t pick = rng.below(peers.size() - 1);
      j = peers[pick];
      if (j == i) j = peers.back();
    }
    out.real_real.push_back(ks_statistic(real_m[i], real_m[j]));
  }
  for (std::size_t k = 0; k < pair_count; ++k) {
    const std::size_t i = rng.below(reals.size());
    out.real_fake.push_back(ks_statistic(real_m[i], fake_m[i]));
  }
  return out;
}

SummaryStats summarize(std::span<const double> values) {
  SummaryStats s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

double median(std::vector<double> values) {
  if (values.empty()) throw ParameterError("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace gml
