#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gml/graph.hpp"

namespace gml {

/// Two-sample Kolmogorov–Smirnov statistic: sup over t of |Fx(t) − Fy(t)|,
/// evaluated at every pooled sample point so ties are handled exactly.
/// Throws ParameterError if either sample is empty.
double ks_statistic(std::span<const double> x, std::span<const double> y);

struct KsProfile {
  std::size_t order = 1;
  std::vector<double> real_real;
  std::vector<double> real_fake;
};

/// KS statistics between node-level moment distributions Mₚ of graph pairs.
///
/// Real-real pairs: a uniformly chosen real graph against a different real
/// graph of the same group (drawn without replacement); a group with a single
/// member is compared against itself. Real-fake pairs: a uniformly chosen real
/// graph against fakes[i], its rewiring partner. `groups` may be empty, which
/// puts every real graph in one group. Requires fakes.size() == reals.size().
KsProfile ks_profile(std::span<const Graph> reals, std::span<const Graph> fakes,
                     std::span<const int> groups, std::size_t order, std::size_t pair_count,
                     std::uint64_t seed);

struct SummaryStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

SummaryStats summarize(std::span<const double> values);
double median(std::vector<double> values);

}  // namespace gml
