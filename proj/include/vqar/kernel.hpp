#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vqar/points.hpp"
#include "vqar/sample.hpp"

namespace vqar {

enum class KernelKind {
  /// exp(-|z|^2) restricted to the neighbor_count nearest predecessors.
  GaussianTruncatedKnn,
  /// 1{|z| <= 1}.
  Indicator,
  /// exp(-|z|^2) over all predecessors.
  Gaussian,
};

/// Bandwidth either given directly or as a multiple of the average pairwise distance.
struct BandwidthRule {
  enum class Kind { Absolute, Multiplier } kind = Kind::Multiplier;
  double value = 0.5;

  static BandwidthRule absolute(double h) { return {Kind::Absolute, h}; }
  static BandwidthRule multiplier(double ell) { return {Kind::Multiplier, ell}; }
};

struct KernelSpec {
  KernelKind kind = KernelKind::GaussianTruncatedKnn;
  std::size_t neighbor_count = 225;
  BandwidthRule bandwidth;
};

/// Kernel with its bandwidth resolved against a data set.
struct ResolvedKernel {
  KernelKind kind = KernelKind::GaussianTruncatedKnn;
  std::size_t neighbor_count = 225;
  double h = 1.0;
};

/// Mean of |p_i - p_j| over all pairs i < j. Above exact_limit points the mean
/// over `sampled_pairs` seeded random pairs is returned instead.
double avg_pairwise_distance(const PointSet& points, std::size_t exact_limit = 5000,
                             std::size_t sampled_pairs = 1'000'000, std::uint64_t seed = 0x5eed);

/// Subsampled estimator: mean distance over n_pairs uniformly drawn pairs i != j.
double avg_pairwise_distance_sampled(const PointSet& points, std::size_t n_pairs,
                                     std::uint64_t seed);

/// Resolves the bandwidth rule. The multiplier rule measures the average
/// pairwise distance of `reference`.
ResolvedKernel resolve_kernel(const KernelSpec& spec, const PointSet& reference);

struct NwOptions {
  /// Predecessor index whose transition (x_i, x_{i+1}) is left out.
  std::optional<std::size_t> exclude;
};

/// Nadaraya-Watson estimate of the law of X_{t+1} given X_t = x.
///
/// Atom j of the result is the successor series[i+1] for a predecessor i with
/// positive kernel mass; atoms keep series order. Throws EmptySupport when no
/// predecessor gets mass.
WeightedSample nw_weights(const PointSet& series, std::span<const double> x,
                          const ResolvedKernel& kernel, const NwOptions& options = {});

/// Average of the per-series estimators with factor 1/N. Series with empty
/// support are left out of the average.
WeightedSample nw_weights_panel(std::span<const PointSet> panel, std::span<const double> x,
                                const ResolvedKernel& kernel);

/// Points of a panel pooled into one set (for bandwidth resolution).
PointSet pool(std::span<const PointSet> panel);

/// Stationary empirical measure on the even-indexed observations x_2, x_4, ...
WeightedSample empirical_stationary(const PointSet& series);

}  // namespace vqar
