#include "vqar/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "vqar/error.hpp"
#include "vqar/rng.hpp"

namespace vqar {

double avg_pairwise_distance(const PointSet& points, std::size_t exact_limit,
                             std::size_t sampled_pairs, std::uint64_t seed) {
  const std::size_t n = points.size();
  if (n < 2) throw Error(ErrorCode::InsufficientPoints, "need at least two points");
  if (n > exact_limit) return avg_pairwise_distance_sampled(points, sampled_pairs, seed);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) row += distance(points[i], points[j]);
    total += row;
  }
  return total / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

double avg_pairwise_distance_sampled(const PointSet& points, std::size_t n_pairs,
                                     std::uint64_t seed) {
  const std::size_t n = points.size();
  if (n < 2) throw Error(ErrorCode::InsufficientPoints, "need at least two points");
  if (n_pairs == 0) throw Error(ErrorCode::InvalidCount, "need at least one sampled pair");
  Rng rng(seed);
  double total = 0.0;
  for (std::size_t p = 0; p < n_pairs; ++p) {
    const auto i = rng.below(n);
    auto j = rng.below(n - 1);
    if (j >= i) ++j;
    total += distance(points[i], points[j]);
  }
  return total / static_cast<double>(n_pairs);
}

ResolvedKernel resolve_kernel(const KernelSpec& spec, const PointSet& reference) {
  ResolvedKernel k{spec.kind, spec.neighbor_count, spec.bandwidth.value};
  if (!(spec.bandwidth.value > 0.0) || !std::isfinite(spec.bandwidth.value))
    throw Error(ErrorCode::InvalidArgument, "bandwidth value must be positive");
  if (spec.kind == KernelKind::GaussianTruncatedKnn && spec.neighbor_count < 1)
    throw Error(ErrorCode::InvalidCount, "neighbor_count must be >= 1");
  if (spec.bandwidth.kind == BandwidthRule::Kind::Multiplier)
    k.h = spec.bandwidth.value * avg_pairwise_distance(reference);
  if (!(k.h > 0.0))
    throw Error(ErrorCode::InvalidArgument, "resolved bandwidth is not positive");
  return k;
}

WeightedSample nw_weights(const PointSet& series, std::span<const double> x,
                          const ResolvedKernel& kernel, const NwOptions& options) {
  const std::size_t n = series.size();
  if (n < 2) throw Error(ErrorCode::EmptySupport, "series has no transitions");
  if (!(kernel.h > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
  const std::size_t pred_count = n - 1;

  std::vector<double> d2(pred_count);
  std::vector<unsigned char> active(pred_count, 1);
  for (std::size_t i = 0; i < pred_count; ++i) d2[i] = squared_distance(series[i], x);
  if (options.exclude && *options.exclude < pred_count) active[*options.exclude] = 0;

  const double h2 = kernel.h * kernel.h;
  std::vector<double> raw(pred_count, 0.0);

  switch (kernel.kind) {
    case KernelKind::Indicator:
      for (std::size_t i = 0; i < pred_count; ++i)
        if (active[i] && d2[i] <= h2) raw[i] = 1.0;
      break;
    case KernelKind::Gaussian:
    case KernelKind::GaussianTruncatedKnn: {
      std::vector<double> candidates;
      candidates.reserve(pred_count);
      for (std::size_t i = 0; i < pred_count; ++i)
        if (active[i]) candidates.push_back(d2[i]);
      if (candidates.empty()) break;
      double cutoff = *std::max_element(candidates.begin(), candidates.end());
      if (kernel.kind == KernelKind::GaussianTruncatedKnn &&
          kernel.neighbor_count < candidates.size()) {
        auto nth = candidates.begin() + static_cast<std::ptrdiff_t>(kernel.neighbor_count - 1);
        std::nth_element(candidates.begin(), nth, candidates.end());
        cutoff = *nth;
      }
      const double nearest = *std::min_element(candidates.begin(), candidates.end());
      // Shifting by the nearest distance leaves the normalized weights unchanged
      // and keeps the largest raw weight at exactly 1.
      for (std::size_t i = 0; i < pred_count; ++i)
        if (active[i] && d2[i] <= cutoff) raw[i] = std::exp(-(d2[i] - nearest) / h2);
      break;
    }
  }

  WeightedSample out{PointSet(series.dim()), {}};
  for (std::size_t i = 0; i < pred_count; ++i) {
    if (raw[i] > 0.0) {
      out.atoms.push_back(series[i + 1]);
      out.weights.push_back(raw[i]);
    }
  }
  if (out.weights.empty())
    throw Error(ErrorCode::EmptySupport, "no predecessors within the kernel support");
  normalize_weights(out.weights);
  return out;
}

PointSet pool(std::span<const PointSet> panel) {
  PointSet all(panel.empty() ? 0 : panel.front().dim());
  for (const auto& s : panel)
    for (std::size_t i = 0; i < s.size(); ++i) all.push_back(s[i]);
  return all;
}

WeightedSample nw_weights_panel(std::span<const PointSet> panel, std::span<const double> x,
                                const ResolvedKernel& kernel) {
  if (panel.empty()) throw Error(ErrorCode::InvalidCount, "panel has no series");
  std::vector<WeightedSample> parts;
  for (const auto& series : panel) {
    try {
      parts.push_back(nw_weights(series, x, kernel));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptySupport) throw;
    }
  }
  if (parts.empty()) throw Error(ErrorCode::EmptySupport, "every series has empty support");
  if (parts.size() == 1) return std::move(parts.front());

  const double share = 1.0 / static_cast<double>(parts.size());
  WeightedSample out{PointSet(panel.front().dim()), {}};
  for (const auto& part : parts) {
    for (std::size_t j = 0; j < part.size(); ++j) {
      out.atoms.push_back(part.atoms[j]);
      out.weights.push_back(share * part.weights[j]);
    }
  }
  normalize_weights(out.weights);
  return out;
}

WeightedSample empirical_stationary(const PointSet& series) {
  const std::size_t n = series.size();
  if (n < 2) throw Error(ErrorCode::InsufficientPoints, "need at least two observations");
  if (n % 2 != 0) throw Error(ErrorCode::OddLength, "series length must be even");
  WeightedSample out{PointSet(series.dim()), {}};
  for (std::size_t i = 1; i < n; i += 2) {
    out.atoms.push_back(series[i]);
    out.weights.push_back(2.0 / static_cast<double>(n));
  }
  normalize_weights(out.weights);
  return out;
}

}  // namespace vqar
