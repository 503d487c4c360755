#pragma once

// Adaptive threshold range [t1, t_m] estimated from the pooled edge-weight
// distribution P(w) of a corpus sample, discretised into 256 bins over [0, 1].

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mcn/error.hpp"
#include "mcn/graph_model.hpp"
#include "mcn/image.hpp"

namespace mcn {

inline constexpr int kWeightBins = 256;

struct EdgeWeightHistogram {
  std::array<std::uint64_t, kWeightBins> counts{};
  std::uint64_t total = 0;         ///< undirected edges accumulated
  std::uint64_t vertex_count = 0;  ///< vertices of all networks accumulated
  int source_radius = 1;

  static int bin_of(double w) noexcept {
    const auto b = static_cast<int>(std::floor(w * kWeightBins));
    return std::clamp(b, 0, kWeightBins - 1);
  }
  /// Representative weight of a bin: its upper edge.
  static double bin_value(int bin) noexcept { return (bin + 1.0) / kWeightBins; }

  void add(double w) noexcept {
    ++counts[static_cast<std::size_t>(bin_of(w))];
    ++total;
  }

  double mass(int bin) const noexcept {
    return total == 0 ? 0.0 : static_cast<double>(counts[static_cast<std::size_t>(bin)]) / total;
  }

  EdgeWeightHistogram& merge(const EdgeWeightHistogram& other) {
    detail::require(other.source_radius == source_radius,
                    "cannot merge histograms built with different radii");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    total += other.total;
    vertex_count += other.vertex_count;
    return *this;
  }

  bool operator==(const EdgeWeightHistogram&) const = default;
};

inline EdgeWeightHistogram edge_weight_histogram(const ColorImage& img, int radius = 1) {
  EdgeWeightHistogram h;
  h.source_radius = radius;
  const auto stencil = build_stencil(radius, img.channels());
  for_each_edge(img, stencil, [&](VertexId, VertexId, double w, const StencilOffset&) { h.add(w); });
  h.vertex_count = img.vertex_count();
  return h;
}

inline EdgeWeightHistogram edge_weight_histogram(std::span<const ColorImage> images, int radius = 1) {
  detail::require(!images.empty(), "edge-weight histogram needs a non-empty corpus sample");
  const int level = images.front().max_level();
  EdgeWeightHistogram h;
  h.source_radius = radius;
  for (const auto& img : images) {
    detail::require(img.max_level() == level, "all corpus images must share the same max level");
    h.merge(edge_weight_histogram(img, radius));
  }
  return h;
}

/// t1: representative of the most populated bin; ties go to the smallest index.
inline double lower_limit(const EdgeWeightHistogram& h) {
  detail::require(h.total > 0, "lower limit of an empty histogram is undefined");
  const auto it = std::max_element(h.counts.begin(), h.counts.end());
  return EdgeWeightHistogram::bin_value(static_cast<int>(it - h.counts.begin()));
}

/// t_m: smallest bin upper edge whose cumulative normalised mass reaches q.
inline double upper_limit_quantile(const EdgeWeightHistogram& h, double q = 0.9) {
  detail::require(h.total > 0, "upper limit of an empty histogram is undefined");
  detail::require(q > 0.0 && q < 1.0, "quantile must lie in (0, 1)");
  std::uint64_t cum = 0;
  for (int b = 0; b < kWeightBins; ++b) {
    cum += h.counts[static_cast<std::size_t>(b)];
    if (static_cast<double>(cum) / static_cast<double>(h.total) >= q)
      return EdgeWeightHistogram::bin_value(b);
  }
  return 1.0;
}

/// Pooled mean degree 2 |{w > t}| / n evaluated at the upper edge of `bin`.
inline double mean_degree_at_bin(const EdgeWeightHistogram& h, int bin) {
  detail::require(h.vertex_count > 0, "histogram carries no vertex count");
  std::uint64_t tail = 0;
  for (int b = bin + 1; b < kWeightBins; ++b) tail += h.counts[static_cast<std::size_t>(b)];
  return 2.0 * static_cast<double>(tail) / static_cast<double>(h.vertex_count);
}

/// t_m: smallest bin upper edge at which the pooled mean degree 2|E_{>t}|/n
/// first drops to <= 1.
inline double upper_limit_mean_degree(const EdgeWeightHistogram& h) {
  detail::require(h.total > 0, "upper limit of an empty histogram is undefined");
  detail::require(h.vertex_count > 0, "histogram carries no vertex count");
  std::uint64_t tail = h.total;
  for (int b = 0; b < kWeightBins; ++b) {
    tail -= h.counts[static_cast<std::size_t>(b)];
    if (2 * tail <= h.vertex_count) return EdgeWeightHistogram::bin_value(b);
  }
  return 1.0;
}

struct ThresholdPlan {
  double t1 = 0.0;
  double tm = 0.0;
  std::vector<double> thresholds;
  std::vector<std::string> warnings;

  std::size_t m() const noexcept { return thresholds.size(); }
};

inline ThresholdPlan threshold_set(double t1, double tm, int m) {
  detail::require(m >= 2, "threshold count m must be >= 2, got " + std::to_string(m));
  detail::require(t1 <= tm, "lower threshold limit exceeds upper limit");
  detail::require(t1 >= 0.0 && tm <= 1.0, "threshold limits must lie in [0, 1]");
  ThresholdPlan plan{t1, tm, {}, {}};
  plan.thresholds.resize(static_cast<std::size_t>(m));
  const double step = (tm - t1) / (m - 1);
  for (int j = 0; j < m; ++j) plan.thresholds[static_cast<std::size_t>(j)] = t1 + j * step;
  plan.thresholds.back() = tm;
  if (t1 == tm)
    plan.warnings.push_back("degenerate threshold range: t1 == t_m, all thresholds are equal");
  return plan;
}

enum class UpperRule { Quantile, MeanDegree };

inline UpperRule parse_upper_rule(std::string_view s) {
  if (s == "quantile") return UpperRule::Quantile;
  if (s == "mean-degree") return UpperRule::MeanDegree;
  throw InvalidParameter("unknown threshold rule '" + std::string(s) +
                         "' (expected quantile or mean-degree)");
}

/// Full automatic plan from a histogram. An upper limit below t1 is clamped to
/// t1 and reported in the plan's warnings.
inline ThresholdPlan plan_from_histogram(const EdgeWeightHistogram& h, int m,
                                         UpperRule rule = UpperRule::Quantile, double q = 0.9) {
  const double t1 = lower_limit(h);
  double tm = rule == UpperRule::Quantile ? upper_limit_quantile(h, q) : upper_limit_mean_degree(h);
  std::vector<std::string> warnings;
  if (tm < t1) {
    warnings.push_back("upper limit fell below the histogram peak; clamped to t1");
    tm = t1;
  }
  auto plan = threshold_set(t1, tm, m);
  plan.warnings.insert(plan.warnings.begin(), warnings.begin(), warnings.end());
  return plan;
}

inline void write_histogram_csv(std::ostream& os, const EdgeWeightHistogram& h) {
  os << "bin_low,bin_high,count,normalized_mass\n";
  os << std::setprecision(17);
  for (int b = 0; b < kWeightBins; ++b) {
    os << static_cast<double>(b) / kWeightBins << ',' << EdgeWeightHistogram::bin_value(b) << ','
       << h.counts[static_cast<std::size_t>(b)] << ',' << h.mass(b) << '\n';
  }
}

}  // namespace mcn
