#pragma once

// Full descriptor: for every radius and threshold, the degree and clustering
// statistics of the requested networks, concatenated as
// variants > radii (ascending) > thresholds (ascending) > statistics.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "mcn/error.hpp"
#include "mcn/graph_model.hpp"
#include "mcn/image.hpp"
#include "mcn/net_measures.hpp"
#include "mcn/threshold_auto.hpp"

namespace mcn {

enum class Statistic { Mean, StdDev, Energy, Entropy };

inline constexpr std::string_view to_string(Statistic s) noexcept {
  switch (s) {
    case Statistic::Mean: return "mean";
    case Statistic::StdDev: return "std";
    case Statistic::Energy: return "energy";
    case Statistic::Entropy: return "entropy";
  }
  return "?";
}

struct ExtractionConfig {
  std::vector<int> radii{1, 2, 3, 4, 5, 6};
  int m = 10;
  std::vector<NetworkVariant> variants{NetworkVariant::N};
  SigmaMode sigma_mode = SigmaMode::Normalized;
  int histogram_radius = 1;
  UpperRule rule = UpperRule::Quantile;
  double quantile = 0.9;
  /// When set, [t1, t_m] is used as given instead of being estimated.
  std::optional<std::pair<double, double>> explicit_range;

  void validate() const {
    detail::require(!radii.empty(), "radius set must not be empty");
    detail::require(radii.front() >= 1, "radii must be >= 1");
    for (std::size_t i = 1; i < radii.size(); ++i)
      detail::require(radii[i] > radii[i - 1], "radii must be strictly increasing");
    detail::require(m >= 2, "threshold count m must be >= 2");
    detail::require(!variants.empty(), "variant set must not be empty");
    detail::require(histogram_radius >= 1, "histogram radius must be >= 1");
    detail::require(quantile > 0.0 && quantile < 1.0, "quantile must lie in (0, 1)");
  }
};

struct FeatureColumn {
  NetworkVariant variant;
  int radius;
  int threshold_index;
  Measure measure;
  Statistic statistic;

  std::string name() const {
    return std::string(to_string(variant)) + "_r" + std::to_string(radius) + "_t" +
           std::to_string(threshold_index) + "_" + (measure == Measure::Degree ? "k" : "c") + "_" +
           std::string(to_string(statistic));
  }
  bool operator==(const FeatureColumn&) const = default;
};

/// W at r = 1 has no triangles (4-neighbour lattice within one layer), so its
/// clustering block is omitted.
inline bool has_clustering_block(NetworkVariant v, int radius) noexcept {
  return !(v == NetworkVariant::W && radius == 1);
}

inline std::vector<FeatureColumn> feature_layout(const ExtractionConfig& cfg) {
  cfg.validate();
  std::vector<FeatureColumn> cols;
  constexpr Statistic stats[] = {Statistic::Mean, Statistic::StdDev, Statistic::Energy,
                                 Statistic::Entropy};
  for (auto v : cfg.variants)
    for (int r : cfg.radii)
      for (int j = 0; j < cfg.m; ++j) {
        for (auto s : stats) cols.push_back({v, r, j, Measure::Degree, s});
        if (has_clustering_block(v, r))
          for (auto s : stats) cols.push_back({v, r, j, Measure::Clustering, s});
      }
  return cols;
}

/// 8 |R| m per variant, minus 4 m for W when 1 is among the radii.
inline std::size_t feature_length(const ExtractionConfig& cfg) {
  std::size_t len = 0;
  const auto per = 8 * cfg.radii.size() * static_cast<std::size_t>(cfg.m);
  const bool has_r1 = std::find(cfg.radii.begin(), cfg.radii.end(), 1) != cfg.radii.end();
  for (auto v : cfg.variants)
    len += per - (v == NetworkVariant::W && has_r1 ? 4 * static_cast<std::size_t>(cfg.m) : 0);
  return len;
}

struct FeatureVector {
  std::vector<double> values;
  std::vector<FeatureColumn> layout;
};

inline void append_stats(std::vector<double>& out, const StatBlock& s) {
  out.insert(out.end(), {s.mean, s.stddev, s.energy, s.entropy});
}

inline FeatureVector extract(const ColorImage& img, const ExtractionConfig& cfg,
                             const ThresholdPlan& plan) {
  cfg.validate();
  detail::require(plan.m() == static_cast<std::size_t>(cfg.m),
                  "threshold plan size does not match configured m");
  const bool needs_layers = std::any_of(cfg.variants.begin(), cfg.variants.end(),
                                        [](NetworkVariant v) { return v != NetworkVariant::N; });
  if (needs_layers && img.channels() != 3)
    throw InvalidParameter("W and B variants need a 3-channel image, got " +
                           std::to_string(img.channels()));

  // blocks[variant][radius][threshold] -> (degree stats, clustering stats)
  const std::size_t nv = cfg.variants.size();
  const std::size_t nr = cfg.radii.size();
  const auto m = static_cast<std::size_t>(cfg.m);
  std::vector<std::pair<StatBlock, StatBlock>> blocks(nv * nr * m);
  for (std::size_t ri = 0; ri < nr; ++ri) {
    const int r = cfg.radii[ri];
    const ThresholdSweep sweep(img, build_stencil(r, img.channels()), plan.thresholds);
    for (std::size_t vi = 0; vi < nv; ++vi) {
      const auto v = cfg.variants[vi];
      for (std::size_t j = 0; j < m; ++j) {
        auto& [ks, cs] = blocks[(vi * nr + ri) * m + j];
        ks = degree_stats(sweep.degrees(v, j), cfg.sigma_mode);
        if (has_clustering_block(v, r)) cs = clustering_stats(sweep.clusterings(v, j), cfg.sigma_mode);
      }
    }
  }

  FeatureVector fv;
  fv.layout = feature_layout(cfg);
  fv.values.reserve(fv.layout.size());
  for (std::size_t vi = 0; vi < nv; ++vi)
    for (std::size_t ri = 0; ri < nr; ++ri)
      for (std::size_t j = 0; j < m; ++j) {
        const auto& [ks, cs] = blocks[(vi * nr + ri) * m + j];
        append_stats(fv.values, ks);
        if (has_clustering_block(cfg.variants[vi], cfg.radii[ri])) append_stats(fv.values, cs);
      }
  return fv;
}

/// Threshold plan for a corpus: explicit range if configured, otherwise
/// estimated from the images selected by `training` (all images when empty).
inline ThresholdPlan corpus_plan(std::span<const ColorImage> corpus, const ExtractionConfig& cfg,
                                 std::span<const std::size_t> training = {}) {
  cfg.validate();
  if (cfg.explicit_range) return threshold_set(cfg.explicit_range->first, cfg.explicit_range->second, cfg.m);
  detail::require(!corpus.empty(), "corpus must not be empty");
  EdgeWeightHistogram hist;
  hist.source_radius = cfg.histogram_radius;
  if (training.empty()) {
    hist = edge_weight_histogram(corpus, cfg.histogram_radius);
  } else {
    for (auto i : training) {
      detail::require(i < corpus.size(), "training index out of range");
      hist.merge(edge_weight_histogram(corpus[i], cfg.histogram_radius));
    }
  }
  return plan_from_histogram(hist, cfg.m, cfg.rule, cfg.quantile);
}

struct FeatureMatrix {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<FeatureColumn> layout;
  ThresholdPlan plan;
};

/// Runs `fn(i)` for i in [0, count) on up to `jobs` threads; rethrows the
/// first failure.
template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

inline FeatureMatrix extract_batch(std::span<const ColorImage> corpus, std::span<const int> labels,
                                   const ExtractionConfig& cfg,
                                   std::span<const std::size_t> training = {}, unsigned jobs = 1) {
  cfg.validate();
  detail::require(labels.size() == corpus.size(), "label count does not match corpus size");
  if (!corpus.empty()) {
    const int z = corpus.front().channels();
    for (const auto& img : corpus)
      detail::require(img.channels() == z, "corpus mixes images with different channel counts");
  }
  FeatureMatrix fm;
  fm.layout = feature_layout(cfg);
  fm.labels.assign(labels.begin(), labels.end());
  if (corpus.empty()) return fm;
  fm.plan = corpus_plan(corpus, cfg, training);
  fm.rows.resize(corpus.size());
  parallel_for(corpus.size(), jobs,
               [&](std::size_t i) { fm.rows[i] = extract(corpus[i], cfg, fm.plan).values; });
  return fm;
}

}  // namespace mcn
