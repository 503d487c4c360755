#include "mcn/threshold_auto.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "mcn/synthetic.hpp"
#include "oracle.hpp"

namespace mcn {
namespace {

constexpr double kBin = 1.0 / 256.0;

EdgeWeightHistogram histogram_with(std::initializer_list<std::pair<int, std::uint64_t>> bins,
                                   std::uint64_t vertices = 1000) {
  EdgeWeightHistogram h;
  for (auto [b, c] : bins) {
    h.counts[static_cast<std::size_t>(b)] = c;
    h.total += c;
  }
  h.vertex_count = vertices;
  return h;
}

TEST(Histogram, BinIndexRule) {
  EXPECT_EQ(EdgeWeightHistogram::bin_of(0.0), 0);
  EXPECT_EQ(EdgeWeightHistogram::bin_of(1.0 / 512.0), 0);
  EXPECT_EQ(EdgeWeightHistogram::bin_of(1.0 / 256.0), 1);
  EXPECT_EQ(EdgeWeightHistogram::bin_of(0.999), 255);
  EXPECT_EQ(EdgeWeightHistogram::bin_of(1.0), 255);
}

TEST(Histogram, UniformImageHasOnlyZeroDifferenceWeights) {
  const ColorImage img(5, 4, 3, std::vector<ColorImage::value_type>(60, 77));
  const auto h = edge_weight_histogram(img, 1);
  // Same-pixel cross-channel edges: w = 1/512 (bin 0); spatial edges: w = 1/256 (bin 1).
  EXPECT_EQ(h.counts[0], 3u * 20u);
  const std::uint64_t spatial = (4 * 4 + 5 * 3) * 9;  // pixel pairs x channel pairs
  EXPECT_EQ(h.counts[1], spatial);
  EXPECT_EQ(h.total, h.counts[0] + h.counts[1]);
  EXPECT_EQ(h.vertex_count, 60u);
  double mass = 0.0;
  for (int b = 0; b < kWeightBins; ++b) mass += h.mass(b);
  EXPECT_NEAR(mass, 1.0, 1e-12);
}

TEST(Histogram, CorpusIsSumOfImages) {
  std::mt19937_64 rng(2);
  const std::vector<ColorImage> corpus{oracle::random_image(6, 6, 3, rng), oracle::random_image(5, 7, 3, rng)};
  auto expect = edge_weight_histogram(corpus[0], 2);
  expect.merge(edge_weight_histogram(corpus[1], 2));
  EXPECT_EQ(edge_weight_histogram(corpus, 2), expect);
  // order independence of merging
  auto rev = edge_weight_histogram(corpus[1], 2);
  rev.merge(edge_weight_histogram(corpus[0], 2));
  EXPECT_EQ(rev, expect);
}

TEST(Histogram, MatchesOracleWeightList) {
  std::mt19937_64 rng(4);
  const auto img = oracle::random_image(8, 8, 3, rng);
  std::array<std::uint64_t, 256> expect{};
  for (const auto& e : oracle::all_pairs_edges(img, 1))
    ++expect[static_cast<std::size_t>(std::min(255, static_cast<int>(std::floor(e.w * 256))))];
  EXPECT_EQ(edge_weight_histogram(img, 1).counts, expect);
}

TEST(Histogram, EmptyCorpusRejected) {
  EXPECT_THROW(edge_weight_histogram(std::span<const ColorImage>{}, 1), InvalidParameter);
  EXPECT_THROW(lower_limit(EdgeWeightHistogram{}), InvalidParameter);
}

TEST(LowerLimit, PeakBinUpperEdgeWithLowTieBreak) {
  EXPECT_DOUBLE_EQ(lower_limit(histogram_with({{0, 10}})), 1.0 / 256.0);
  EXPECT_DOUBLE_EQ(lower_limit(histogram_with({{3, 50}, {40, 50}, {10, 5}})), 4.0 / 256.0);
}

TEST(UpperLimitQuantile, UniformAndPointMass) {
  EdgeWeightHistogram uniform;
  for (auto& c : uniform.counts) c = 3;
  uniform.total = 3 * 256;
  uniform.vertex_count = 1;
  // Cumulative mass (i + 1) / 256 first reaches 0.9 at i = 230.
  EXPECT_DOUBLE_EQ(upper_limit_quantile(uniform, 0.9), 231.0 / 256.0);
  EXPECT_DOUBLE_EQ(upper_limit_quantile(histogram_with({{17, 9}}), 0.9), 18.0 / 256.0);
  EXPECT_THROW(upper_limit_quantile(uniform, 1.0), InvalidParameter);
}

TEST(UpperLimitQuantile, MonotoneInQ) {
  std::mt19937_64 rng(6);
  const auto h = edge_weight_histogram(oracle::random_image(12, 12, 3, rng), 1);
  double prev = 0.0;
  for (double q = 0.05; q < 1.0; q += 0.05) {
    const double t = upper_limit_quantile(h, q);
    EXPECT_GE(t, prev);
    prev = t;
  }
}

TEST(UpperLimitMeanDegree, FullDensityMeanDegreeOnR1) {
  std::mt19937_64 rng(8);
  const auto img = oracle::random_image(32, 32, 3, rng);
  const auto edges = oracle::all_pairs_edges(img, 1);
  const double gamma0 = 2.0 * static_cast<double>(edges.size()) / img.vertex_count();
  // 4 same-layer + 2 x (1 + 4) cross-layer neighbours, border-thinned.
  EXPECT_DOUBLE_EQ(gamma0, 41856.0 / 3072.0);
  EXPECT_NEAR(gamma0, 14.0, 0.5);
  const auto h = edge_weight_histogram(img, 1);
  EXPECT_DOUBLE_EQ(2.0 * h.total / h.vertex_count, gamma0);
}

TEST(UpperLimitMeanDegree, AllEqualWeightsStepAtOneBin) {
  const ColorImage img(6, 6, 1, std::vector<ColorImage::value_type>(36, 9));
  const auto h = edge_weight_histogram(img, 1);
  ASSERT_EQ(h.counts[1], h.total);
  EXPECT_DOUBLE_EQ(upper_limit_mean_degree(h), 2.0 / 256.0);
}

TEST(UpperLimitMeanDegree, WithinOneBinOfOracleCrossing) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<ColorImage> corpus;
    for (int i = 0; i < 3; ++i) {
      if (trial % 2 == 0) {
        corpus.push_back(oracle::random_image(10, 9, 3, rng));
      } else {
        auto p = synth::random_params(rng);
        corpus.push_back(synth::gradient_texture(12, 10, p, rng));
      }
    }
    std::vector<double> weights;
    std::size_t n = 0;
    for (const auto& img : corpus) {
      for (const auto& e : oracle::all_pairs_edges(img, 1)) weights.push_back(e.w);
      n += img.vertex_count();
    }
    std::sort(weights.begin(), weights.end(), std::greater<>());
    // Smallest t with |{w > t}| <= n / 2 is the (floor(n/2) + 1)-th largest weight.
    const double crossing = weights[n / 2];
    const double rule = upper_limit_mean_degree(edge_weight_histogram(corpus, 1));
    EXPECT_LE(std::abs(rule - crossing), kBin) << "trial " << trial;
  }
}

TEST(ThresholdSet, ArithmeticProgression) {
  const auto two = threshold_set(0.1, 0.3, 2);
  ASSERT_EQ(two.m(), 2u);
  EXPECT_DOUBLE_EQ(two.thresholds[0], 0.1);
  EXPECT_DOUBLE_EQ(two.thresholds[1], 0.3);
  const auto five = threshold_set(0.1, 0.3, 5);
  const double expect[] = {0.1, 0.15, 0.2, 0.25, 0.3};
  for (int j = 0; j < 5; ++j) EXPECT_NEAR(five.thresholds[j], expect[j], 1e-15);
  EXPECT_DOUBLE_EQ(five.thresholds.front(), 0.1);
  EXPECT_DOUBLE_EQ(five.thresholds.back(), 0.3);
  const double gap = five.thresholds[1] - five.thresholds[0];
  for (int j = 1; j < 5; ++j)
    EXPECT_NEAR(five.thresholds[j] - five.thresholds[j - 1], gap, 1e-12 * gap);
  EXPECT_TRUE(five.warnings.empty());
}

TEST(ThresholdSet, DegenerateRangeWarns) {
  const auto plan = threshold_set(0.2, 0.2, 4);
  EXPECT_EQ(plan.thresholds, std::vector<double>(4, 0.2));
  EXPECT_FALSE(plan.warnings.empty());
}

TEST(ThresholdSet, Errors) {
  EXPECT_THROW(threshold_set(0.1, 0.3, 1), InvalidParameter);
  EXPECT_THROW(threshold_set(0.4, 0.3, 4), InvalidParameter);
}

TEST(Plan, ClampsUpperLimitBelowPeak) {
  // A flat low tail holding 90% of the mass, with the single tallest bin above it.
  auto h = histogram_with({{100, 5}});
  for (int b = 1; b <= 46; ++b) {
    h.counts[static_cast<std::size_t>(b)] = 1;
    ++h.total;
  }
  ASSERT_LT(upper_limit_quantile(h, 0.9), lower_limit(h));
  const auto plan = plan_from_histogram(h, 3);
  EXPECT_DOUBLE_EQ(plan.t1, plan.tm);
  EXPECT_FALSE(plan.warnings.empty());
}

std::vector<ColorImage> synthetic_classes(int classes, int per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ColorImage> out;
  for (int c = 0; c < classes; ++c) {
    const auto p = synth::random_params(rng);
    for (int i = 0; i < per_class; ++i) out.push_back(synth::gradient_texture(32, 32, p, rng));
  }
  return out;
}

TEST(Properties, OneImagePerClassIsEnough) {
  const int classes = 8, per = 6;
  const auto corpus = synthetic_classes(classes, per, 21);
  const auto full = edge_weight_histogram(corpus, 1);
  std::vector<ColorImage> sample;
  for (int c = 0; c < classes; ++c) sample.push_back(corpus[static_cast<std::size_t>(c * per)]);
  const auto part = edge_weight_histogram(sample, 1);
  EXPECT_LE(std::abs(lower_limit(full) - lower_limit(part)), 2 * kBin + 1e-15);
  EXPECT_LE(std::abs(upper_limit_quantile(full) - upper_limit_quantile(part)), 2 * kBin + 1e-15);
}

ColorImage compress(const ColorImage& img, double alpha) {
  double mean = 0.0;
  for (auto v : img.data()) mean += v;
  mean /= static_cast<double>(img.vertex_count());
  std::vector<ColorImage::value_type> data;
  for (auto v : img.data())
    data.push_back(static_cast<ColorImage::value_type>(std::lround(mean + (v - mean) * alpha)));
  return ColorImage(img.width(), img.height(), img.channels(), std::move(data), img.max_level());
}

TEST(Properties, CompressingIntensitiesNeverRaisesLimits) {
  const auto corpus = synthetic_classes(4, 2, 33);
  const auto base = edge_weight_histogram(corpus, 1);
  for (double alpha : {0.8, 0.5, 0.25}) {
    std::vector<ColorImage> squashed;
    for (const auto& img : corpus) squashed.push_back(compress(img, alpha));
    const auto h = edge_weight_histogram(squashed, 1);
    // The peak can hop one bin up under mild compression when the histogram is
    // flat-topped, so t1 is only checked once the mass has clearly collapsed.
    if (alpha <= 0.5) {
      EXPECT_LE(lower_limit(h), lower_limit(base)) << alpha;
    }
    EXPECT_LE(upper_limit_quantile(h), upper_limit_quantile(base)) << alpha;
    EXPECT_LE(upper_limit_mean_degree(h), upper_limit_mean_degree(base)) << alpha;
  }
}

TEST(Export, CsvHas256Rows) {
  std::mt19937_64 rng(1);
  const auto h = edge_weight_histogram(oracle::random_image(4, 4, 3, rng), 1);
  std::ostringstream os;
  write_histogram_csv(os, h);
  const auto text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 257);
  EXPECT_EQ(text.rfind("bin_low,bin_high,count,normalized_mass\n", 0), 0u);
}

}  // namespace
}  // namespace mcn
