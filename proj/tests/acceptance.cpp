// Acceptance suite: one PASS / FAIL / SKIP line per criterion.
//
//   acceptance              criteria 1-7 and 9; 8 prints SKIP
//   acceptance --datasets   also runs 8 against $MCN_DATA_ROOT/{vistex,usptex,outex13,mbt}
//
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mcn/classify.hpp"
#include "mcn/dataset.hpp"
#include "mcn/descriptor.hpp"
#include "mcn/synthetic.hpp"
#include "oracle.hpp"

using namespace mcn;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  enum Kind { Pass, Fail, Skip } kind;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Fail, std::move(d)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

oracle::Kind oracle_kind(NetworkVariant v) {
  return v == NetworkVariant::N ? oracle::Kind::N : v == NetworkVariant::W ? oracle::Kind::W : oracle::Kind::B;
}

constexpr NetworkVariant kAll[] = {NetworkVariant::N, NetworkVariant::W, NetworkVariant::B};

// 1. Streaming implementation vs all-pairs oracle.
Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  const std::vector<double> ts{0.0, 0.05, 0.1, 0.3, 0.9};
  std::mt19937_64 rng(20240101);
  std::size_t checks = 0;
  for (int img_i = 0; img_i < 50; ++img_i) {
    const auto img = oracle::random_image(8, 8, 3, rng);
    const std::size_t n = img.vertex_count();
    for (int r = 1; r <= 3; ++r) {
      const auto stencil = build_stencil(r, 3);
      const auto all = oracle::all_pairs_edges(img, r);
      const auto net = build_network(img, stencil);
      const ThresholdSweep sweep(img, stencil, ts);
      for (std::size_t j = 0; j < ts.size(); ++j) {
        const auto cut = apply_threshold(net, ts[j]);
        for (auto v : kAll) {
          const auto expect = oracle::filter(all, 3, ts[j], oracle_kind(v));
          auto got = select_variant(cut, v).edges;
          std::sort(got.begin(), got.end());
          std::vector<oracle::Edge> got_o;
          for (const auto& e : got) got_o.push_back({e.a, e.b, e.weight});
          auto want = expect;
          std::sort(want.begin(), want.end());
          if (got_o != want)
            return fail(fmt("edge set mismatch: image %d r=%d t=%g %s", img_i, r, ts[j],
                            std::string(to_string(v)).c_str()));
          const auto f = oracle::fields(n, expect);
          const auto deg = sweep.degrees(v, j);
          const auto clu = sweep.clusterings(v, j);
          const auto sub = select_variant(cut, v);
          const auto ref_deg = degree_field(sub);
          const auto ref_clu = clustering_field(sub);
          if (!std::equal(deg.begin(), deg.end(), f.degree.begin()) || ref_deg != f.degree)
            return fail(fmt("degree mismatch: image %d r=%d t=%g %s", img_i, r, ts[j],
                            std::string(to_string(v)).c_str()));
          if (clu != f.clustering || ref_clu != f.clustering)
            return fail(fmt("clustering mismatch: image %d r=%d t=%g %s", img_i, r, ts[j],
                            std::string(to_string(v)).c_str()));
          ++checks;
        }
      }
    }
  }
  const double dt = seconds_since(t0);
  if (dt >= 60.0) return fail(fmt("exact, but took %.1f s (limit 60 s)", dt));
  return pass(fmt("%zu (image, r, t, variant) cases exact, %.2f s", checks, dt));
}

// 2. Stencil sizes vs lattice enumeration.
Outcome stencil_geometry() {
  const auto s1 = build_stencil(1, 3).size();
  if (s1 != 14) return fail(fmt("|stencil(1,3)| = %zu, expected 14", s1));
  std::string counts;
  for (int r = 2; r <= 6; ++r) {
    const auto got = build_stencil(r, 3).size();
    const auto want = static_cast<std::size_t>(oracle::lattice_points(r) * 3 - 1);
    if (got != want) return fail(fmt("r=%d: %zu vs lattice %zu", r, got, want));
    counts += fmt(" r%d=%zu", r, got);
  }
  if (build_stencil(2, 3).size() != 38) return fail("r=2 count is not 38");
  return pass("r1=14" + counts);
}

// 3. Feature-length law over random configurations.
Outcome feature_length_law() {
  std::mt19937_64 rng(33);
  const auto img = synth::gradient_texture(12, 12, synth::correlated_params(rng), rng);
  for (int k = 0; k < 20; ++k) {
    ExtractionConfig cfg;
    cfg.radii.clear();
    while (cfg.radii.empty())
      for (int r = 1; r <= 6; ++r)
        if (rng() % 2) cfg.radii.push_back(r);
    cfg.m = 2 + static_cast<int>(rng() % 11);
    cfg.variants.clear();
    std::vector<NetworkVariant> pool(std::begin(kAll), std::end(kAll));
    std::shuffle(pool.begin(), pool.end(), rng);
    cfg.variants.assign(pool.begin(), pool.begin() + 1 + static_cast<long>(rng() % 3));

    const bool has_r1 = cfg.radii.front() == 1;
    std::size_t expect = 0;
    for (auto v : cfg.variants)
      expect += 8 * cfg.radii.size() * static_cast<std::size_t>(cfg.m) -
                (v == NetworkVariant::W && has_r1 ? 4 * static_cast<std::size_t>(cfg.m) : 0);
    const auto fv = extract(img, cfg, threshold_set(0.02, 0.2, cfg.m));
    if (fv.values.size() != expect || fv.layout.size() != expect || feature_length(cfg) != expect)
      return fail(fmt("config %d: |phi| = %zu, expected %zu", k, fv.values.size(), expect));
  }
  return pass("20 random configurations exact");
}

// Independent histogram of N^r edge weights: direct neighbourhood loops.
std::array<std::uint64_t, 256> brute_histogram(const ColorImage& img, int r) {
  std::array<std::uint64_t, 256> h{};
  const int w = img.width(), hgt = img.height(), z = img.channels();
  const double L = img.max_level();
  for (int y = 0; y < hgt; ++y)
    for (int x = 0; x < w; ++x)
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          if (dx * dx + dy * dy > r * r) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= hgt) continue;
          const double d = std::sqrt(static_cast<double>(dx * dx + dy * dy));
          for (int c = 0; c < z; ++c)
            for (int c2 = 0; c2 < z; ++c2) {
              const auto a = img.index(x, y, c), b = img.index(nx, ny, c2);
              if (b <= a) continue;
              const double wt = ((std::abs(int(img.at(x, y, c)) - int(img.at(nx, ny, c2))) + 1.0) / (L + 1.0)) *
                                ((d + 1.0) / (r + 1.0));
              ++h[static_cast<std::size_t>(std::min(255, static_cast<int>(std::floor(wt * 256))))];
            }
        }
  return h;
}

// 4. Quantile vs mean-degree upper limits on a mixed synthetic corpus.
Outcome threshold_rule_consistency() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(44);
  std::vector<ColorImage> corpus;
  for (int i = 0; i < 200; ++i) {
    const auto p = i % 2 ? synth::correlated_noise_params(rng) : synth::correlated_params(rng);
    corpus.push_back(synth::gradient_texture(32, 32, p, rng));
  }
  const auto h = edge_weight_histogram(corpus, 1);
  std::array<std::uint64_t, 256> brute{};
  for (const auto& img : corpus) {
    const auto b = brute_histogram(img, 1);
    for (int i = 0; i < 256; ++i) brute[i] += b[i];
  }
  if (brute != h.counts) return fail("pooled histogram differs from direct enumeration");
  const auto peak = std::max_element(brute.begin(), brute.end()) - brute.begin();
  const double t1 = lower_limit(h);
  if (t1 != (peak + 1) / 256.0) return fail(fmt("t1 = %g, argmax bin edge = %g", t1, (peak + 1) / 256.0));
  const int q_bin = static_cast<int>(std::lround(upper_limit_quantile(h, 0.9) * 256));
  const int g_bin = static_cast<int>(std::lround(upper_limit_mean_degree(h) * 256));
  const double dt = seconds_since(t0);
  const auto detail = fmt("t1=%ld/256, quantile(0.9)=%d/256, mean-degree=%d/256, %.2f s", peak + 1, q_bin,
                          g_bin, dt);
  if (std::abs(q_bin - g_bin) > 3) return fail("bins differ by more than 3: " + detail);
  if (dt >= 120.0) return fail("too slow: " + detail);
  return pass(detail);
}

// 5. W at r = 1 has no triangles.
Outcome w_r1_clustering() {
  std::mt19937_64 rng(55);
  std::vector<double> ts;
  for (int j = 0; j < 12; ++j) ts.push_back(j / 64.0);
  std::size_t values = 0;
  for (int i = 0; i < 20; ++i) {
    const auto img = i % 2 ? synth::uniform_noise(24, 24, 3, rng)
                           : synth::gradient_texture(24, 24, synth::correlated_params(rng), rng);
    const ThresholdSweep sweep(img, build_stencil(1, 3), ts);
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const auto t = sweep.neighbor_edges(NetworkVariant::W, j);
      const auto c = sweep.clusterings(NetworkVariant::W, j);
      if (std::any_of(t.begin(), t.end(), [](auto v) { return v != 0; }) ||
          std::any_of(c.begin(), c.end(), [](double v) { return v != 0.0; }))
        return fail(fmt("image %d threshold %g has W triangles", i, ts[j]));
      values += c.size();
    }
  }
  return pass(fmt("20 images x %zu thresholds, %zu clustering values all 0", ts.size(), values));
}

// 6. Statistics identities.
Outcome statistics_identities() {
  auto rel = [](double got, double want) {
    return want == 0.0 ? std::abs(got) : std::abs(got - want) / std::abs(want);
  };
  for (auto mode : {SigmaMode::Normalized, SigmaMode::Verbatim}) {
    const std::vector<std::uint32_t> k(97, 6);
    const auto ks = degree_stats(k, mode);
    if (ks.stddev != 0.0 || ks.energy != 1.0 || ks.entropy != 0.0) return fail("degree point mass");
    const std::vector<double> c(53, 0.4);
    const auto cs = clustering_stats(c, mode);
    if (cs.stddev != 0.0 || cs.energy != 1.0 || cs.entropy != 0.0) return fail("clustering point mass");
  }
  for (int b : {2, 3, 7, 16, 100, 256}) {
    std::vector<std::uint32_t> k;
    std::vector<double> c;
    for (int rep = 0; rep < 5; ++rep)
      for (int i = 0; i < b; ++i) {
        k.push_back(static_cast<std::uint32_t>(3 * i));
        c.push_back((i * (256 / b) + 0.5) / 256.0);  // centre of a distinct bin
      }
    const auto ks = degree_stats(k, SigmaMode::Normalized);
    const auto cs = clustering_stats(c, SigmaMode::Normalized);
    for (const auto& s : {ks, cs})
      if (rel(s.energy, 1.0 / b) > 1e-12 || rel(s.entropy, std::log(static_cast<double>(b))) > 1e-12)
        return fail(fmt("uniform over %d bins: e=%.17g eps=%.17g", b, s.energy, s.entropy));
  }
  return pass("point masses exact; uniform b in {2,3,7,16,100,256} within 1e-12");
}

// 7. LOO-LDA sanity.
Outcome loo_sanity() {
  auto make = [](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    FeatureRows x;
    std::vector<int> y;
    for (int c = 0; c < 4; ++c)
      for (int i = 0; i < 15; ++i) {
        std::vector<double> row(20);
        for (int j = 0; j < 20; ++j) row[j] = g(rng) + (j % 4 == c ? 8.0 : 0.0);
        x.push_back(std::move(row));
        y.push_back(c);
      }
    return std::pair{x, y};
  };
  const auto [x, y] = make(7);
  const double acc = loo_evaluate(x, y).accuracy;
  if (acc != 1.0) return fail(fmt("separable accuracy %.4f", acc));
  double sum = 0.0;
  int in_range = 0;
  std::string list;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto shuffled = y;
    std::mt19937_64 rng(1000 + seed);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const double a = loo_evaluate(x, shuffled).accuracy;
    sum += a;
    in_range += a >= 0.15 && a <= 0.35;
    list += fmt(" %.2f", a);
  }
  const double mean = sum / 10;
  const auto detail = fmt("separable 1.0; shuffled mean %.3f, %d/10 in [0.15,0.35]:", mean, in_range) + list;
  if (mean < 0.15 || mean > 0.35 || in_range < 8) return fail(detail);
  return pass(detail);
}

// 8. Benchmark datasets, only with --datasets and MCN_DATA_ROOT.
Outcome benchmark_datasets(bool enabled) {
  const char* root = std::getenv("MCN_DATA_ROOT");
  if (!enabled) return {Outcome::Skip, "external datasets; run `acceptance --datasets` with MCN_DATA_ROOT set"};
  if (!root) return {Outcome::Skip, "MCN_DATA_ROOT not set"};
  struct Case {
    const char* name;
    std::vector<NetworkVariant> variants;
    std::vector<int> radii;
    double floor;
  };
  const std::vector<Case> cases = {
      {"vistex", {NetworkVariant::N}, {1, 2, 3, 4, 5}, 0.99},
      {"usptex", {NetworkVariant::N, NetworkVariant::W, NetworkVariant::B}, {1, 2, 3, 4, 5}, 0.98},
      {"outex13", {NetworkVariant::N}, {1, 2, 3, 4, 5, 6}, 0.94},
      {"mbt", {NetworkVariant::W}, {1, 2, 3, 4, 5, 6}, 0.96},
  };
  std::string detail;
  bool any = false, ok = true;
  const unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  for (const auto& c : cases) {
    const fs::path dir = fs::path(root) / c.name;
    if (!fs::is_directory(dir)) {
      detail += std::string(" ") + c.name + "=absent";
      continue;
    }
    any = true;
    const auto out = fs::temp_directory_path() / (std::string("mcn_acceptance_") + c.name);
    fs::remove_all(out);
    const auto manifest = tile_dataset(dir, tile_protocol(c.name), out);
    const auto corpus = load_corpus(manifest);
    std::vector<int> labels;
    for (const auto& e : manifest.entries) labels.push_back(e.label);
    ExtractionConfig cfg;
    cfg.radii = c.radii;
    cfg.m = 10;
    cfg.variants = c.variants;
    const auto fm = extract_batch(corpus, labels, cfg, {}, jobs);
    const double acc = loo_evaluate(fm.rows, fm.labels, kDefaultShrinkage, jobs).accuracy;
    fs::remove_all(out);
    detail += fmt(" %s=%.1f%%(>=%.0f%%)", c.name, acc * 100, c.floor * 100);
    ok = ok && acc >= c.floor;
  }
  if (!any) return {Outcome::Skip, "no dataset directories under MCN_DATA_ROOT"};
  return ok ? pass(detail) : fail(detail);
}

// 9. Single-image extraction time.
Outcome performance() {
  std::mt19937_64 rng(99);
  const auto img = synth::gradient_texture(128, 128, synth::correlated_params(rng), rng);
  ExtractionConfig cfg;
  cfg.radii = {1, 2, 3, 4, 5};
  cfg.m = 10;
  cfg.variants = {NetworkVariant::N, NetworkVariant::W, NetworkVariant::B};
  const auto t0 = Clock::now();
  const auto plan = corpus_plan(std::span(&img, 1), cfg);
  const auto fv = extract(img, cfg, plan);
  const double dt = seconds_since(t0);
  const auto detail = fmt("128x128x3, R={1..5}, m=10, N+W+B (%zu features): %.2f s single-threaded",
                          fv.values.size(), dt);
  return dt < 5.0 ? pass(detail) : fail(detail);
}

}  // namespace

int main(int argc, char** argv) {
  bool datasets = false;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--datasets") {
      datasets = true;
    } else {
      std::fprintf(stderr, "usage: acceptance [--datasets]\n");
      return 2;
    }
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"stencil geometry", stencil_geometry},
      {"feature-length law", feature_length_law},
      {"threshold-rule consistency", threshold_rule_consistency},
      {"W at r=1 clustering zero", w_r1_clustering},
      {"statistics identities", statistics_identities},
      {"LOO-LDA sanity", loo_sanity},
      {"benchmark datasets", [&] { return benchmark_datasets(datasets); }},
      {"performance", performance},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.kind == Outcome::Pass ? "PASS" : o.kind == Outcome::Fail ? "FAIL" : "SKIP";
    failures += o.kind == Outcome::Fail;
    std::printf("criterion %zu %s: %s  [%s]\n", i + 1, tag, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
