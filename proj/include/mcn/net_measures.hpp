#pragma once

// Degree and clustering coefficient of the thresholded networks, plus the four
// summary statistics (mean, standard deviation, energy, entropy).
//
// Two computation routes exist:
//  * reference: materialise a Network, build adjacency lists, count triangles;
//  * sweep: one streaming pass per radius that buckets every edge and every
//    triangle by the number of thresholds it survives, then recovers all m
//    networks N/W/B^{r,t_j} by suffix sums. Both produce identical fields.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "mcn/error.hpp"
#include "mcn/graph_model.hpp"
#include "mcn/image.hpp"

namespace mcn {

/// Clustering coefficient from degree k and the number of edges among the
/// vertex's neighbours. Vertices with k < 2 are assigned 0.
inline double clustering_coefficient(std::uint32_t degree, std::uint32_t neighbor_edges) noexcept {
  if (degree < 2) return 0.0;
  const double k = degree;
  return 2.0 * neighbor_edges / (k * (k - 1.0));
}

struct MeasureField {
  NetworkVariant variant = NetworkVariant::N;
  int radius = 0;
  double threshold = 0.0;
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint32_t> degrees;
  std::vector<double> clusterings;
};

enum class Measure { Degree, Clustering };

// ---------------------------------------------------------------------------
// Reference route

inline std::vector<std::uint32_t> degree_field(const Network& net) {
  std::vector<std::uint32_t> deg(net.vertex_count, 0);
  for (const auto& e : net.edges) {
    ++deg[e.a];
    ++deg[e.b];
  }
  return deg;
}

inline std::vector<std::vector<VertexId>> adjacency_lists(const Network& net) {
  std::vector<std::vector<VertexId>> adj(net.vertex_count);
  for (const auto& e : net.edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

/// Number of edges among the neighbours of each vertex (= triangles through it).
inline std::vector<std::uint32_t> neighbor_edge_counts(const Network& net) {
  const auto adj = adjacency_lists(net);
  std::vector<std::uint32_t> tri(net.vertex_count, 0);
  for (const auto& e : net.edges) {
    const auto& na = adj[e.a];
    const auto& nb = adj[e.b];
    std::size_t i = 0, j = 0;
    while (i < na.size() && j < nb.size()) {
      if (na[i] < nb[j]) {
        ++i;
      } else if (nb[j] < na[i]) {
        ++j;
      } else {
        // Each triangle {a, b, w} is seen once per edge; credit only the
        // vertex opposite the edge so every vertex gets one hit per triangle.
        ++tri[na[i]];
        ++i;
        ++j;
      }
    }
  }
  return tri;
}

inline std::vector<double> clustering_field(const Network& net) {
  const auto deg = degree_field(net);
  const auto tri = neighbor_edge_counts(net);
  std::vector<double> c(net.vertex_count);
  for (std::size_t v = 0; v < c.size(); ++v) c[v] = clustering_coefficient(deg[v], tri[v]);
  return c;
}

// ---------------------------------------------------------------------------
// Sweep route

/// Degree and neighbour-edge counts of N, W and B for every threshold of an
/// ascending list, at one radius.
class ThresholdSweep {
 public:
  static constexpr std::size_t kVariants = 3;

  ThresholdSweep(const ColorImage& img, const NeighborhoodStencil& stencil,
                 std::span<const double> thresholds)
      : width_(img.width()),
        height_(img.height()),
        channels_(img.channels()),
        radius_(stencil.radius()),
        thresholds_(thresholds.begin(), thresholds.end()),
        n_(img.vertex_count()) {
    detail::require(!thresholds_.empty(), "threshold sweep needs at least one threshold");
    detail::require(std::is_sorted(thresholds_.begin(), thresholds_.end()),
                    "thresholds must be ascending");
    detail::require(stencil.channels() == img.channels(), "stencil/image channel mismatch");
    run(img, stencil);
  }

  std::size_t threshold_count() const noexcept { return thresholds_.size(); }
  double threshold(std::size_t j) const { return thresholds_.at(j); }
  std::size_t vertex_count() const noexcept { return n_; }

  std::span<const std::uint32_t> degrees(NetworkVariant v, std::size_t j) const {
    return slice(degree_[index(v)], j);
  }
  std::span<const std::uint32_t> neighbor_edges(NetworkVariant v, std::size_t j) const {
    return slice(triangle_[index(v)], j);
  }

  std::vector<double> clusterings(NetworkVariant v, std::size_t j) const {
    const auto k = degrees(v, j);
    const auto t = neighbor_edges(v, j);
    std::vector<double> c(n_);
    for (std::size_t i = 0; i < n_; ++i) c[i] = clustering_coefficient(k[i], t[i]);
    return c;
  }

  MeasureField field(NetworkVariant v, std::size_t j) const {
    const auto k = degrees(v, j);
    return MeasureField{v,        radius_, thresholds_.at(j),
                        width_,   height_, channels_,
                        std::vector<std::uint32_t>(k.begin(), k.end()), clusterings(v, j)};
  }

 private:
  static std::size_t index(NetworkVariant v) noexcept { return static_cast<std::size_t>(v); }

  std::span<const std::uint32_t> slice(const std::vector<std::uint32_t>& buf, std::size_t j) const {
    detail::require(j < thresholds_.size(), "threshold index out of range");
    return std::span<const std::uint32_t>(buf).subspan(j * n_, n_);
  }

  /// Number of thresholds strictly below w, i.e. how many cuts the edge survives.
  std::size_t survivals(double w) const noexcept {
    return static_cast<std::size_t>(
        std::lower_bound(thresholds_.begin(), thresholds_.end(), w) - thresholds_.begin());
  }

  void run(const ColorImage& img, const NeighborhoodStencil& stencil) {
    const int r = radius_;
    const int levels = img.max_level() + 1;
    const double level_norm = levels;
    const std::size_t m = thresholds_.size();
    const std::size_t rows = m + 1;
    // Edges and triangles are bucketed by survival row s = |{j : t_j < w}|:
    // they exist in the networks of thresholds 0 .. s-1.
    if (m > 254) throw InvalidParameter("at most 254 thresholds per sweep");

    // Survival row of any edge, by squared pixel distance and |intensity
    // difference|; weights evaluated exactly as the stencil (and edge_weight) do.
    const int max_d2 = r * r;
    std::vector<std::uint8_t> row_of(static_cast<std::size_t>(max_d2 + 1) * levels, 0);
    for (const auto& off : stencil.offsets()) {
      const int d2 = off.dx * off.dx + off.dy * off.dy;
      for (int diff = 0; diff < levels; ++diff)
        row_of[static_cast<std::size_t>(d2) * levels + diff] =
            static_cast<std::uint8_t>(survivals(((diff + 1.0) / level_norm) * off.distance_factor));
    }

    // Spatial offsets of the window and the squared distance between any two
    // of them (-1 when farther apart than r).
    std::vector<std::pair<int, int>> spatial;
    std::vector<int> spatial_of(stencil.size());
    for (std::size_t o = 0; o < stencil.size(); ++o) {
      const auto& off = stencil.offsets()[o];
      const std::pair<int, int> key{off.dx, off.dy};
      auto it = std::find(spatial.begin(), spatial.end(), key);
      if (it == spatial.end()) it = spatial.insert(spatial.end(), key);
      spatial_of[o] = static_cast<int>(it - spatial.begin());
    }
    const std::size_t ns = spatial.size();
    std::vector<std::int16_t> pair_d2(ns * ns, -1);
    for (std::size_t i = 0; i < ns; ++i)
      for (std::size_t j = 0; j < ns; ++j) {
        const int dx = spatial[i].first - spatial[j].first;
        const int dy = spatial[i].second - spatial[j].second;
        if (dx * dx + dy * dy <= max_d2) pair_d2[i * ns + j] = static_cast<std::int16_t>(dx * dx + dy * dy);
      }

    // Vertex-major accumulators, all variants of a vertex adjacent:
    // acc[(vertex * kSlots + variant) * rows + s]. Slot 3 absorbs triangles
    // that belong to neither W nor B.
    constexpr std::size_t kSlots = 4;
    const std::size_t stride = kSlots * rows;
    std::vector<std::uint32_t> deg_acc(n_ * stride, 0);
    std::vector<std::uint32_t> tri_acc(n_ * stride, 0);
    constexpr std::size_t kN = 0;
    const std::size_t kW = index(NetworkVariant::W);
    const std::size_t kB = index(NetworkVariant::B);
    // Triangle class from (u same layer as a, v same layer as a, u same layer as v).
    std::array<std::size_t, 8> tri_class{};
    for (std::size_t bits = 0; bits < 8; ++bits)
      tri_class[bits] = bits == 7 ? kW : bits == 0 ? kB : 3;

    struct Forward {
      VertexId id;
      std::int32_t spatial;
      std::int32_t p;
      std::int32_t c;
      std::uint32_t row;
    };
    std::vector<Forward> fwd;
    fwd.reserve(stencil.size());
    std::vector<std::size_t> slots;
    slots.reserve(stencil.size() + 1);
    std::vector<std::uint32_t> local;

    const int w = img.width();
    const int h = img.height();
    const int z = img.channels();
    const auto px = img.data();
    const auto& offsets = stencil.offsets();

    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < z; ++c) {
          const auto a = static_cast<VertexId>(img.index(x, y, c));
          const int pa = px[a];
          fwd.clear();
          for (std::size_t o = 0; o < offsets.size(); ++o) {
            const auto& off = offsets[o];
            const int nx = x + off.dx;
            const int ny = y + off.dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const int nc = (c + off.dc) % z;
            const auto b = static_cast<VertexId>(img.index(nx, ny, nc));
            if (b <= a) continue;
            const int pb = px[b];
            const int d2 = off.dx * off.dx + off.dy * off.dy;
            const std::uint32_t row = row_of[static_cast<std::size_t>(d2) * levels + std::abs(pa - pb)];
            if (row == 0) continue;
            const std::size_t sub = nc == c ? kW : kB;
            ++deg_acc[a * stride + kN * rows + row];
            ++deg_acc[b * stride + kN * rows + row];
            ++deg_acc[a * stride + sub * rows + row];
            ++deg_acc[b * stride + sub * rows + row];
            fwd.push_back({b, spatial_of[o], pb, nc, row});
          }

          // Triangles {a, u, v} with a < u, v: found exactly once, here. Forward
          // neighbours sharing a pixel are contiguous (offsets are ordered by
          // position), so the distance test runs once per pixel pair.
          slots.clear();
          for (std::size_t i = 0; i < fwd.size(); ++i)
            if (i == 0 || fwd[i].spatial != fwd[i - 1].spatial) slots.push_back(i);
          slots.push_back(fwd.size());
          // Counts go to a small per-vertex scratch block (slot 1 + i: fwd[i])
          // and are flushed once a is done. Every triangle touches two forward
          // slots, so a's own count (slot 0) is half their sum.
          local.assign((fwd.size() + 1) * stride, 0);
          auto count = [&](std::size_t i, std::size_t j, std::uint32_t row) {
            const auto& u = fwd[i];
            const auto& v = fwd[j];
            // Row 0 (the triangle survives no threshold) is accumulated too
            // and dropped by the suffix sums, which keeps this loop branch-free.
            row = std::min(row, std::min(u.row, v.row));
            const std::size_t sub =
                tri_class[static_cast<std::size_t>(u.c == c) | static_cast<std::size_t>(v.c == c) << 1 |
                          static_cast<std::size_t>(u.c == v.c) << 2] * rows + row;
            std::uint32_t* lu = local.data() + (i + 1) * stride;
            std::uint32_t* lv = local.data() + (j + 1) * stride;
            ++lu[row];
            ++lv[row];
            ++lu[sub];
            ++lv[sub];
          };
          const std::size_t nslots = slots.size() - 1;
          for (std::size_t si = 0; si < nslots; ++si) {
            const std::size_t i0 = slots[si], i1 = slots[si + 1];
            const std::uint8_t* same_px = row_of.data();
            for (std::size_t i = i0; i < i1; ++i)
              for (std::size_t j = i + 1; j < i1; ++j)
                count(i, j, same_px[std::abs(fwd[i].p - fwd[j].p)]);
            const std::int16_t* d2_row = pair_d2.data() + static_cast<std::size_t>(fwd[i0].spatial) * ns;
            for (std::size_t sj = si + 1; sj < nslots; ++sj) {
              const std::size_t j0 = slots[sj], j1 = slots[sj + 1];
              const int d2 = d2_row[fwd[j0].spatial];
              if (d2 < 0) continue;
              const std::uint8_t* rows_at = row_of.data() + static_cast<std::size_t>(d2) * levels;
              for (std::size_t i = i0; i < i1; ++i)
                for (std::size_t j = j0; j < j1; ++j)
                  count(i, j, rows_at[std::abs(fwd[i].p - fwd[j].p)]);
            }
          }
          for (std::size_t i = 1; i <= fwd.size(); ++i) {
            const std::uint32_t* src = local.data() + i * stride;
            for (std::size_t k = 0; k < stride; ++k) local[k] += src[k];
          }
          for (std::size_t k = 0; k < stride; ++k) local[k] /= 2;
          for (std::size_t i = 0; i <= fwd.size(); ++i) {
            const VertexId id = i == 0 ? a : fwd[i - 1].id;
            std::uint32_t* dst = tri_acc.data() + id * stride;
            const std::uint32_t* src = local.data() + i * stride;
            for (std::size_t k = 0; k < stride; ++k) dst[k] += src[k];
          }
        }
      }
    }

    // Suffix sums over survival rows, then transpose to threshold-major:
    // count at threshold j = sum of rows s > j.
    for (std::size_t v = 0; v < kVariants; ++v) {
      degree_[v].assign(m * n_, 0);
      triangle_[v].assign(m * n_, 0);
      for (std::size_t vert = 0; vert < n_; ++vert) {
        const auto* dk = deg_acc.data() + vert * stride + v * rows;
        const auto* dt = tri_acc.data() + vert * stride + v * rows;
        std::uint32_t sk = 0, st = 0;
        for (std::size_t s = m; s >= 1; --s) {
          sk += dk[s];
          st += dt[s];
          degree_[v][(s - 1) * n_ + vert] = sk;
          triangle_[v][(s - 1) * n_ + vert] = st;
        }
      }
    }
  }

  int width_, height_, channels_, radius_;
  std::vector<double> thresholds_;
  std::size_t n_;
  std::array<std::vector<std::uint32_t>, kVariants> degree_;
  std::array<std::vector<std::uint32_t>, kVariants> triangle_;
};

// ---------------------------------------------------------------------------
// Statistics

enum class SigmaMode {
  Normalized,  ///< population standard deviation, sqrt(sum (x - mu)^2 / |V|)
  Verbatim,    ///< sqrt(sum (x - mu)^2), no 1/|V| factor
};

inline SigmaMode parse_sigma_mode(std::string_view s) {
  if (s == "normalized") return SigmaMode::Normalized;
  if (s == "verbatim") return SigmaMode::Verbatim;
  throw InvalidParameter("unknown sigma mode '" + std::string(s) +
                         "' (expected normalized or verbatim)");
}

struct StatBlock {
  double mean = 0.0;
  double stddev = 0.0;
  double energy = 0.0;
  double entropy = 0.0;
};

inline constexpr int kClusteringBins = 256;

namespace detail {

template <typename T>
std::pair<double, double> mean_and_sigma(std::span<const T> values, SigmaMode mode) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return {static_cast<double>(*lo), 0.0};
  double sum = 0.0;
  for (auto v : values) sum += static_cast<double>(v);
  const double n = static_cast<double>(values.size());
  const double mu = sum / n;
  double ss = 0.0;
  for (auto v : values) {
    const double d = static_cast<double>(v) - mu;
    ss += d * d;
  }
  return {mu, std::sqrt(mode == SigmaMode::Normalized ? ss / n : ss)};
}

inline void energy_entropy(std::span<const std::uint64_t> counts, double n, StatBlock& out) {
  double e = 0.0;
  double h = 0.0;
  for (auto cnt : counts) {
    if (cnt == 0) continue;
    const double p = static_cast<double>(cnt) / n;
    e += p * p;
    h -= p * std::log(p);
  }
  out.energy = e;
  out.entropy = h;
}

}  // namespace detail

/// Degree distribution statistics; P(k) has one bin per integer degree.
inline StatBlock degree_stats(std::span<const std::uint32_t> degrees,
                              SigmaMode mode = SigmaMode::Normalized) {
  detail::require(!degrees.empty(), "statistics of an empty distribution are undefined");
  StatBlock s;
  std::tie(s.mean, s.stddev) = detail::mean_and_sigma(degrees, mode);
  const auto kmax = *std::max_element(degrees.begin(), degrees.end());
  std::vector<std::uint64_t> hist(static_cast<std::size_t>(kmax) + 1, 0);
  for (auto k : degrees) ++hist[k];
  detail::energy_entropy(hist, static_cast<double>(degrees.size()), s);
  return s;
}

inline int clustering_bin(double c) noexcept {
  return std::clamp(static_cast<int>(std::floor(c * kClusteringBins)), 0, kClusteringBins - 1);
}

/// Clustering distribution statistics; P(c) uses 256 uniform bins over [0, 1].
inline StatBlock clustering_stats(std::span<const double> clusterings,
                                  SigmaMode mode = SigmaMode::Normalized) {
  detail::require(!clusterings.empty(), "statistics of an empty distribution are undefined");
  StatBlock s;
  std::tie(s.mean, s.stddev) = detail::mean_and_sigma(clusterings, mode);
  std::array<std::uint64_t, kClusteringBins> hist{};
  for (auto c : clusterings) ++hist[static_cast<std::size_t>(clustering_bin(c))];
  detail::energy_entropy(hist, static_cast<double>(clusterings.size()), s);
  return s;
}

// ---------------------------------------------------------------------------
// Visualisation and export

/// Maps the three per-layer values of every pixel to an RGB triple, linearly
/// normalised by the global min/max of the whole field. A constant field maps
/// to all zeros.
inline ColorImage render_measure_map(const MeasureField& field, Measure measure) {
  if (field.channels != 3)
    throw Unsupported("measure maps need exactly 3 layers, field has " +
                      std::to_string(field.channels));
  const std::size_t n = static_cast<std::size_t>(field.width) * field.height * 3;
  detail::require(field.degrees.size() == n && field.clusterings.size() == n,
                  "measure field does not cover every vertex");
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i)
    values[i] = measure == Measure::Degree ? static_cast<double>(field.degrees[i]) : field.clusterings[i];
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double vmin = *lo;
  const double range = *hi - vmin;
  std::vector<ColorImage::value_type> out(n, 0);
  if (range > 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = static_cast<ColorImage::value_type>(std::lround((values[i] - vmin) / range * 255.0));
  }
  return ColorImage(field.width, field.height, 3, std::move(out), 255);
}

inline void write_field_csv(std::ostream& os, const MeasureField& field) {
  os << "vertex_index,degree,clustering\n" << std::setprecision(17);
  for (std::size_t i = 0; i < field.degrees.size(); ++i)
    os << i << ',' << field.degrees[i] << ',' << field.clusterings[i] << '\n';
}

}  // namespace mcn
