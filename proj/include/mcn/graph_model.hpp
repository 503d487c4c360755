#pragma once

// Multilayer pixel network: one vertex per (pixel, channel), edges between
// vertices whose pixels lie within a Euclidean radius r of each other. Only
// x and y enter the distance; the channel is a layer index, not a coordinate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcn/error.hpp"
#include "mcn/image.hpp"

namespace mcn {

enum class NetworkVariant { N, W, B };

inline constexpr std::string_view to_string(NetworkVariant v) noexcept {
  switch (v) {
    case NetworkVariant::N: return "N";
    case NetworkVariant::W: return "W";
    case NetworkVariant::B: return "B";
  }
  return "?";
}

inline NetworkVariant parse_variant(std::string_view s) {
  if (s == "N" || s == "n") return NetworkVariant::N;
  if (s == "W" || s == "w") return NetworkVariant::W;
  if (s == "B" || s == "b") return NetworkVariant::B;
  throw InvalidParameter("unknown network variant '" + std::string(s) + "' (expected N, W or B)");
}

struct StencilOffset {
  int dx = 0;
  int dy = 0;
  int dc = 0;               ///< cyclic channel shift: target channel = (c + dc) mod z
  double distance = 0.0;    ///< sqrt(dx^2 + dy^2)
  double distance_factor = 0.0;  ///< (d + 1) / (r + 1)
};

/// Offsets realising the radius-r window on every layer pair, self excluded.
class NeighborhoodStencil {
 public:
  NeighborhoodStencil() = default;
  NeighborhoodStencil(int radius, int channels, std::vector<StencilOffset> offsets)
      : radius_(radius), channels_(channels), offsets_(std::move(offsets)) {}

  int radius() const noexcept { return radius_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return offsets_.size(); }
  const std::vector<StencilOffset>& offsets() const noexcept { return offsets_; }

 private:
  int radius_ = 0;
  int channels_ = 0;
  std::vector<StencilOffset> offsets_;
};

inline NeighborhoodStencil build_stencil(int radius, int channels) {
  detail::require(radius >= 1, "radius must be >= 1, got " + std::to_string(radius));
  detail::require(channels >= 1, "channel count must be >= 1");
  std::vector<StencilOffset> offsets;
  const int r2 = radius * radius;
  const double rp1 = static_cast<double>(radius) + 1.0;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy > r2) continue;
      const double d = std::sqrt(static_cast<double>(dx * dx + dy * dy));
      for (int dc = 0; dc < channels; ++dc) {
        if (dx == 0 && dy == 0 && dc == 0) continue;
        offsets.push_back({dx, dy, dc, d, (d + 1.0) / rp1});
      }
    }
  }
  return NeighborhoodStencil(radius, channels, std::move(offsets));
}

/// Connection weight between two vertices at pixel distance d:
/// ((|p_i - p_j| + 1) / (L + 1)) * ((d + 1) / (r + 1)), always in (0, 1].
inline double edge_weight(int p_i, int p_j, double d, int radius, int max_level) {
  detail::require(max_level >= 1, "max level must be >= 1");
  detail::require(p_i >= 0 && p_i <= max_level && p_j >= 0 && p_j <= max_level,
                  "intensity outside [0, L]");
  detail::require(radius >= 1, "radius must be >= 1");
  detail::require(d >= 0.0 && d <= static_cast<double>(radius),
                  "distance exceeds radius: no edge exists");
  const double intensity = (std::abs(p_i - p_j) + 1.0) / (max_level + 1.0);
  return intensity * ((d + 1.0) / (radius + 1.0));
}

/// Smallest weight any edge can take for the given radius and max level.
inline double min_edge_weight(int radius, int max_level) noexcept {
  return (1.0 / (max_level + 1.0)) * (1.0 / (radius + 1.0));
}

using VertexId = std::uint32_t;

struct WeightedEdge {
  VertexId a = 0;  ///< smaller canonical index
  VertexId b = 0;
  double weight = 0.0;

  bool operator==(const WeightedEdge&) const = default;
  auto operator<=>(const WeightedEdge&) const = default;
};

inline bool same_channel(VertexId a, VertexId b, int channels) noexcept {
  return a % static_cast<VertexId>(channels) == b % static_cast<VertexId>(channels);
}

/// Visits every undirected edge of N^r exactly once, from its smaller endpoint,
/// in canonical vertex order. `fn(a, b, weight, offset)` with a < b.
template <typename Fn>
void for_each_edge(const ColorImage& img, const NeighborhoodStencil& stencil, Fn&& fn) {
  detail::require(stencil.channels() == img.channels(),
                  "stencil built for a different channel count than the image");
  const int w = img.width();
  const int h = img.height();
  const int z = img.channels();
  const double level_norm = img.max_level() + 1.0;
  const auto px = img.data();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < z; ++c) {
        const auto a = static_cast<VertexId>(img.index(x, y, c));
        const int pa = px[a];
        for (const auto& off : stencil.offsets()) {
          const int nx = x + off.dx;
          const int ny = y + off.dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const int nc = (c + off.dc) % z;
          const auto b = static_cast<VertexId>(img.index(nx, ny, nc));
          if (b <= a) continue;
          const double wt = ((std::abs(pa - static_cast<int>(px[b])) + 1.0) / level_norm) *
                            off.distance_factor;
          fn(a, b, wt, off);
        }
      }
    }
  }
}

/// Materialised edge list of a (possibly thresholded or split) network.
struct Network {
  std::size_t vertex_count = 0;
  int channels = 1;
  std::vector<WeightedEdge> edges;
};

inline Network build_network(const ColorImage& img, const NeighborhoodStencil& stencil) {
  Network net{img.vertex_count(), img.channels(), {}};
  net.edges.reserve(img.vertex_count() * stencil.size() / 2);
  for_each_edge(img, stencil, [&](VertexId a, VertexId b, double wt, const StencilOffset&) {
    net.edges.push_back({a, b, wt});
  });
  return net;
}

/// Keeps exactly the edges with w > t.
inline Network apply_threshold(const Network& net, double t) {
  detail::require(t >= 0.0 && t <= 1.0, "threshold must lie in [0, 1]");
  Network out{net.vertex_count, net.channels, {}};
  for (const auto& e : net.edges)
    if (e.weight > t) out.edges.push_back(e);
  return out;
}

/// Partitions edges into within-channel (W) and between-channel (B) subnets.
inline std::pair<Network, Network> split_within_between(const Network& net) {
  Network within{net.vertex_count, net.channels, {}};
  Network between{net.vertex_count, net.channels, {}};
  for (const auto& e : net.edges) {
    if (same_channel(e.a, e.b, net.channels))
      within.edges.push_back(e);
    else
      between.edges.push_back(e);
  }
  return {std::move(within), std::move(between)};
}

inline Network select_variant(const Network& net, NetworkVariant v) {
  if (v == NetworkVariant::N) return net;
  auto [within, between] = split_within_between(net);
  return v == NetworkVariant::W ? std::move(within) : std::move(between);
}

}  // namespace mcn
