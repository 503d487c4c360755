#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcn/error.hpp"

namespace mcn {

/// Interleaved H x W x Z integer intensity grid. Sample (x, y, c) lives at
/// ((y * width) + x) * channels + c, which is also the canonical vertex index
/// of that pixel/channel in the multilayer network.
class ColorImage {
 public:
  using value_type = std::uint16_t;

  ColorImage() = default;

  ColorImage(int width, int height, int channels, int max_level = 255)
      : width_(width), height_(height), channels_(channels), max_level_(max_level) {
    detail::require(width >= 1 && height >= 1, "image dimensions must be >= 1");
    detail::require(channels >= 1, "image must have at least one channel");
    detail::require(max_level >= 1 && max_level <= 65535, "max level must lie in [1, 65535]");
    data_.assign(static_cast<std::size_t>(width) * height * channels, 0);
  }

  ColorImage(int width, int height, int channels, std::vector<value_type> data, int max_level = 255)
      : ColorImage(width, height, channels, max_level) {
    detail::require(data.size() == data_.size(), "intensity buffer size does not match dimensions");
    for (auto v : data) {
      detail::require(v <= max_level_, "intensity " + std::to_string(v) + " exceeds max level " +
                                           std::to_string(max_level_));
    }
    data_ = std::move(data);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  int max_level() const noexcept { return max_level_; }
  bool empty() const noexcept { return data_.empty(); }

  /// Number of network vertices, n = x * y * z.
  std::size_t vertex_count() const noexcept { return data_.size(); }

  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  value_type at(int x, int y, int c) const noexcept { return data_[index(x, y, c)]; }

  void set(int x, int y, int c, value_type v) {
    detail::require(v <= max_level_, "intensity exceeds max level");
    data_[index(x, y, c)] = v;
  }

  std::span<const value_type> data() const noexcept { return data_; }

  bool operator==(const ColorImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  int max_level_ = 255;
  std::vector<value_type> data_;
};

/// Swaps channels according to `order` (output channel c takes input channel order[c]).
inline ColorImage permute_channels(const ColorImage& img, std::span<const int> order) {
  detail::require(static_cast<int>(order.size()) == img.channels(), "permutation size mismatch");
  ColorImage out(img.width(), img.height(), img.channels(), img.max_level());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) out.set(x, y, c, img.at(x, y, order[c]));
  return out;
}

}  // namespace mcn
