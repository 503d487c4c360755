#pragma once

// Seeded synthetic textures: uniform noise, and smooth colour gradients with
// an oriented sinusoid plus Gaussian noise. Used by tests and the `synth`
// command.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "mcn/image.hpp"

namespace mcn::synth {

inline ColorImage uniform_noise(int width, int height, int channels, std::mt19937_64& rng,
                                int max_level = 255) {
  std::uniform_int_distribution<int> dist(0, max_level);
  std::vector<ColorImage::value_type> data(static_cast<std::size_t>(width) * height * channels);
  for (auto& v : data) v = static_cast<ColorImage::value_type>(dist(rng));
  return ColorImage(width, height, channels, std::move(data), max_level);
}

struct TextureParams {
  double base[3] = {128, 128, 128};   ///< per-channel mean level
  double slope[3] = {0, 0, 0};        ///< gradient, levels per pixel along `angle`
  double angle = 0.0;                 ///< gradient / stripe orientation (radians)
  double period = 16.0;               ///< stripe period in pixels
  double amplitude[3] = {0, 0, 0};    ///< stripe amplitude per channel
  double noise = 4.0;                 ///< Gaussian noise sigma in levels
};

inline ColorImage gradient_texture(int width, int height, const TextureParams& p, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<ColorImage::value_type> data(static_cast<std::size_t>(width) * height * 3);
  const double ca = std::cos(p.angle);
  const double sa = std::sin(p.angle);
  const double cx = (width - 1) / 2.0;
  const double cy = (height - 1) / 2.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x - cx) * ca + (y - cy) * sa;
      const double stripe = std::sin(2.0 * std::numbers::pi * u / p.period);
      for (int c = 0; c < 3; ++c) {
        const double v = p.base[c] + p.slope[c] * u + p.amplitude[c] * stripe + p.noise * gauss(rng);
        data[(static_cast<std::size_t>(y) * width + x) * 3 + c] =
            static_cast<ColorImage::value_type>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return ColorImage(width, height, 3, std::move(data), 255);
}

/// Random texture parameters for a class; images of one class share them.
inline TextureParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TextureParams p;
  for (int c = 0; c < 3; ++c) {
    p.base[c] = 60 + 140 * unit(rng);
    p.slope[c] = (unit(rng) - 0.5) * 1.0;
    p.amplitude[c] = 30 * unit(rng);
  }
  p.angle = std::numbers::pi * unit(rng);
  p.period = 4 + 28 * unit(rng);
  p.noise = 2 + 10 * unit(rng);
  return p;
}

/// Photograph-like parameters: channels share a grey level (offsets within
/// +-10), gradient and stripe amplitude. Natural colour images have strongly
/// correlated channels, which `random_params` does not model.
inline TextureParams correlated_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TextureParams p;
  const double grey = 60 + 140 * unit(rng);
  const double slope = (unit(rng) - 0.5) * 0.6;
  const double amplitude = 30 * unit(rng);
  for (int c = 0; c < 3; ++c) {
    p.base[c] = grey + 10 * (2 * unit(rng) - 1);
    p.slope[c] = slope * (0.8 + 0.4 * unit(rng));
    p.amplitude[c] = amplitude * (0.8 + 0.4 * unit(rng));
  }
  p.angle = std::numbers::pi * unit(rng);
  p.period = 4 + 28 * unit(rng);
  p.noise = 2 + 10 * unit(rng);
  return p;
}

/// Correlated-channel flat colour with Gaussian noise only (sigma 4..12).
inline TextureParams correlated_noise_params(std::mt19937_64& rng) {
  auto p = correlated_params(rng);
  for (int c = 0; c < 3; ++c) p.slope[c] = p.amplitude[c] = 0.0;
  p.noise = 4 + 8 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return p;
}

}  // namespace mcn::synth
