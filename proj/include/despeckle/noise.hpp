#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "despeckle/image.hpp"

namespace despeckle {

// ---------------------------------------------------------------------------
// Counter-based random numbers.
//
// Every noise sample is a pure function of (seed, counter): the counter'th
// output of a SplitMix64 stream started at `seed`. Pixel k consumes counters
// 2k and 2k+1, so rasters can be generated row-parallel and are identical on
// every platform with an IEEE-754 libm.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t random_bits(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64_mix(seed + (counter + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Uniform double in the open interval (0, 1).
inline double random_uniform(std::uint64_t seed, std::uint64_t counter) {
  return (static_cast<double>(random_bits(seed, counter) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal deviate for sample index k (Box-Muller, cosine branch).
inline double random_normal(std::uint64_t seed, std::uint64_t k) {
  const double u1 = random_uniform(seed, 2 * k);
  const double u2 = random_uniform(seed, 2 * k + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Rayleigh(scale = 1) deviate for sample index k.
inline double random_rayleigh(std::uint64_t seed, std::uint64_t k) {
  return std::sqrt(-2.0 * std::log(random_uniform(seed, 2 * k)));
}

enum class SpeckleModel { kMultiplicativeGaussian, kRayleigh };

struct SpeckleParams {
  SpeckleModel model = SpeckleModel::kMultiplicativeGaussian;
  /// Std of the multiplicative term (Gaussian model) or Rayleigh scale.
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct NoiseEstimate {
  double sigma_n = 0.0;
};

std::string to_string(SpeckleModel model);

namespace detail {

template <typename Scalar, typename Fn>
Image<Scalar> map_indexed(const Image<Scalar>& img, Fn&& fn) {
  Image<Scalar> out(img.rows(), img.cols());
  const Index w = img.cols();
  parallel_rows(img.rows(), [&](Index begin, Index end) {
    for (Index y = begin; y < end; ++y)
      for (Index x = 0; x < w; ++x) {
        const auto k = static_cast<std::uint64_t>(y * w + x);
        out(y, x) = fn(img(y, x), k);
      }
  });
  return out;
}

}  // namespace detail

/// Multiplicative speckle. Gaussian model: v = u (1 + sigma xi).
/// Rayleigh model: v = u r / E[r], r ~ Rayleigh(sigma), i.e. unit-mean
/// multiplicative noise. sigma == 0 returns the input unchanged.
template <typename Scalar>
Image<Scalar> add_multiplicative_speckle(const Image<Scalar>& img, const SpeckleParams& params) {
  if (!(params.sigma >= 0) || !std::isfinite(params.sigma))
    throw ParameterError("add_multiplicative_speckle: sigma must be >= 0");
  if ((img < Scalar(0)).any())
    throw DomainError("add_multiplicative_speckle: negative pixel under multiplicative model");
  if (params.sigma == 0) return img;

  const std::uint64_t seed = params.seed;
  const double sigma = params.sigma;
  if (params.model == SpeckleModel::kMultiplicativeGaussian) {
    return detail::map_indexed(img, [seed, sigma](Scalar u, std::uint64_t k) {
      return static_cast<Scalar>(u * (1.0 + sigma * random_normal(seed, k)));
    });
  }
  // r / E[r] with r = sigma * rayleigh(1): the scale cancels.
  const double inv_mean = 1.0 / std::sqrt(std::numbers::pi / 2.0);
  return detail::map_indexed(img, [seed, inv_mean](Scalar u, std::uint64_t k) {
    return static_cast<Scalar>(u * random_rayleigh(seed, k) * inv_mean);
  });
}

template <typename Scalar>
Image<Scalar> add_gaussian_noise(const Image<Scalar>& img, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0) || !std::isfinite(sigma))
    throw ParameterError("add_gaussian_noise: sigma must be >= 0");
  if (sigma == 0) return img;
  return detail::map_indexed(img, [seed, sigma](Scalar u, std::uint64_t k) {
    return static_cast<Scalar>(u + sigma * random_normal(seed, k));
  });
}

inline constexpr double kDefaultLogEpsilon = 1.0;

/// out = ln(img + epsilon).
template <typename Scalar>
Image<Scalar> log_compress(const Image<Scalar>& img, Scalar epsilon = Scalar(kDefaultLogEpsilon)) {
  if (!(epsilon > 0)) throw ParameterError("log_compress: epsilon must be positive");
  if ((img < Scalar(0)).any()) throw DomainError("log_compress: negative pixel");
  return (img + epsilon).log();
}

/// out = exp(img) - epsilon. Throws NumericError on overflow.
template <typename Scalar>
Image<Scalar> exp_expand(const Image<Scalar>& img, Scalar epsilon = Scalar(kDefaultLogEpsilon)) {
  if (!(epsilon > 0)) throw ParameterError("exp_expand: epsilon must be positive");
  Image<Scalar> out = img.exp() - epsilon;
  for (Index k = 0; k < out.size(); ++k)
    if (!std::isfinite(static_cast<double>(out.data()[k])))
      throw NumericError("exp_expand: non-finite result at pixel index " + std::to_string(k) +
                         " (row " + std::to_string(k / out.cols()) + ", col " +
                         std::to_string(k % out.cols()) + ")");
  return out;
}

/// Robust noise std from the median absolute response of the 3x3
/// second-difference mask [[1,-2,1],[-2,4,-2],[1,-2,1]] over interior pixels.
/// The mask has unit-variance gain 6, and median|N(0,1)| = 0.6745.
template <typename Scalar>
NoiseEstimate estimate_noise_sigma(const Image<Scalar>& img) {
  if (img.rows() < 3 || img.cols() < 3)
    throw ParameterError("estimate_noise_sigma: image must be at least 3x3");
  std::vector<double> residual;
  residual.reserve(static_cast<std::size_t>((img.rows() - 2) * (img.cols() - 2)));
  for (Index y = 1; y + 1 < img.rows(); ++y)
    for (Index x = 1; x + 1 < img.cols(); ++x) {
      const double r = double(img(y - 1, x - 1)) - 2.0 * img(y - 1, x) + double(img(y - 1, x + 1)) -
                       2.0 * img(y, x - 1) + 4.0 * img(y, x) - 2.0 * img(y, x + 1) +
                       double(img(y + 1, x - 1)) - 2.0 * img(y + 1, x) + double(img(y + 1, x + 1));
      residual.push_back(std::abs(r));
    }
  const std::size_t n = residual.size();
  const auto mid = residual.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(residual.begin(), mid, residual.end());
  double median = *mid;
  if (n % 2 == 0) median = 0.5 * (median + *std::max_element(residual.begin(), mid));
  return NoiseEstimate{median / (0.6745 * 6.0)};
}

/// Piecewise-constant test phantom: background, nested rectangles and
/// disks of different contrast, a bar pattern, and small point targets.
/// Geometry scales with the image size; intensities lie in [40, 220].
GrayImage make_phantom(Index height, Index width);

}  // namespace despeckle
