#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "despeckle/errors.hpp"
#include "despeckle/parallel.hpp"

namespace despeckle {

using Index = Eigen::Index;

/// Dense single-channel image, row-major so that data() is the raster order.
/// Rows are image lines (height), columns are samples within a line (width).
/// Intensities are unclamped; the nominal range is [0, 255].
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using GrayImage = Image<double>;

/// Maps any integer coordinate onto [0, n) by half-sample symmetric
/// reflection: -1 -> 0, -2 -> 1, n -> n-1. Periodic with period 2n, so it is
/// valid for arbitrarily large offsets.
inline Index mirror_index(Index i, Index n) {
  if (n == 1) return 0;
  const Index period = 2 * n;
  Index m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

template <typename Derived>
typename Derived::Scalar sample_mirrored(const Eigen::DenseBase<Derived>& img,
                                         Index row, Index col) {
  return img(mirror_index(row, img.rows()), mirror_index(col, img.cols()));
}

/// Mirrored coordinates for positions [-pad, n + pad).
/// Entry k corresponds to coordinate k - pad.
inline std::vector<Index> mirror_table(Index n, Index pad) {
  std::vector<Index> table(static_cast<std::size_t>(n + 2 * pad));
  for (Index k = 0; k < n + 2 * pad; ++k)
    table[static_cast<std::size_t>(k)] = mirror_index(k - pad, n);
  return table;
}

/// Copy of img extended by pad pixels on every side with mirror reflection.
template <typename Scalar>
Image<Scalar> mirror_pad(const Image<Scalar>& img, Index pad) {
  const auto rows = mirror_table(img.rows(), pad);
  const auto cols = mirror_table(img.cols(), pad);
  Image<Scalar> out(img.rows() + 2 * pad, img.cols() + 2 * pad);
  for (Index y = 0; y < out.rows(); ++y)
    for (Index x = 0; x < out.cols(); ++x)
      out(y, x) = img(rows[static_cast<std::size_t>(y)],
                      cols[static_cast<std::size_t>(x)]);
  return out;
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& img) {
  return img.derived().array().isFinite().all();
}

inline void require_nonempty(Index rows, Index cols, const char* what) {
  if (rows < 1 || cols < 1)
    throw ParameterError(std::string(what) + ": image must be at least 1x1");
}

/// Sampled Gaussian exp(-k^2 / (2 sigma^2)) for k in [-radius, radius],
/// radius = ceil(3 sigma), normalized to unit sum.
template <typename Scalar>
std::vector<Scalar> gaussian_kernel_1d(Scalar sigma) {
  if (!(sigma > 0) || !std::isfinite(static_cast<double>(sigma)))
    throw ParameterError("gaussian kernel: sigma must be positive and finite");
  const Index radius = static_cast<Index>(std::ceil(3.0 * static_cast<double>(sigma)));
  std::vector<Scalar> k(static_cast<std::size_t>(2 * radius + 1));
  Scalar sum = 0;
  for (Index t = -radius; t <= radius; ++t) {
    const Scalar w = std::exp(-Scalar(t * t) / (Scalar(2) * sigma * sigma));
    k[static_cast<std::size_t>(t + radius)] = w;
    sum += w;
  }
  for (auto& w : k) w /= sum;
  return k;
}

/// Separable Gaussian convolution with mirror boundary. Output pixels are
/// accumulated in kernel index order, independent of the thread count.
template <typename Scalar>
Image<Scalar> gaussian_blur(const Image<Scalar>& img, Scalar sigma) {
  require_nonempty(img.rows(), img.cols(), "gaussian_blur");
  const std::vector<Scalar> kernel = gaussian_kernel_1d(sigma);
  const Index radius = static_cast<Index>(kernel.size() / 2);
  const Index h = img.rows();
  const Index w = img.cols();
  const auto col_map = mirror_table(w, radius);
  const auto row_map = mirror_table(h, radius);

  Image<Scalar> tmp(h, w);
  parallel_rows(h, [&](Index begin, Index end) {
    for (Index y = begin; y < end; ++y)
      for (Index x = 0; x < w; ++x) {
        Scalar acc = 0;
        for (Index t = 0; t <= 2 * radius; ++t)
          acc += kernel[static_cast<std::size_t>(t)] *
                 img(y, col_map[static_cast<std::size_t>(x + t)]);
        tmp(y, x) = acc;
      }
  });

  Image<Scalar> out(h, w);
  parallel_rows(h, [&](Index begin, Index end) {
    for (Index y = begin; y < end; ++y)
      for (Index x = 0; x < w; ++x) {
        Scalar acc = 0;
        for (Index t = 0; t <= 2 * radius; ++t)
          acc += kernel[static_cast<std::size_t>(t)] *
                 tmp(row_map[static_cast<std::size_t>(y + t)], x);
        out(y, x) = acc;
      }
  });
  return out;
}

/// Rounds half away from zero and clamps to [0, maxval], the exact
/// transformation applied when an image is stored as PGM.
template <typename Derived>
Image<typename Derived::Scalar> quantize(const Eigen::DenseBase<Derived>& img,
                                         double maxval) {
  using Scalar = typename Derived::Scalar;
  return img.derived().array().unaryExpr([maxval](Scalar v) {
    return static_cast<Scalar>(
        std::clamp(std::round(static_cast<double>(v)), 0.0, maxval));
  });
}

}  // namespace despeckle
