#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "despeckle/image.hpp"
#include "despeckle/noise.hpp"

namespace despeckle {

struct PixelCoord {
  Index row = 0;
  Index col = 0;

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// Normalized Gaussian weighting over a (2r+1) x (2r+1) patch.
template <typename Scalar>
struct PatchKernel {
  int radius = 0;
  Scalar sigma_s = 1;
  /// weights(dy + r, dx + r); sums to 1.
  Image<Scalar> weights;

  Scalar operator()(int dy, int dx) const { return weights(dy + radius, dx + radius); }
  int size() const { return 2 * radius + 1; }
};

template <typename Scalar>
PatchKernel<Scalar> make_patch_kernel(int radius, Scalar sigma_s) {
  if (radius < 0) throw ParameterError("make_patch_kernel: radius must be >= 0");
  if (!(sigma_s > 0) || !std::isfinite(static_cast<double>(sigma_s)))
    throw ParameterError("make_patch_kernel: sigma_s must be positive and finite");
  PatchKernel<Scalar> k;
  k.radius = radius;
  k.sigma_s = sigma_s;
  k.weights.resize(2 * radius + 1, 2 * radius + 1);
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      k.weights(dy + radius, dx + radius) =
          std::exp(-Scalar(dx * dx + dy * dy) / (Scalar(2) * sigma_s * sigma_s));
  k.weights /= k.weights.sum();
  return k;
}

/// Kernel-weighted squared distance between the patches centered at a and b,
/// read with mirror boundary.
template <typename Scalar>
Scalar patch_distance(const Image<Scalar>& img, PixelCoord a, PixelCoord b,
                      const PatchKernel<Scalar>& kernel) {
  const int r = kernel.radius;
  Scalar d = 0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const Scalar diff = sample_mirrored(img, a.row + dy, a.col + dx) -
                          sample_mirrored(img, b.row + dy, b.col + dx);
      d += kernel(dy, dx) * diff * diff;
    }
  return d;
}

/// How the j = i term of the window is weighted.
enum class SelfWeight {
  /// exp(0) times the corruption factor of i, as for every other member.
  kNatural,
  /// The largest weight among the other window members.
  kMaxNeighbor,
};

struct NlmParams {
  /// Search window is (2R+1) x (2R+1).
  int search_radius = 10;
  /// Patch is (2r+1) x (2r+1).
  int patch_radius = 3;
  /// Distance decay; weights are exp(-d / h^2).
  double h = 1.0;
  /// Patch kernel std; patch_radius / 2 when unset.
  std::optional<double> patch_sigma;
  SelfWeight self_weight = SelfWeight::kNatural;

  double effective_patch_sigma() const {
    return patch_sigma ? *patch_sigma : 0.5 * static_cast<double>(patch_radius);
  }
};

/// Values of h2 at or above this make the corruption factor exactly 1.
inline constexpr double kH2Cap = 1e12;

struct RobustNlmParams {
  /// base.h is the distance decay h1.
  NlmParams base;
  /// Corruption decay; the factor is exp(-|v(j) - v_hat(j)| / h2).
  double h2 = kH2Cap;
  /// Std of the Gaussian prefilter that produces v_hat.
  double prefilter_sigma = 1.5;
};

/// Default settings for noise level sigma_n: 21x21 search window, 7x7 patch,
/// h1 = 9 sigma_n, h2 = 148 / sigma_n (capped at kH2Cap). h1 is floored at
/// kMinH so that noiseless inputs remain valid.
inline constexpr double kMinH = 1e-6;

inline RobustNlmParams robust_nlm_defaults(double sigma_n) {
  RobustNlmParams p;
  p.base.search_radius = 10;
  p.base.patch_radius = 3;
  p.base.h = std::max(9.0 * sigma_n, kMinH);
  p.h2 = sigma_n > 0 ? std::min(148.0 / sigma_n, kH2Cap) : kH2Cap;
  p.prefilter_sigma = 1.5;
  return p;
}

inline NlmParams nlm_defaults(double sigma_n) { return robust_nlm_defaults(sigma_n).base; }

/// The weights one output pixel was computed with.
struct WeightField {
  struct Entry {
    int dy = 0;  ///< offset within the search window
    int dx = 0;
    PixelCoord source;  ///< mirrored image coordinate the offset reads
    double weight = 0;  ///< normalized weight
  };

  PixelCoord center;
  /// Window offsets in row-major order.
  std::vector<Entry> entries;
  /// Sum of the unnormalized weights.
  double normalizer = 0;
};

inline void validate(const NlmParams& p) {
  if (p.search_radius < 1) throw ParameterError("nlm: search_radius must be >= 1");
  if (p.patch_radius < 1) throw ParameterError("nlm: patch_radius must be >= 1");
  if (!(p.h > 0) || !std::isfinite(p.h)) throw ParameterError("nlm: h must be positive and finite");
  const double s = p.effective_patch_sigma();
  if (!(s > 0) || !std::isfinite(s)) throw ParameterError("nlm: patch_sigma must be positive");
}

inline void validate(const RobustNlmParams& p) {
  validate(p.base);
  if (!(p.h2 > 0) || std::isnan(p.h2)) throw ParameterError("robust nlm: h2 must be positive");
  if (!(p.prefilter_sigma > 0) || !std::isfinite(p.prefilter_sigma))
    throw ParameterError("robust nlm: prefilter_sigma must be positive");
}

namespace detail {

/// Shared evaluation of windowed NL-means weights. The input is padded by
/// the patch radius; window members are mirrored to in-bounds pixels and
/// their patches are read around those pixels.
template <typename Scalar>
class NlmEngine {
 public:
  NlmEngine(const Image<Scalar>& img, const NlmParams& params,
            std::optional<Image<Scalar>> corruption)
      : img_(img),
        params_(params),
        kernel_(make_patch_kernel<Scalar>(params.patch_radius,
                                          static_cast<Scalar>(params.effective_patch_sigma()))),
        padded_(mirror_pad(img, params.patch_radius)),
        row_map_(mirror_table(img.rows(), params.search_radius)),
        col_map_(mirror_table(img.cols(), params.search_radius)),
        corruption_(std::move(corruption)),
        inv_h2_(Scalar(1) / (static_cast<Scalar>(params.h) * static_cast<Scalar>(params.h))) {}

  std::size_t window_size() const {
    const auto n = static_cast<std::size_t>(2 * params_.search_radius + 1);
    return n * n;
  }

  PixelCoord source(Index y, Index x, int dy, int dx) const {
    const int R = params_.search_radius;
    return {row_map_[static_cast<std::size_t>(y + dy + R)],
            col_map_[static_cast<std::size_t>(x + dx + R)]};
  }

  /// Fills `w` with the unnormalized window weights (row-major) and returns
  /// their sum.
  Scalar weights(Index y, Index x, std::span<Scalar> w) const {
    const int R = params_.search_radius;
    const int r = params_.patch_radius;
    const int ps = 2 * r + 1;
    const Index stride = padded_.cols();
    const Scalar* kern = kernel_.weights.data();
    const Scalar* a = padded_.data() + y * stride + x;
    const bool max_neighbor = params_.self_weight == SelfWeight::kMaxNeighbor;

    std::size_t k = 0;
    std::size_t self = 0;
    Scalar max_other = 0;
    for (int dy = -R; dy <= R; ++dy) {
      const Index jy = row_map_[static_cast<std::size_t>(y + dy + R)];
      for (int dx = -R; dx <= R; ++dx, ++k) {
        const Index jx = col_map_[static_cast<std::size_t>(x + dx + R)];
        const Scalar* b = padded_.data() + jy * stride + jx;
        Scalar d = 0;
        for (int py = 0; py < ps; ++py) {
          const Scalar* ar = a + py * stride;
          const Scalar* br = b + py * stride;
          const Scalar* kr = kern + py * ps;
          for (int px = 0; px < ps; ++px) {
            const Scalar diff = ar[px] - br[px];
            d += kr[px] * diff * diff;
          }
        }
        Scalar wk = std::exp(-d * inv_h2_);
        if (corruption_) wk *= (*corruption_)(jy, jx);
        w[k] = wk;
        if (dy == 0 && dx == 0) {
          self = k;
        } else if (wk > max_other) {
          max_other = wk;
        }
      }
    }
    if (max_neighbor) w[self] = max_other > 0 ? max_other : Scalar(1);

    Scalar sum = 0;
    for (const Scalar wk : w) sum += wk;
    return sum;
  }

  Scalar denoise_pixel(Index y, Index x, std::span<Scalar> w) const {
    const int R = params_.search_radius;
    const Scalar norm = weights(y, x, w);
    // Relative to the center so flat regions come back unchanged.
    const Scalar center = img_(y, x);
    Scalar acc = 0;
    std::size_t k = 0;
    for (int dy = -R; dy <= R; ++dy) {
      const Index jy = row_map_[static_cast<std::size_t>(y + dy + R)];
      for (int dx = -R; dx <= R; ++dx, ++k)
        acc += w[k] * (img_(jy, col_map_[static_cast<std::size_t>(x + dx + R)]) - center);
    }
    return center + acc / norm;
  }

  Image<Scalar> denoise() const {
    Image<Scalar> out(img_.rows(), img_.cols());
    parallel_rows(img_.rows(), [&](Index begin, Index end) {
      std::vector<Scalar> w(window_size());
      for (Index y = begin; y < end; ++y)
        for (Index x = 0; x < img_.cols(); ++x) out(y, x) = denoise_pixel(y, x, w);
    });
    return out;
  }

  WeightField weight_field(PixelCoord c) const {
    std::vector<Scalar> w(window_size());
    const Scalar norm = weights(c.row, c.col, w);
    WeightField field;
    field.center = c;
    field.normalizer = static_cast<double>(norm);
    field.entries.reserve(w.size());
    const int R = params_.search_radius;
    std::size_t k = 0;
    for (int dy = -R; dy <= R; ++dy)
      for (int dx = -R; dx <= R; ++dx, ++k)
        field.entries.push_back({dy, dx, source(c.row, c.col, dy, dx),
                                 static_cast<double>(w[k] / norm)});
    return field;
  }

 private:
  const Image<Scalar>& img_;
  NlmParams params_;
  PatchKernel<Scalar> kernel_;
  Image<Scalar> padded_;
  std::vector<Index> row_map_;
  std::vector<Index> col_map_;
  std::optional<Image<Scalar>> corruption_;
  Scalar inv_h2_;
};

/// exp(-|v - v_hat| / h2) per pixel, or nothing when h2 >= kH2Cap.
template <typename Scalar>
std::optional<Image<Scalar>> corruption_factor(const Image<Scalar>& img,
                                               const RobustNlmParams& params) {
  if (params.h2 >= kH2Cap) return std::nullopt;
  const Image<Scalar> prefiltered =
      gaussian_blur(img, static_cast<Scalar>(params.prefilter_sigma));
  const auto h2 = static_cast<Scalar>(params.h2);
  return Image<Scalar>((-(img - prefiltered).abs() / h2).exp());
}

}  // namespace detail

/// Classic windowed NL-means: each pixel is the average of its search window
/// weighted by exp(-d / h^2), d the Gaussian-weighted patch distance.
template <typename Scalar>
Image<Scalar> nlm_denoise(const Image<Scalar>& img, const NlmParams& params) {
  validate(params);
  require_nonempty(img.rows(), img.cols(), "nlm_denoise");
  return detail::NlmEngine<Scalar>(img, params, std::nullopt).denoise();
}

/// Robust NL-means: the classic weights are multiplied by
/// exp(-|v(j) - v_hat(j)| / h2), v_hat a Gaussian-prefiltered copy of the
/// input, so pixels far from their smoothed value contribute less.
template <typename Scalar>
Image<Scalar> robust_nlm_denoise(const Image<Scalar>& img, const RobustNlmParams& params) {
  validate(params);
  require_nonempty(img.rows(), img.cols(), "robust_nlm_denoise");
  return detail::NlmEngine<Scalar>(img, params.base, detail::corruption_factor(img, params))
      .denoise();
}

template <typename Scalar>
WeightField compute_weight_field(const Image<Scalar>& img, PixelCoord center,
                                 const RobustNlmParams& params) {
  validate(params);
  if (center.row < 0 || center.row >= img.rows() || center.col < 0 || center.col >= img.cols())
    throw ParameterError("compute_weight_field: pixel (" + std::to_string(center.row) + ", " +
                         std::to_string(center.col) + ") out of bounds");
  return detail::NlmEngine<Scalar>(img, params.base, detail::corruption_factor(img, params))
      .weight_field(center);
}

}  // namespace despeckle
