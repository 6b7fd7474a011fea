#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "despeckle/image.hpp"

namespace despeckle {

struct LeeParams {
  int window_radius = 2;
  /// Coefficient of variation of the multiplicative noise.
  double noise_sigma = 0.2;
};

struct FrostParams {
  int window_radius = 2;
  /// Damping factor K.
  double damping = 1.0;
};

struct SradParams {
  int iterations = 100;
  double dt = 0.05;
  /// Initial speckle scale; decays as q0 exp(-rho t).
  double q0 = 1.0;
  double rho = 1.0;
};

inline void validate(const LeeParams& p) {
  if (p.window_radius < 1) throw ParameterError("lee: window_radius must be >= 1");
  if (!(p.noise_sigma >= 0) || !std::isfinite(p.noise_sigma))
    throw ParameterError("lee: noise_sigma must be >= 0");
}

inline void validate(const FrostParams& p) {
  if (p.window_radius < 1) throw ParameterError("frost: window_radius must be >= 1");
  if (!(p.damping > 0) || std::isnan(p.damping)) throw ParameterError("frost: damping must be > 0");
}

inline void validate(const SradParams& p) {
  if (p.iterations < 0) throw ParameterError("srad: iterations must be >= 0");
  if (!(p.dt > 0 && p.dt <= 0.25)) throw ParameterError("srad: dt must be in (0, 0.25]");
  if (!(p.q0 > 0) || !std::isfinite(p.q0)) throw ParameterError("srad: q0 must be > 0");
  if (!(p.rho >= 0) || !std::isfinite(p.rho)) throw ParameterError("srad: rho must be >= 0");
}

namespace detail {

/// Mean and population variance of the mirrored window around (y, x).
/// Both are accumulated relative to the center sample, so a constant window
/// yields exactly (c, 0).
template <typename Scalar>
struct WindowStats {
  Scalar mean;
  Scalar var;
};

template <typename Scalar>
WindowStats<Scalar> window_stats(const Image<Scalar>& img, const std::vector<Index>& rows,
                                 const std::vector<Index>& cols, Index y, Index x, int r) {
  const Scalar center = img(y, x);
  const Scalar n = Scalar((2 * r + 1) * (2 * r + 1));
  Scalar sum = 0;
  for (int dy = 0; dy <= 2 * r; ++dy)
    for (int dx = 0; dx <= 2 * r; ++dx)
      sum += img(rows[static_cast<std::size_t>(y + dy)], cols[static_cast<std::size_t>(x + dx)]) -
             center;
  const Scalar offset = sum / n;
  Scalar ss = 0;
  for (int dy = 0; dy <= 2 * r; ++dy)
    for (int dx = 0; dx <= 2 * r; ++dx) {
      const Scalar e =
          img(rows[static_cast<std::size_t>(y + dy)], cols[static_cast<std::size_t>(x + dx)]) -
          center - offset;
      ss += e * e;
    }
  return {center + offset, ss / n};
}

}  // namespace detail

/// Lee local-statistics filter: out = m + k (v - m) with
/// k = clamp((s^2 - m^2 sigma^2) / (s^2 (1 + sigma^2)), 0, 1).
template <typename Scalar>
Image<Scalar> lee_filter(const Image<Scalar>& img, const LeeParams& params) {
  validate(params);
  require_nonempty(img.rows(), img.cols(), "lee_filter");
  const int r = params.window_radius;
  const auto rows = mirror_table(img.rows(), r);
  const auto cols = mirror_table(img.cols(), r);
  const auto s2n = static_cast<Scalar>(params.noise_sigma * params.noise_sigma);
  Image<Scalar> out(img.rows(), img.cols());
  parallel_rows(img.rows(), [&](Index begin, Index end) {
    for (Index y = begin; y < end; ++y)
      for (Index x = 0; x < img.cols(); ++x) {
        const auto [m, s2] = detail::window_stats(img, rows, cols, y, x, r);
        Scalar k = 0;
        if (s2 > 0) k = std::clamp((s2 - m * m * s2n) / (s2 * (Scalar(1) + s2n)), Scalar(0), Scalar(1));
        out(y, x) = m + k * (img(y, x) - m);
      }
  });
  return out;
}

/// Frost filter: exponentially damped window average with weights
/// exp(-K Cv^2 |i - j|), Cv^2 = s^2 / m^2 the local squared coefficient of
/// variation and |i - j| the Euclidean pixel distance.
template <typename Scalar>
Image<Scalar> frost_filter(const Image<Scalar>& img, const FrostParams& params) {
  validate(params);
  require_nonempty(img.rows(), img.cols(), "frost_filter");
  const int r = params.window_radius;
  const auto rows = mirror_table(img.rows(), r);
  const auto cols = mirror_table(img.cols(), r);
  const int side = 2 * r + 1;
  std::vector<Scalar> dist(static_cast<std::size_t>(side * side));
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      dist[static_cast<std::size_t>((dy + r) * side + dx + r)] =
          std::sqrt(Scalar(dx * dx + dy * dy));
  const auto damping = static_cast<Scalar>(params.damping);

  Image<Scalar> out(img.rows(), img.cols());
  parallel_rows(img.rows(), [&](Index begin, Index end) {
    for (Index y = begin; y < end; ++y)
      for (Index x = 0; x < img.cols(); ++x) {
        const auto [m, s2] = detail::window_stats(img, rows, cols, y, x, r);
        const Scalar cv2 = m != 0 ? s2 / (m * m) : Scalar(0);
        const Scalar center = img(y, x);
        Scalar acc = 0;
        Scalar norm = 0;
        for (int dy = 0; dy < side; ++dy)
          for (int dx = 0; dx < side; ++dx) {
            const Scalar w = std::exp(-damping * cv2 * dist[static_cast<std::size_t>(dy * side + dx)]);
            acc += w * (img(rows[static_cast<std::size_t>(y + dy)],
                            cols[static_cast<std::size_t>(x + dx)]) -
                        center);
            norm += w;
          }
        out(y, x) = center + acc / norm;
      }
  });
  return out;
}

/// Speckle-reducing anisotropic diffusion, explicit scheme on a unit grid.
///
/// Per iteration n (time t = n dt):
///   q^2 = (1/2 |grad|^2 / v^2 - (1/16) (lap / v)^2) / (1 + (1/4) lap / v)^2
///   c   = clamp(1 / (1 + (q^2 - q0^2) / (q0^2 (1 + q0^2))), 0, 1)
///   v  += dt/4 * [c_S (v_S - v) + c (v_N - v) + c_E (v_E - v) + c (v_W - v)]
/// where |grad|^2 sums the squared forward and backward differences,
/// q0 = q0 exp(-rho t), and neighbors are mirrored at the border.
template <typename Scalar>
Image<Scalar> srad(const Image<Scalar>& img, const SradParams& params) {
  validate(params);
  require_nonempty(img.rows(), img.cols(), "srad");
  if ((img <= Scalar(0)).any()) throw DomainError("srad: image pixels must be > 0");

  const Index h = img.rows();
  const Index w = img.cols();
  const auto rows = mirror_table(h, 1);
  const auto cols = mirror_table(w, 1);
  auto up = [&](Index y) { return rows[static_cast<std::size_t>(y)]; };
  auto down = [&](Index y) { return rows[static_cast<std::size_t>(y + 2)]; };
  auto left = [&](Index x) { return cols[static_cast<std::size_t>(x)]; };
  auto right = [&](Index x) { return cols[static_cast<std::size_t>(x + 2)]; };

  Image<Scalar> v = img;
  Image<Scalar> next(h, w);
  Image<Scalar> c(h, w);
  for (int n = 1; n <= params.iterations; ++n) {
    const auto q0 = static_cast<Scalar>(params.q0 * std::exp(-params.rho * n * params.dt));
    const Scalar q0sq = q0 * q0;

    parallel_rows(h, [&](Index begin, Index end) {
      for (Index y = begin; y < end; ++y)
        for (Index x = 0; x < w; ++x) {
          const Scalar p = v(y, x);
          const Scalar vn = v(up(y), x);
          const Scalar vs = v(down(y), x);
          const Scalar vw = v(y, left(x));
          const Scalar ve = v(y, right(x));
          const Scalar grad2 = ((ve - p) * (ve - p) + (vs - p) * (vs - p) + (p - vw) * (p - vw) +
                                (p - vn) * (p - vn)) /
                               (p * p);
          const Scalar lap = (vn + vs + vw + ve - Scalar(4) * p) / p;
          const Scalar den = Scalar(1) + Scalar(0.25) * lap;
          const Scalar q2 = (Scalar(0.5) * grad2 - lap * lap / Scalar(16)) / (den * den);
          const Scalar coeff = Scalar(1) / (Scalar(1) + (q2 - q0sq) / (q0sq * (Scalar(1) + q0sq)));
          c(y, x) = std::clamp(coeff, Scalar(0), Scalar(1));
        }
    });

    const auto step = static_cast<Scalar>(params.dt / 4.0);
    parallel_rows(h, [&](Index begin, Index end) {
      for (Index y = begin; y < end; ++y)
        for (Index x = 0; x < w; ++x) {
          const Scalar p = v(y, x);
          const Scalar d = c(down(y), x) * (v(down(y), x) - p) + c(y, x) * (v(up(y), x) - p) +
                           c(y, right(x)) * (v(y, right(x)) - p) + c(y, x) * (v(y, left(x)) - p);
          next(y, x) = p + step * d;
        }
    });
    if (!all_finite(next))
      throw NumericError("srad: non-finite pixel at iteration " + std::to_string(n));
    v.swap(next);
  }
  return v;
}

}  // namespace despeckle
