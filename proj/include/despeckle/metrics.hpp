#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "despeckle/image.hpp"

namespace despeckle {

struct SsimParams {
  double window_sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
};

/// PSNR/SSIM/EPI of one test image against its reference. psnr_db is
/// +infinity for identical images.
struct MetricReport {
  double psnr_db = 0;
  double ssim = 0;
  double epi = 0;
};

namespace detail {

template <typename A, typename B>
void require_same_size(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ParameterError(std::string(what) + ": image dimensions differ (" +
                         std::to_string(a.cols()) + "x" + std::to_string(a.rows()) + " vs " +
                         std::to_string(b.cols()) + "x" + std::to_string(b.rows()) + ")");
}

/// 4-neighbor Laplacian over interior pixels.
template <typename Scalar>
Image<Scalar> interior_laplacian(const Image<Scalar>& img) {
  const Index h = img.rows() - 2;
  const Index w = img.cols() - 2;
  return img.block(0, 1, h, w) + img.block(2, 1, h, w) + img.block(1, 0, h, w) +
         img.block(1, 2, h, w) - Scalar(4) * img.block(1, 1, h, w);
}

}  // namespace detail

/// 10 log10(peak^2 / MSE); +infinity when the images are identical.
template <typename A, typename B>
double psnr(const Eigen::ArrayBase<A>& reference, const Eigen::ArrayBase<B>& test, double peak = 255.0) {
  detail::require_same_size(reference, test, "psnr");
  if (!(peak > 0)) throw ParameterError("psnr: peak must be positive");
  const double mse = (reference.template cast<double>() - test.template cast<double>()).square().mean();
  if (mse == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

/// Mean SSIM with Gaussian-window local statistics (mirror boundary, no
/// border cropping).
template <typename Scalar>
double ssim(const Image<Scalar>& reference, const Image<Scalar>& test, const SsimParams& params = {}) {
  detail::require_same_size(reference, test, "ssim");
  if (!(params.window_sigma > 0 && params.k1 > 0 && params.k2 > 0 && params.dynamic_range > 0))
    throw ParameterError("ssim: parameters must be positive");
  const Index window = 2 * static_cast<Index>(std::ceil(3.0 * params.window_sigma)) + 1;
  if (reference.rows() < window || reference.cols() < window)
    throw ParameterError("ssim: images must be at least " + std::to_string(window) + "x" +
                         std::to_string(window));

  const GrayImage x = reference.template cast<double>();
  const GrayImage y = test.template cast<double>();
  const double s = params.window_sigma;
  const GrayImage mx = gaussian_blur(x, s);
  const GrayImage my = gaussian_blur(y, s);
  const GrayImage sxx = gaussian_blur(GrayImage(x * x), s) - mx * mx;
  const GrayImage syy = gaussian_blur(GrayImage(y * y), s) - my * my;
  const GrayImage sxy = gaussian_blur(GrayImage(x * y), s) - mx * my;
  const double c1 = (params.k1 * params.dynamic_range) * (params.k1 * params.dynamic_range);
  const double c2 = (params.k2 * params.dynamic_range) * (params.k2 * params.dynamic_range);
  const GrayImage map = ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) /
                        ((mx * mx + my * my + c1) * (sxx + syy + c2));
  return map.mean();
}

/// Edge preservation index: Pearson correlation of the 3x3 Laplacian
/// responses of reference and test over interior pixels. 0 when either
/// response has zero variance.
template <typename Scalar>
double epi(const Image<Scalar>& reference, const Image<Scalar>& test) {
  detail::require_same_size(reference, test, "epi");
  if (reference.rows() < 3 || reference.cols() < 3)
    throw ParameterError("epi: images must be at least 3x3");
  GrayImage a = detail::interior_laplacian(GrayImage(reference.template cast<double>()));
  GrayImage b = detail::interior_laplacian(GrayImage(test.template cast<double>()));
  a -= a.mean();
  b -= b.mean();
  const double saa = (a * a).sum();
  const double sbb = (b * b).sum();
  if (saa == 0 || sbb == 0) return 0.0;
  return (a * b).sum() / std::sqrt(saa * sbb);
}

template <typename Scalar>
MetricReport evaluate(const Image<Scalar>& reference, const Image<Scalar>& test, double peak = 255.0,
                      const SsimParams& ssim_params = {}) {
  return {psnr(reference, test, peak), ssim(reference, test, ssim_params), epi(reference, test)};
}

/// Column names of the report CSV.
inline constexpr const char* kReportCsvHeader = "image_id,filter_name,psnr_db,ssim,epi";

/// One CSV row: values with 6 decimals, "inf" for an infinite PSNR.
std::string to_csv_row(const std::string& image_id, const std::string& filter_name,
                       const MetricReport& report);

}  // namespace despeckle
