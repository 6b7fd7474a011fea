#include "despeckle/metrics.hpp"

#include <cstdio>

namespace despeckle {

namespace {

std::string fixed6(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string to_csv_row(const std::string& image_id, const std::string& filter_name,
                       const MetricReport& report) {
  return image_id + "," + filter_name + "," + fixed6(report.psnr_db) + "," + fixed6(report.ssim) +
         "," + fixed6(report.epi);
}

}  // namespace despeckle
