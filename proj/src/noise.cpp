#include "despeckle/noise.hpp"

namespace despeckle {

std::string to_string(SpeckleModel model) {
  switch (model) {
    case SpeckleModel::kMultiplicativeGaussian:
      return "mult-gauss";
    case SpeckleModel::kRayleigh:
      return "rayleigh";
  }
  return "unknown";
}

GrayImage make_phantom(Index height, Index width) {
  require_nonempty(height, width, "make_phantom");
  GrayImage img(height, width);
  const double h = static_cast<double>(height);
  const double w = static_cast<double>(width);

  auto in_disk = [](double u, double v, double cu, double cv, double r) {
    return (u - cu) * (u - cu) + (v - cv) * (v - cv) <= r * r;
  };

  for (Index y = 0; y < height; ++y) {
    for (Index x = 0; x < width; ++x) {
      // Pixel centers in normalized [0, 1) coordinates.
      const double u = (static_cast<double>(x) + 0.5) / w;
      const double v = (static_cast<double>(y) + 0.5) / h;
      double value = 80.0;
      if (u >= 0.08 && u < 0.52 && v >= 0.08 && v < 0.48) value = 150.0;
      if (in_disk(u, v, 0.30, 0.28, 0.09)) value = 110.0;
      if (in_disk(u, v, 0.74, 0.28, 0.16)) value = 200.0;
      if (in_disk(u, v, 0.72, 0.72, 0.13)) value = 40.0;
      if (v >= 0.60 && v < 0.88 && u >= 0.08 && u < 0.52) {
        const double phase = (u - 0.08) / 0.088;
        if (phase - std::floor(phase) < 0.5) value = 170.0;
      }
      img(y, x) = value;
    }
  }

  // Point targets: 3x3 bright squares along the bottom edge.
  for (const double cu : {0.62, 0.74, 0.86}) {
    const Index cx = static_cast<Index>(cu * w);
    const Index cy = static_cast<Index>(0.93 * h);
    for (Index dy = -1; dy <= 1; ++dy)
      for (Index dx = -1; dx <= 1; ++dx) {
        const Index yy = cy + dy;
        const Index xx = cx + dx;
        if (yy >= 0 && yy < height && xx >= 0 && xx < width) img(yy, xx) = 220.0;
      }
  }
  return img;
}

}  // namespace despeckle
