#include "figmine/features.hpp"

#include <algorithm>
#include <cmath>

#include "figmine/errors.hpp"

namespace figmine::classify {

FeatureVector extract_features(const img::RasterImage& original) {
  if (!original.valid()) raise(Errc::OutOfBounds, "invalid image");

  const double aspect = static_cast<double>(original.width) / original.height;
  const img::RasterImage image = img::resize_long_side(original, 256);
  const int w = image.width;
  const int h = image.height;
  const double pixel_count = static_cast<double>(w) * h;

  double spread_sum = 0.0;
  std::vector<double> histogram(kHistogramBins, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t* p = image.at(x, y);
      const int max_c = std::max({p[0], p[1], p[2]});
      const int min_c = std::min({p[0], p[1], p[2]});
      spread_sum += 2.0 * (max_c - min_c) / 3.0;
      const int bin = std::min(kHistogramBins - 1, static_cast<int>(image.luma(x, y)) / 16);
      histogram[bin] += 1.0;
    }
  }

  double gradient_sum = 0.0;
  std::size_t gradient_count = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = image.luma(x, y);
      if (x + 1 < w) {
        gradient_sum += std::abs(image.luma(x + 1, y) - v);
        ++gradient_count;
      }
      if (y + 1 < h) {
        gradient_sum += std::abs(image.luma(x, y + 1) - v);
        ++gradient_count;
      }
    }
  }

  const int frame = std::max(1, static_cast<int>(std::lround(0.05 * std::min(w, h))));
  double border_sum = 0.0, center_sum = 0.0;
  std::size_t border_count = 0, center_count = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool in_border = x < frame || y < frame || x >= w - frame || y >= h - frame;
      if (in_border) {
        border_sum += image.luma(x, y);
        ++border_count;
      } else {
        center_sum += image.luma(x, y);
        ++center_count;
      }
    }
  }
  const double border_mean = border_count ? border_sum / border_count : 0.0;
  // A frame that swallows the whole image leaves no center; treat them as equal.
  const double center_mean = center_count ? center_sum / center_count : border_mean;

  FeatureVector features;
  features.reserve(kFeatureDim);
  features.push_back(spread_sum / pixel_count / 255.0);
  for (double bin : histogram) features.push_back(bin / pixel_count);
  features.push_back(gradient_count ? gradient_sum / gradient_count / 255.0 : 0.0);
  features.push_back(aspect);
  features.push_back(border_mean / 255.0);
  features.push_back((center_mean - border_mean) / 255.0);
  return features;
}

}  // namespace figmine::classify
