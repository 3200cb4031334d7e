#pragma once

#include <vector>

#include "figmine/image.hpp"

namespace figmine::classify {

inline constexpr int kHistogramBins = 16;

/// Fixed feature order (dimension 21):
///   [0]      grayscale-ness: mean per-pixel channel spread 2*(max-min)/3,
///            scaled by 1/255 (0 for gray pixels, 2/3 for fully saturated)
///   [1..16]  16-bin luma histogram, normalized to sum 1
///   [17]     edge density: mean |luma difference| between 4-neighbors, /255
///   [18]     aspect ratio width/height of the original image
///   [19]     border darkness: mean luma of the 5% border frame, /255
///   [20]     center/border contrast: (center mean - border mean) / 255
inline constexpr int kFeatureDim = kHistogramBins + 5;

inline constexpr int kChannelSpreadIndex = 0;
inline constexpr int kHistogramIndex = 1;  // 16 bins
inline constexpr int kEdgeDensityIndex = kHistogramIndex + kHistogramBins;
inline constexpr int kAspectRatioIndex = kEdgeDensityIndex + 1;
inline constexpr int kBorderDarknessIndex = kAspectRatioIndex + 1;
inline constexpr int kCenterContrastIndex = kBorderDarknessIndex + 1;

using FeatureVector = std::vector<double>;

/// Deterministic features, computed after nearest-neighbor resizing the
/// long side to 256 px (aspect ratio comes from the original dimensions).
FeatureVector extract_features(const img::RasterImage& image);

}  // namespace figmine::classify
