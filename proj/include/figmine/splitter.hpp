#pragma once

#include <vector>

#include "figmine/image.hpp"

namespace figmine::split {

enum class Axis {
  horizontal,  // bands of consecutive rows
  vertical,    // bands of consecutive columns
};

/// Half-open [begin, end) run of rows or columns.
struct Band {
  int begin = 0;
  int end = 0;
  int thickness() const { return end - begin; }
  bool operator==(const Band&) const = default;
};

struct SplitParams {
  // Max luma standard deviation for a row/column to count as uniform (0..255 scale).
  double uniformity_threshold = 4.0;
  // Max |band mean - image border mean| for a band to count as background.
  double border_match = 10.0;
  int min_gutter = 6;   // minimum band thickness in pixels
  int max_depth = 4;    // guillotine recursion limit
  int min_panel = 224;  // minimum output side for filter_min_size
};

struct SubfigureBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  int depth = 0;  // recursion depth at which the cut was made (0 = uncut)
  bool operator==(const SubfigureBox&) const = default;
};

/// Interior background bands along one axis: maximal runs of uniform
/// rows/columns whose mean luma matches the image border mean. Runs thinner
/// than min_gutter and runs touching the image border (margins) are dropped.
std::vector<Band> detect_gutters(const img::RasterImage& image, Axis axis,
                                 const SplitParams& params);

/// Recursive guillotine split along detected gutters. At each level the axis
/// with more gutters is cut (ties go to horizontal). An image with no gutters
/// yields a single box covering itself.
std::vector<SubfigureBox> split_compound(const img::RasterImage& image, const SplitParams& params);

/// Keeps boxes with w >= min_panel and h >= min_panel (boundary inclusive).
std::vector<SubfigureBox> filter_min_size(const std::vector<SubfigureBox>& boxes,
                                          const SplitParams& params);

img::RasterImage crop(const img::RasterImage& image, const SubfigureBox& box);

}  // namespace figmine::split
