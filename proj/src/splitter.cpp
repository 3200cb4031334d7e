#include "figmine/splitter.hpp"

#include <cmath>

#include "figmine/errors.hpp"

namespace figmine::split {

namespace {

struct Region {
  int x, y, w, h;
};

// Mean luma over the 1-px frame of the region. Gutters must match this
// value: a uniform band of the wrong color (e.g. a bright spine running
// through a dark radiograph) is content, not background.
double border_mean_luma(const img::RasterImage& image, const Region& r) {
  double sum = 0.0;
  std::size_t count = 0;
  for (int x = r.x; x < r.x + r.w; ++x) {
    sum += image.luma(x, r.y);
    ++count;
    if (r.h > 1) {
      sum += image.luma(x, r.y + r.h - 1);
      ++count;
    }
  }
  for (int y = r.y + 1; y < r.y + r.h - 1; ++y) {
    sum += image.luma(r.x, y);
    ++count;
    if (r.w > 1) {
      sum += image.luma(r.x + r.w - 1, y);
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

// Mean and population stddev of luma along line `i` of the region
// (a row for horizontal bands, a column for vertical ones).
void line_stats(const img::RasterImage& image, const Region& r, Axis axis, int i, double* mean,
                double* stddev) {
  double sum = 0.0, sum_sq = 0.0;
  int n = 0;
  if (axis == Axis::horizontal) {
    const int y = r.y + i;
    for (int x = r.x; x < r.x + r.w; ++x) {
      const double v = image.luma(x, y);
      sum += v;
      sum_sq += v * v;
      ++n;
    }
  } else {
    const int x = r.x + i;
    for (int y = r.y; y < r.y + r.h; ++y) {
      const double v = image.luma(x, y);
      sum += v;
      sum_sq += v * v;
      ++n;
    }
  }
  const double m = sum / n;
  const double var = std::max(0.0, sum_sq / n - m * m);
  *mean = m;
  *stddev = std::sqrt(var);
}

std::vector<Band> detect_gutters_in_region(const img::RasterImage& image, const Region& r,
                                           Axis axis, const SplitParams& params) {
  const int extent = axis == Axis::horizontal ? r.h : r.w;
  const double border_mean = border_mean_luma(image, r);

  std::vector<Band> bands;
  int run_start = -1;
  for (int i = 0; i <= extent; ++i) {
    bool background = false;
    if (i < extent) {
      double mean, stddev;
      line_stats(image, r, axis, i, &mean, &stddev);
      background = stddev <= params.uniformity_threshold &&
                   std::abs(mean - border_mean) <= params.border_match;
    }
    if (background) {
      if (run_start < 0) run_start = i;
    } else if (run_start >= 0) {
      Band band{run_start, i};
      run_start = -1;
      const bool touches_border = band.begin == 0 || band.end == extent;
      if (band.thickness() >= params.min_gutter && !touches_border) {
        bands.push_back(band);
      }
    }
  }
  return bands;
}

void split_region(const img::RasterImage& image, const Region& r, int depth,
                  const SplitParams& params, std::vector<SubfigureBox>* out) {
  if (depth < params.max_depth) {
    auto horizontal = detect_gutters_in_region(image, r, Axis::horizontal, params);
    auto vertical = detect_gutters_in_region(image, r, Axis::vertical, params);
    const bool use_horizontal =
        !horizontal.empty() && (horizontal.size() >= vertical.size() || vertical.empty());
    const auto& cuts = use_horizontal ? horizontal : vertical;

    if (!cuts.empty()) {
      const int extent = use_horizontal ? r.h : r.w;
      int pos = 0;
      std::vector<Band> pieces;
      for (const Band& gutter : cuts) {
        if (gutter.begin > pos) pieces.push_back({pos, gutter.begin});
        pos = gutter.end;
      }
      if (pos < extent) pieces.push_back({pos, extent});

      for (const Band& piece : pieces) {
        Region sub = use_horizontal
                         ? Region{r.x, r.y + piece.begin, r.w, piece.thickness()}
                         : Region{r.x + piece.begin, r.y, piece.thickness(), r.h};
        split_region(image, sub, depth + 1, params, out);
      }
      return;
    }
  }
  out->push_back(SubfigureBox{r.x, r.y, r.w, r.h, depth});
}

}  // namespace

std::vector<Band> detect_gutters(const img::RasterImage& image, Axis axis,
                                 const SplitParams& params) {
  if (!image.valid()) raise(Errc::OutOfBounds, "invalid image");
  return detect_gutters_in_region(image, Region{0, 0, image.width, image.height}, axis, params);
}

std::vector<SubfigureBox> split_compound(const img::RasterImage& image,
                                         const SplitParams& params) {
  if (!image.valid()) raise(Errc::OutOfBounds, "invalid image");
  std::vector<SubfigureBox> boxes;
  split_region(image, Region{0, 0, image.width, image.height}, 0, params, &boxes);
  return boxes;
}

std::vector<SubfigureBox> filter_min_size(const std::vector<SubfigureBox>& boxes,
                                          const SplitParams& params) {
  std::vector<SubfigureBox> kept;
  for (const auto& box : boxes) {
    if (box.w >= params.min_panel && box.h >= params.min_panel) kept.push_back(box);
  }
  return kept;
}

img::RasterImage crop(const img::RasterImage& image, const SubfigureBox& box) {
  return img::crop_region(image, box.x, box.y, box.w, box.h);
}

}  // namespace figmine::split
