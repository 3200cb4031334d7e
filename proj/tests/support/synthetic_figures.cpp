#include "support/synthetic_figures.hpp"

#include <numeric>

namespace figmine::testing {

namespace {

std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

int range(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

void blit(img::RasterImage* dst, const img::RasterImage& src, int x, int y) {
  for (int row = 0; row < src.height; ++row) {
    std::copy_n(src.at(0, row), static_cast<std::size_t>(src.width) * 3, dst->at(x, y + row));
  }
}

}  // namespace

img::RasterImage speckle_panel(std::mt19937_64& rng, int w, int h, double density) {
  img::RasterImage panel = img::make_image(w, h, 255, 255, 255);
  const auto threshold = static_cast<std::uint64_t>(density * 1000000.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (below(rng, 1000000) < threshold) {
        // mid-gray speckles: rows stay far from uniform while the panel
        // mean stays close enough to white for the border-match test
        const auto value = static_cast<std::uint8_t>(64 + below(rng, 91));
        std::uint8_t* p = panel.at(x, y);
        p[0] = p[1] = p[2] = value;
      }
    }
  }
  return panel;
}

img::RasterImage dense_noise_panel(std::mt19937_64& rng, int w, int h) {
  img::RasterImage panel = img::make_image(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto value = static_cast<std::uint8_t>(40 + below(rng, 120));
      std::uint8_t* p = panel.at(x, y);
      p[0] = p[1] = p[2] = value;
    }
  }
  return panel;
}

SyntheticGrid make_grid(std::mt19937_64& rng, const std::vector<int>& row_heights,
                        const std::vector<int>& col_widths, const std::vector<int>& row_gutters,
                        const std::vector<int>& col_gutters) {
  const int height = std::accumulate(row_heights.begin(), row_heights.end(), 0) +
                     std::accumulate(row_gutters.begin(), row_gutters.end(), 0);
  const int width = std::accumulate(col_widths.begin(), col_widths.end(), 0) +
                    std::accumulate(col_gutters.begin(), col_gutters.end(), 0);

  SyntheticGrid grid;
  grid.rows = static_cast<int>(row_heights.size());
  grid.cols = static_cast<int>(col_widths.size());
  grid.image = img::make_image(width, height, 255, 255, 255);

  int y = 0;
  for (std::size_t r = 0; r < row_heights.size(); ++r) {
    int x = 0;
    for (std::size_t c = 0; c < col_widths.size(); ++c) {
      const double density = 0.02 + 0.01 * static_cast<double>(below(rng, 4));
      blit(&grid.image, speckle_panel(rng, col_widths[c], row_heights[r], density), x, y);
      grid.panels.push_back({x, y, col_widths[c], row_heights[r], 0});
      if (c < col_gutters.size()) x += col_widths[c] + col_gutters[c];
    }
    if (r < row_gutters.size()) y += row_heights[r] + row_gutters[r];
  }
  return grid;
}

SyntheticGrid random_grid(std::mt19937_64& rng, int max_panels, int min_gutter) {
  const int rows = range(rng, 1, max_panels);
  const int cols = range(rng, 1, max_panels);

  std::vector<int> row_heights, col_widths, row_gutters, col_gutters;
  for (int r = 0; r < rows; ++r) row_heights.push_back(range(rng, 150, 420));
  for (int c = 0; c < cols; ++c) col_widths.push_back(range(rng, 150, 420));
  for (int r = 0; r + 1 < rows; ++r) row_gutters.push_back(range(rng, min_gutter, 40));
  for (int c = 0; c + 1 < cols; ++c) col_gutters.push_back(range(rng, min_gutter, 40));

  return make_grid(rng, row_heights, col_widths, row_gutters, col_gutters);
}

}  // namespace figmine::testing
