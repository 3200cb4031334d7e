#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace figmine::img {

/// Decoded raster image, row-major RGB8 (3 bytes per pixel).
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  bool valid() const {
    return width >= 1 && height >= 1 &&
           pixels.size() == static_cast<std::size_t>(width) * height * 3;
  }

  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  std::uint8_t* at(int x, int y) {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }

  // Rec.601 luma on the 0..255 scale.
  double luma(int x, int y) const {
    const std::uint8_t* p = at(x, y);
    return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  }
};

RasterImage make_image(int width, int height, std::uint8_t r = 0, std::uint8_t g = 0,
                       std::uint8_t b = 0);

/// Decode PNG or JPEG (sniffed by magic bytes) to RGB8.
RasterImage decode_image(const std::vector<std::uint8_t>& bytes);
RasterImage load_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const RasterImage& image);
void save_png(const RasterImage& image, const std::filesystem::path& path);

/// Nearest-neighbor resize so the longer side equals `long_side`,
/// preserving aspect ratio. Output sides are never below 1 px.
RasterImage resize_long_side(const RasterImage& image, int long_side);

/// Exact pixel copy of the region; throws OutOfBounds if it leaves the image.
RasterImage crop_region(const RasterImage& image, int x, int y, int w, int h);

}  // namespace figmine::img
