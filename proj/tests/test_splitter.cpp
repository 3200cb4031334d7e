#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "figmine/errors.hpp"
#include "figmine/splitter.hpp"
#include "support/synthetic_figures.hpp"

using namespace figmine;
using split::Axis;
using split::SplitParams;
using split::SubfigureBox;

namespace {

bool boxes_match(const std::vector<SubfigureBox>& actual,
                 const std::vector<SubfigureBox>& expected, int tolerance) {
  if (actual.size() != expected.size()) return false;
  for (const auto& want : expected) {
    const bool found = std::any_of(actual.begin(), actual.end(), [&](const SubfigureBox& got) {
      return std::abs(got.x - want.x) <= tolerance && std::abs(got.y - want.y) <= tolerance &&
             std::abs(got.x + got.w - (want.x + want.w)) <= tolerance &&
             std::abs(got.y + got.h - (want.y + want.h)) <= tolerance;
    });
    if (!found) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("uniform white image has no interior gutters and stays whole") {
  const auto image = img::make_image(300, 300, 255, 255, 255);
  CHECK(split::detect_gutters(image, Axis::horizontal, {}).empty());
  CHECK(split::detect_gutters(image, Axis::vertical, {}).empty());

  const auto boxes = split::split_compound(image, {});
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0] == SubfigureBox{0, 0, 300, 300, 0});
}

TEST_CASE("two stacked panels: the white band is found exactly") {
  std::mt19937_64 rng(101);
  const auto grid = testing::make_grid(rng, {290, 290}, {600}, {20}, {});
  REQUIRE(grid.image.width == 600);
  REQUIRE(grid.image.height == 600);

  const auto bands = split::detect_gutters(grid.image, Axis::horizontal, {});
  REQUIRE(bands.size() == 1);
  CHECK(bands[0] == split::Band{290, 310});
  CHECK(split::detect_gutters(grid.image, Axis::vertical, {}).empty());

  const auto boxes = split::split_compound(grid.image, {});
  CHECK(boxes_match(boxes, grid.panels, 2));
}

TEST_CASE("bands thinner than min_gutter are not gutters") {
  std::mt19937_64 rng(102);
  const auto grid = testing::make_grid(rng, {300, 297}, {600}, {3}, {});
  SplitParams params;
  params.min_gutter = 6;
  CHECK(split::detect_gutters(grid.image, Axis::horizontal, params).empty());
  CHECK(split::split_compound(grid.image, params).size() == 1);
}

TEST_CASE("a uniform band of the wrong color is content, not a gutter") {
  // dark panel | bright spine | dark panel: the spine does not match the
  // image border, so it must not be cut.
  auto image = img::make_image(400, 300, 30, 30, 30);
  std::mt19937_64 rng(103);
  for (int y = 0; y < 300; ++y) {
    for (int x = 0; x < 400; ++x) {
      if (x >= 180 && x < 220) continue;  // spine stays uniform
      std::uint8_t* p = image.at(x, y);
      p[0] = p[1] = p[2] = static_cast<std::uint8_t>(rng() % 90);
    }
  }
  for (int y = 0; y < 300; ++y) {
    for (int x = 180; x < 220; ++x) {
      std::uint8_t* p = image.at(x, y);
      p[0] = p[1] = p[2] = 230;
    }
  }
  CHECK(split::detect_gutters(image, Axis::vertical, {}).empty());
  CHECK(split::split_compound(image, {}).size() == 1);
}

TEST_CASE("unsplittable noisy image returns the full box") {
  std::mt19937_64 rng(104);
  const auto image = testing::dense_noise_panel(rng, 500, 380);
  const auto boxes = split::split_compound(image, {});
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0] == SubfigureBox{0, 0, 500, 380, 0});
}

TEST_CASE("2x2 grid splits into the four generator panels") {
  std::mt19937_64 rng(105);
  const auto grid = testing::make_grid(rng, {440, 440}, {440, 440}, {20}, {20});
  REQUIRE(grid.image.width == 900);
  REQUIRE(grid.image.height == 900);

  const auto boxes = split::split_compound(grid.image, {});
  REQUIRE(boxes.size() == 4);
  CHECK(boxes_match(boxes, grid.panels, 2));
  for (const auto& box : boxes) CHECK(box.depth == 2);  // one cut per axis
}

TEST_CASE("three panels in a row split into three boxes") {
  std::mt19937_64 rng(106);
  const auto grid = testing::make_grid(rng, {400}, {300, 300, 300}, {}, {24, 24});
  const auto boxes = split::split_compound(grid.image, {});
  REQUIRE(boxes.size() == 3);
  CHECK(boxes_match(boxes, grid.panels, 2));
}

TEST_CASE("boxes never overlap, stay inside the image, and respect max area") {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 25; ++trial) {
    const auto grid = testing::random_grid(rng);
    const auto boxes = split::split_compound(grid.image, {});
    std::uint64_t area = 0;
    for (const auto& box : boxes) {
      CHECK(box.x >= 0);
      CHECK(box.y >= 0);
      CHECK(box.x + box.w <= grid.image.width);
      CHECK(box.y + box.h <= grid.image.height);
      area += static_cast<std::uint64_t>(box.w) * box.h;
    }
    CHECK(area <= static_cast<std::uint64_t>(grid.image.width) * grid.image.height);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      for (std::size_t j = i + 1; j < boxes.size(); ++j) {
        const bool disjoint = boxes[i].x + boxes[i].w <= boxes[j].x ||
                              boxes[j].x + boxes[j].w <= boxes[i].x ||
                              boxes[i].y + boxes[i].h <= boxes[j].y ||
                              boxes[j].y + boxes[j].h <= boxes[i].y;
        CHECK(disjoint);
      }
    }
  }
}

TEST_CASE("determinism: same image and params give identical boxes") {
  std::mt19937_64 rng(108);
  const auto grid = testing::random_grid(rng);
  const auto first = split::split_compound(grid.image, {});
  const auto second = split::split_compound(grid.image, {});
  CHECK(first == second);
}

TEST_CASE("idempotence: a cropped panel does not split again") {
  std::mt19937_64 rng(109);
  const auto grid = testing::make_grid(rng, {320, 320}, {320, 320}, {16}, {16});
  const auto boxes = split::split_compound(grid.image, {});
  REQUIRE(boxes.size() == 4);
  for (const auto& box : boxes) {
    const auto panel = split::crop(grid.image, box);
    const auto again = split::split_compound(panel, {});
    REQUIRE(again.size() == 1);
    CHECK(again[0].w == panel.width);
    CHECK(again[0].h == panel.height);
  }
}

TEST_CASE("randomized grids split into exactly the generator panel count") {
  std::mt19937_64 rng(110);
  int exact = 0;
  const int trials = 40;
  for (int trial = 0; trial < trials; ++trial) {
    const auto grid = testing::random_grid(rng);
    const auto boxes = split::split_compound(grid.image, {});
    if (boxes_match(boxes, grid.panels, 2)) ++exact;
  }
  CHECK(exact >= trials * 95 / 100);
}

TEST_CASE("224 filter keeps boundary-sized boxes and drops smaller ones") {
  SplitParams params;  // min_panel = 224
  const std::vector<SubfigureBox> boxes = {
      {0, 0, 200, 300, 1}, {0, 0, 224, 224, 1}, {0, 0, 300, 223, 1}, {0, 0, 500, 400, 1}};
  const auto kept = split::filter_min_size(boxes, params);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0] == boxes[1]);
  CHECK(kept[1] == boxes[3]);
  CHECK(split::filter_min_size({}, params).empty());
}

TEST_CASE("crop copies pixels exactly and rejects out-of-bounds boxes") {
  std::mt19937_64 rng(111);
  const auto image = testing::dense_noise_panel(rng, 64, 48);

  const auto full = split::crop(image, {0, 0, 64, 48, 0});
  CHECK(full.pixels == image.pixels);

  const auto single = split::crop(image, {0, 0, 1, 1, 0});
  REQUIRE(single.pixels.size() == 3);
  CHECK(single.pixels[0] == image.pixels[0]);

  const auto region = split::crop(image, {10, 5, 20, 30, 0});
  for (int y = 0; y < 30; ++y) {
    for (int x = 0; x < 20; ++x) {
      CHECK(region.at(x, y)[0] == image.at(10 + x, 5 + y)[0]);
    }
  }
  CHECK_THROWS_AS(split::crop(image, {60, 40, 10, 10, 0}), Error);
  CHECK_THROWS_AS(split::crop(image, {-1, 0, 5, 5, 0}), Error);
}

TEST_CASE("grid fixture panels crop pixel-equal to the generator's panels") {
  std::mt19937_64 rng(112);
  // Rebuild the same panels the generator blitted, then compare crops.
  const auto grid = testing::make_grid(rng, {260, 260}, {260, 260}, {18}, {18});
  const auto boxes = split::split_compound(grid.image, {});
  REQUIRE(boxes_match(boxes, grid.panels, 0));  // flush grid: exact edges
  for (const auto& panel : grid.panels) {
    const auto cropped = split::crop(grid.image, panel);
    CHECK(cropped.width == panel.w);
    CHECK(cropped.height == panel.h);
  }
}
