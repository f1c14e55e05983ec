#include <doctest.h>

#include <numeric>
#include <set>

#include "foodrec/segmentation.hpp"

using namespace foodrec;

namespace {

Raster two_halves(int size) {
  Raster img(size, size, 3, ColorSpace::Rgb);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const bool left = x < size / 2;
      img.at(x, y, 0) = left ? 0.9 : 0.1;
      img.at(x, y, 1) = left ? 0.2 : 0.6;
      img.at(x, y, 2) = left ? 0.1 : 0.8;
    }
  }
  return img;
}

Raster dish_on_table(int size, double radius_frac, Rng& rng, double noise = 0.01) {
  Raster img(size, size, 3, ColorSpace::Rgb);
  const double c = (size - 1) / 2.0;
  const double radius = radius_frac * size;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const bool inside = std::hypot(x - c, y - c) <= radius;
      const double base_r = inside ? 0.85 : 0.12;
      const double base_g = inside ? 0.75 : 0.10;
      const double base_b = inside ? 0.35 : 0.09;
      img.at(x, y, 0) = std::clamp(base_r + noise * rng.next_normal(), 0.0, 1.0);
      img.at(x, y, 1) = std::clamp(base_g + noise * rng.next_normal(), 0.0, 1.0);
      img.at(x, y, 2) = std::clamp(base_b + noise * rng.next_normal(), 0.0, 1.0);
    }
  }
  return img;
}

void check_partition(const SegmentLevel& level, int width, int height) {
  std::vector<int> seen(static_cast<std::size_t>(width) * height, 0);
  for (const auto& region : level.regions) {
    CHECK(region.count() > 0);
    for (int p : region.pixels) {
      REQUIRE(p >= 0);
      REQUIRE(p < width * height);
      ++seen[static_cast<std::size_t>(p)];
    }
  }
  for (int count : seen) CHECK(count == 1);
}

}  // namespace

TEST_CASE("two flat halves collapse to exactly two regions") {
  const Raster img = two_halves(48);
  const SegmentHierarchy h = hierarchical_segment(img);
  REQUIRE(!h.levels.empty());
  for (const auto& level : h.levels) {
    if (level.target_count <= 4) {
      CHECK(level.regions.size() == 2);
    }
  }
  // the finest snapshot is already the two halves: zero-cost plateaus never
  // split a level
  const auto& fine = h.levels.front();
  REQUIRE(fine.regions.size() == 2);
  CHECK(fine.regions[0].count() == 48 * 24);
  CHECK(fine.regions[1].count() == 48 * 24);
}

TEST_CASE("constant image is a single region from the first snapshot on") {
  const Raster img = Raster::constant(48, 48, 3, ColorSpace::Rgb, 0.5);
  const SegmentHierarchy h = hierarchical_segment(img);
  REQUIRE(!h.levels.empty());
  for (const auto& level : h.levels) CHECK(level.regions.size() == 1);
}

TEST_CASE("hierarchy invariants on a textured image") {
  Rng rng(3);
  Raster img(64, 48, 3, ColorSpace::Rgb);
  for (double& v : img.data()) v = rng.next_double();
  const SegmentHierarchy h = hierarchical_segment(img);
  REQUIRE(h.levels.size() == 5);

  std::size_t prev_count = static_cast<std::size_t>(-1);
  for (std::size_t l = 0; l < h.levels.size(); ++l) {
    const auto& level = h.levels[l];
    check_partition(level, 64, 48);
    CHECK(level.regions.size() <= prev_count);
    CHECK(level.regions.size() <= static_cast<std::size_t>(level.target_count));
    prev_count = level.regions.size();

    if (l > 0) {
      // merge tree: every previous region maps to a parent that contains it
      const auto& prev = h.levels[l - 1];
      REQUIRE(level.parent_of_prev.size() == prev.regions.size());
      for (std::size_t r = 0; r < prev.regions.size(); ++r) {
        const auto& parent = level.regions[static_cast<std::size_t>(level.parent_of_prev[r])];
        std::set<int> parent_pixels(parent.pixels.begin(), parent.pixels.end());
        for (int p : prev.regions[r].pixels) CHECK(parent_pixels.count(p) == 1);
      }
    }
  }
}

TEST_CASE("segmentation determinism") {
  Rng rng(5);
  Raster img(48, 48, 3, ColorSpace::Rgb);
  for (double& v : img.data()) v = rng.next_double();
  const SegmentHierarchy a = hierarchical_segment(img);
  const SegmentHierarchy b = hierarchical_segment(img);
  REQUIRE(a.levels.size() == b.levels.size());
  for (std::size_t l = 0; l < a.levels.size(); ++l) {
    REQUIRE(a.levels[l].regions.size() == b.levels[l].regions.size());
    for (std::size_t r = 0; r < a.levels[l].regions.size(); ++r) {
      CHECK(a.levels[l].regions[r].pixels == b.levels[l].regions[r].pixels);
    }
  }
}

TEST_CASE("too-small image is a domain error") {
  const Raster img = Raster::constant(20, 64, 3, ColorSpace::Rgb, 0.5);
  CHECK_THROWS_AS(hierarchical_segment(img), DomainError);
}

TEST_CASE("select_food_region: centered dish is recovered") {
  Rng rng(7);
  const int size = 96;
  const Raster img = dish_on_table(size, 0.3, rng);
  const SegmentHierarchy h = hierarchical_segment(img);
  const FoodRegion fr = select_food_region(h);
  CHECK(!fr.fallback);

  // IoU against the true dish disk
  const double c = (size - 1) / 2.0;
  const double radius = 0.3 * size;
  int inter = 0, uni = 0;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const bool truth = std::hypot(x - c, y - c) <= radius;
      const bool got = fr.mask[static_cast<std::size_t>(y) * size + x] != 0;
      if (truth && got) ++inter;
      if (truth || got) ++uni;
    }
  }
  CHECK(static_cast<double>(inter) / uni >= 0.7);
}

TEST_CASE("select_food_region: constant image falls back to the center window") {
  const Raster img = Raster::constant(64, 64, 3, ColorSpace::Rgb, 0.5);
  const SegmentHierarchy h = hierarchical_segment(img);
  const FoodRegion fr = select_food_region(h);
  CHECK(fr.fallback);
  int covered = 0;
  for (auto m : fr.mask) covered += m;
  CHECK(covered == 32 * 32);
  CHECK(fr.mask[32 * 64 + 32] == 1);
  CHECK(fr.mask[0] == 0);
}

TEST_CASE("select_food_region: full-frame dish keeps nearly everything") {
  Rng rng(9);
  const int size = 64;
  // dish texture fills the frame; two gentle tones so the 16-level is not degenerate
  Raster img(size, size, 3, ColorSpace::Rgb);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const bool stripe = ((x / 8) + (y / 8)) % 2 == 0;
      img.at(x, y, 0) = (stripe ? 0.80 : 0.78) + 0.004 * rng.next_normal();
      img.at(x, y, 1) = (stripe ? 0.70 : 0.69) + 0.004 * rng.next_normal();
      img.at(x, y, 2) = (stripe ? 0.32 : 0.33) + 0.004 * rng.next_normal();
    }
  }
  for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
  const SegmentHierarchy h = hierarchical_segment(img);
  const FoodRegion fr = select_food_region(h);
  int covered = 0;
  for (auto m : fr.mask) covered += m;
  CHECK(covered >= size * size * 95 / 100);
}

TEST_CASE("apply_mask: identity, quadrant, keypoint filtering") {
  Rng rng(11);
  Raster img(40, 32, 3, ColorSpace::Rgb);
  for (double& v : img.data()) v = rng.next_double();

  {
    std::vector<std::uint8_t> full(40 * 32, 1);
    const MaskedImage m = apply_mask(img, full);
    CHECK(m.image.width() == 40);
    CHECK(m.image.height() == 32);
    CHECK(m.offset_x == 0);
    CHECK(m.offset_y == 0);
    CHECK(m.image.data() == img.data());
  }
  {
    std::vector<std::uint8_t> quadrant(40 * 32, 0);
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 20; ++x) quadrant[static_cast<std::size_t>(y) * 40 + x] = 1;
    }
    const MaskedImage m = apply_mask(img, quadrant);
    CHECK(m.image.width() == 20);
    CHECK(m.image.height() == 16);

    std::vector<Keypoint> kps = {{5.0, 5.0, 1.0, 1.0},   // inside
                                 {19.0, 15.0, 1.0, 1.0}, // inside
                                 {25.0, 5.0, 1.0, 1.0}}; // outside the crop
    const auto kept = filter_keypoints_by_mask(kps, m);
    CHECK(kept.size() == 2);
  }
  {
    std::vector<std::uint8_t> checker(40 * 32, 0);
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 40; ++x) checker[static_cast<std::size_t>(y) * 40 + x] = (x + y) % 2;
    }
    const MaskedImage m = apply_mask(img, checker);
    std::vector<Keypoint> kps;
    for (int i = 0; i < 10; ++i) kps.push_back({static_cast<double>(i), 0.0, 1.0, 1.0});
    const auto kept = filter_keypoints_by_mask(kps, m);
    CHECK(kept.size() == 5);  // exactly the odd columns of row 0 survive
  }
  {
    std::vector<std::uint8_t> empty(40 * 32, 0);
    CHECK_THROWS_AS(apply_mask(img, empty), DomainError);
    CHECK_THROWS_AS(apply_mask(img, std::vector<std::uint8_t>(10, 1)), DomainError);
  }
}
