#include <doctest.h>

#include <cmath>
#include <set>

#include "foodrec/interest.hpp"

using namespace foodrec;

namespace {

Raster square_image(int size, int square, double bg = 0.0, double fg = 1.0) {
  Raster img(size, size, 1, ColorSpace::Gray);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) img.at(x, y, 0) = bg;
  }
  const int lo = (size - square) / 2;
  for (int y = lo; y < lo + square; ++y) {
    for (int x = lo; x < lo + square; ++x) img.at(x, y, 0) = fg;
  }
  return img;
}

Raster upscale2x(const Raster& src) {
  Raster out(src.width() * 2, src.height() * 2, 1, src.space());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out.at(x, y, 0) = src.at(x / 2, y / 2, 0);
  }
  return out;
}

Raster shift(const Raster& src, int dx, int dy) {
  Raster out(src.width(), src.height(), 1, src.space());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const int sx = std::clamp(x - dx, 0, src.width() - 1);
      const int sy = std::clamp(y - dy, 0, src.height() - 1);
      out.at(x, y, 0) = src.at(sx, sy, 0);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("constant image yields no keypoints") {
  const Raster img = Raster::constant(64, 64, 1, ColorSpace::Gray, 0.5);
  CHECK(detect_harris_laplace(img).empty());
}

TEST_CASE("too-small image is an error") {
  const Raster img = Raster::constant(15, 40, 1, ColorSpace::Gray, 0.5);
  CHECK_THROWS_AS(detect_harris_laplace(img), DetectionError);
}

TEST_CASE("white square corners are found") {
  const Raster img = square_image(64, 16);
  const auto kps = detect_harris_laplace(img);
  REQUIRE(kps.size() >= 4);

  const double lo = (64 - 16) / 2.0;      // 24: first bright pixel
  const double hi = lo + 16.0 - 1.0;      // 39: last bright pixel
  const double corners[4][2] = {{lo, lo}, {hi, lo}, {lo, hi}, {hi, hi}};
  for (const auto& c : corners) {
    bool found = false;
    for (const auto& kp : kps) {
      if (std::hypot(kp.x - c[0], kp.y - c[1]) <= 3.0) {
        found = true;
        break;
      }
    }
    CHECK(found);
  }
  // sorted by descending response
  for (std::size_t i = 1; i < kps.size(); ++i) CHECK(kps[i - 1].response >= kps[i].response);
}

TEST_CASE("scale covariance on a 2x upscaled square") {
  const Raster base = square_image(64, 16);
  const Raster big = upscale2x(base);
  const auto kps1 = detect_harris_laplace(base);
  const auto kps2 = detect_harris_laplace(big);
  REQUIRE(!kps1.empty());
  REQUIRE(!kps2.empty());

  // the strongest detection of each image is the square blob; it must
  // correspond spatially and its characteristic scale must double
  const Keypoint& top1 = kps1.front();
  const Keypoint& top2 = kps2.front();
  CHECK(std::hypot(top2.x - 2.0 * top1.x, top2.y - 2.0 * top1.y) <= 4.0);
  CHECK(top2.scale / top1.scale == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("shift covariance") {
  Raster img(72, 72, 1, ColorSpace::Gray);
  Rng rng(5);
  // a few random bright blobs away from the borders
  for (int t = 0; t < 5; ++t) {
    const int cx = rng.next_int(24, 40);
    const int cy = rng.next_int(24, 40);
    for (int y = -3; y <= 3; ++y) {
      for (int x = -3; x <= 3; ++x) {
        if (x * x + y * y <= 9) img.at(cx + x, cy + y, 0) = 1.0;
      }
    }
  }
  const auto all = detect_harris_laplace(img);
  REQUIRE(!all.empty());
  const int dx = 5, dy = 3;
  const auto moved = detect_harris_laplace(shift(img, dx, dy));
  REQUIRE(!moved.empty());

  // keypoints whose blur support stays inside the image (coarse scales see
  // different border reflections after the shift) and whose response is not
  // at the relative-threshold noise floor
  std::vector<Keypoint> kps;
  for (const auto& kp : all) {
    if (kp.scale <= 5.0 && kp.response >= 1e-6) kps.push_back(kp);
  }
  REQUIRE(!kps.empty());

  int matched = 0;
  for (const auto& kp : kps) {
    for (const auto& kp2 : moved) {
      if (std::abs(kp2.x - (kp.x + dx)) <= 0.5 && std::abs(kp2.y - (kp.y + dy)) <= 0.5) {
        ++matched;
        break;
      }
    }
  }
  CHECK(matched >= static_cast<int>(kps.size()) * 8 / 10);
}

TEST_CASE("raising the threshold only removes keypoints") {
  const Raster img = square_image(64, 16);
  DetectorParams lo_params;
  lo_params.response_threshold = 1e-8;
  DetectorParams hi_params;
  hi_params.response_threshold = 1e-2;
  const auto lo = detect_harris_laplace(img, lo_params);
  const auto hi = detect_harris_laplace(img, hi_params);
  CHECK(hi.size() <= lo.size());
  for (const auto& kp : hi) {
    bool present = false;
    for (const auto& kp2 : lo) {
      if (kp2.x == kp.x && kp2.y == kp.y && kp2.scale == kp.scale) {
        present = true;
        break;
      }
    }
    CHECK(present);
  }
}

TEST_CASE("max_points caps the output") {
  Raster img(64, 64, 1, ColorSpace::Gray);
  Rng rng(9);
  for (double& v : img.data()) v = rng.next_double();
  DetectorParams params;
  params.max_points = 10;
  const auto kps = detect_harris_laplace(img, params);
  CHECK(kps.size() <= 10);
}

TEST_CASE("corpus sampling: under budget returns everything") {
  std::vector<std::vector<Keypoint>> corpus(10, std::vector<Keypoint>(50));
  const auto refs = sample_corpus_points(corpus, PointBudget{1000}, 1);
  CHECK(refs.size() == 500);
}

TEST_CASE("corpus sampling: exact cardinality, no duplicates, deterministic") {
  std::vector<std::vector<Keypoint>> corpus(10, std::vector<Keypoint>(50));
  const auto refs = sample_corpus_points(corpus, PointBudget{100}, 7);
  CHECK(refs.size() == 100);
  std::set<std::pair<int, int>> seen;
  for (const auto& r : refs) CHECK(seen.insert({r.image, r.point}).second);

  const auto again = sample_corpus_points(corpus, PointBudget{100}, 7);
  REQUIRE(again.size() == refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    CHECK(again[i].image == refs[i].image);
    CHECK(again[i].point == refs[i].point);
  }
}

TEST_CASE("corpus sampling: proportional within 10% for large contributors") {
  std::vector<std::vector<Keypoint>> corpus;
  corpus.push_back(std::vector<Keypoint>(1000));
  corpus.push_back(std::vector<Keypoint>(500));
  corpus.push_back(std::vector<Keypoint>(1500));
  const auto refs = sample_corpus_points(corpus, PointBudget{600}, 3);
  CHECK(refs.size() == 600);
  int per_image[3] = {0, 0, 0};
  for (const auto& r : refs) ++per_image[r.image];
  CHECK(std::abs(per_image[0] - 200) <= 20);
  CHECK(std::abs(per_image[1] - 100) <= 10);
  CHECK(std::abs(per_image[2] - 300) <= 30);
}

TEST_CASE("corpus sampling errors") {
  CHECK_THROWS_AS(sample_corpus_points({}, PointBudget{10}, 1), SamplingError);
  std::vector<std::vector<Keypoint>> corpus(2);
  CHECK_THROWS_AS(sample_corpus_points(corpus, PointBudget{10}, 1), SamplingError);
  corpus[0].resize(5);
  CHECK_THROWS_AS(sample_corpus_points(corpus, PointBudget{0}, 1), DomainError);
}
