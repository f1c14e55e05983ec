#include <doctest.h>

#include "foodrec/codebook.hpp"

using namespace foodrec;

namespace {

Mat from_values(const std::vector<std::vector<double>>& rows) {
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

}  // namespace

TEST_CASE("kmeans: two points, two clusters, exact fit") {
  const Mat pts = from_values({{0.0}, {10.0}});
  const Codebook cb = kmeans_fit(pts, 2, 1);
  CHECK(cb.k == 2);
  CHECK(cb.inertia == doctest::Approx(0.0).epsilon(1e-12));
  std::vector<double> centers = {cb.centers(0, 0), cb.centers(1, 0)};
  std::sort(centers.begin(), centers.end());
  CHECK(centers[0] == 0.0);
  CHECK(centers[1] == 10.0);
}

TEST_CASE("kmeans: single cluster mean and inertia") {
  const Mat pts = from_values({{0.0}, {2.0}});
  const Codebook cb = kmeans_fit(pts, 1, 9);
  CHECK(cb.centers(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cb.inertia == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("kmeans: separated blobs are recovered") {
  Rng rng(5);
  Mat pts(100, 2);
  std::vector<int> truth(100);
  for (int i = 0; i < 100; ++i) {
    const bool second = i >= 50;
    truth[i] = second ? 1 : 0;
    pts(i, 0) = (second ? 10.0 : 0.0) + rng.next_in(-0.5, 0.5);
    pts(i, 1) = (second ? -3.0 : 0.0) + rng.next_in(-0.5, 0.5);
  }
  const Codebook cb = kmeans_fit(pts, 2, 7);
  const BowHistogram h0 = quantize(cb, pts.topRows(50));
  const BowHistogram h1 = quantize(cb, pts.bottomRows(50));
  // every point lands with its generating blob
  CHECK(h0.counts.maxCoeff() == 50.0);
  CHECK(h1.counts.maxCoeff() == 50.0);
  CHECK(h0.counts.sum() == 50.0);
  CHECK((h0.counts.cwiseProduct(h1.counts)).sum() == 0.0);
}

TEST_CASE("kmeans: determinism and seed sensitivity") {
  Rng rng(11);
  Mat pts(60, 3);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = rng.next_double();
  const Codebook a = kmeans_fit(pts, 8, 42);
  const Codebook b = kmeans_fit(pts, 8, 42);
  CHECK((a.centers - b.centers).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.inertia == b.inertia);
}

TEST_CASE("kmeans: inertia non-increasing across Lloyd iterations") {
  Rng rng(13);
  Mat pts(200, 4);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = rng.next_double();
  KMeansDiagnostics diag;
  kmeans_fit(pts, 10, 3, Channel::Sift, &diag);
  REQUIRE(diag.inertia_history.size() >= 2);
  for (std::size_t i = 1; i < diag.inertia_history.size(); ++i) {
    CHECK(diag.inertia_history[i] <= diag.inertia_history[i - 1] + 1e-9);
  }
}

TEST_CASE("kmeans: errors") {
  const Mat pts = from_values({{0.0}, {0.0}, {0.0}});
  CHECK_THROWS_AS(kmeans_fit(pts, 2, 1), FitError);  // only one distinct vector
  const Mat two = from_values({{0.0}, {1.0}});
  CHECK_THROWS_AS(kmeans_fit(two, 3, 1), FitError);  // fewer vectors than k
  CHECK_THROWS_AS(kmeans_fit(two, 0, 1), DomainError);
}

TEST_CASE("quantize: empty input, single bin, tie rule") {
  Codebook cb;
  cb.channel = Channel::HueHist;
  cb.k = 5;
  cb.centers = Mat::Zero(5, 2);
  for (int i = 0; i < 5; ++i) cb.centers(i, 0) = i;  // centers at x = 0..4

  {
    const BowHistogram h = quantize(cb, Mat(0, 2));
    CHECK(h.counts.sum() == 0.0);
    CHECK(h.values.sum() == 0.0);
  }
  {
    Mat d(5, 2);
    d.setZero();
    d.col(0).setConstant(3.1);  // all nearest center 3
    const BowHistogram h = quantize(cb, d);
    CHECK(h.counts[3] == 5.0);
    CHECK(h.counts.sum() == 5.0);
    CHECK(h.values[3] == 1.0);
    CHECK(h.values.sum() == 1.0);
  }
  {
    Mat d(1, 2);
    d << 2.5, 0.0;  // exactly between centers 2 and 3
    const BowHistogram h = quantize(cb, d);
    CHECK(h.counts[2] == 1.0);  // tie resolves to the lowest index
    CHECK(h.counts[3] == 0.0);
  }
  {
    CHECK_THROWS_AS(quantize(cb, Mat::Zero(1, 3)), DomainError);
  }
}

TEST_CASE("quantize: mass conservation and order invariance") {
  Rng rng(17);
  Mat pts(80, 6);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = rng.next_double();
  const Codebook cb = kmeans_fit(pts, 12, 21);

  Mat descriptors(40, 6);
  for (Eigen::Index i = 0; i < descriptors.size(); ++i) descriptors.data()[i] = rng.next_double();
  const BowHistogram h = quantize(cb, descriptors);
  CHECK(h.counts.sum() == 40.0);
  CHECK(h.values.maxCoeff() == 1.0);
  CHECK(h.values.minCoeff() >= 0.0);

  // permuting descriptor rows leaves the histogram unchanged
  Mat reversed = descriptors.colwise().reverse();
  const BowHistogram h2 = quantize(cb, reversed);
  CHECK((h.counts - h2.counts).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("quantize: L1 scaling switch") {
  Codebook cb;
  cb.k = 2;
  cb.centers = from_values({{0.0}, {1.0}});
  Mat d = from_values({{0.0}, {0.1}, {0.9}});
  const BowHistogram h = quantize(cb, d, BowScaling::L1Norm);
  CHECK(h.values[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(h.values[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("stack_histograms") {
  Codebook cb;
  cb.k = 3;
  cb.centers = from_values({{0.0}, {1.0}, {2.0}});
  std::vector<BowHistogram> hs = {quantize(cb, from_values({{0.0}, {1.1}})),
                                  quantize(cb, from_values({{2.2}}))};
  const Mat m = stack_histograms(hs);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(0, 0) == 1.0);
  CHECK(m(1, 2) == 1.0);
}
