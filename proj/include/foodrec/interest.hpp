#pragma once

#include <cstdint>
#include <vector>

#include "foodrec/imaging.hpp"

namespace foodrec {

struct Keypoint {
  double x = 0.0;       // sub-pixel column
  double y = 0.0;       // sub-pixel row
  double scale = 1.0;   // Gaussian sigma of the detection level
  double response = 0.0;
};

struct DetectorParams {
  double sigma0 = 1.6;
  double scale_factor = 1.4;
  int levels = 10;
  double integration_ratio = 2.0;   // integration scale = ratio * differentiation scale
  double harris_kappa = 0.06;
  double response_threshold = 1e-8; // relative to the per-image max response (normalized to 1)
  int max_points = 3000;
};

/// Harris-Laplace: spatial maxima of the Harris measure whose scale-normalized
/// Laplacian is a local extremum across adjacent pyramid levels. Sorted by
/// descending response. A constant image yields an empty list.
std::vector<Keypoint> detect_harris_laplace(const Raster& gray, const DetectorParams& params = {});

struct PointBudget {
  std::int64_t total = 100000;
};

struct CorpusPointRef {
  int image = 0;
  int point = 0;
};

/// Subsamples a corpus of per-image keypoint lists down to the budget.
/// Quotas are apportioned proportionally to per-image counts (largest
/// remainder), then filled uniformly without replacement; deterministic
/// under the seed.
std::vector<CorpusPointRef> sample_corpus_points(const std::vector<std::vector<Keypoint>>& per_image,
                                                 const PointBudget& budget, std::uint64_t seed);

}  // namespace foodrec
