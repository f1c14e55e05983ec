#pragma once

#include <cstdint>
#include <vector>

#include "foodrec/descriptors.hpp"

namespace foodrec {

struct Codebook {
  Channel channel = Channel::Sift;
  int k = 0;
  Mat centers;  // k x dim
  std::uint64_t seed = 0;
  double inertia = 0.0;
};

struct KMeansDiagnostics {
  std::vector<double> inertia_history;  // one entry per Lloyd iteration
  int iterations = 0;
  bool converged = false;
};

/// k-means++ seeding then Lloyd iterations until the relative inertia
/// improvement drops below 1e-4 or 100 iterations. Empty clusters are
/// reseeded to the point farthest from its assigned center. Deterministic
/// under the seed. Fails when the input has fewer than k distinct rows.
Codebook kmeans_fit(const Mat& vectors, int k, std::uint64_t seed,
                    Channel channel = Channel::Sift, KMeansDiagnostics* diag = nullptr);

/// Number of distinct rows, counting stops at cap.
int count_distinct_rows(const Mat& vectors, int cap);

enum class BowScaling { MaxNorm, L1Norm };

struct BowHistogram {
  Channel channel = Channel::Sift;
  Vec counts;  // raw nearest-center counts
  Vec values;  // counts scaled into [0,1]
};

/// Nearest-center quantization (Euclidean, ties to the lowest index).
/// values = counts / max(counts) under MaxNorm (the default), counts / sum
/// under L1Norm; all-zero when no descriptors are given.
BowHistogram quantize(const Codebook& codebook, const Mat& descriptors,
                      BowScaling scaling = BowScaling::MaxNorm);

/// Stacks histogram value vectors into a samples x V matrix.
Mat stack_histograms(const std::vector<BowHistogram>& histograms);

}  // namespace foodrec
