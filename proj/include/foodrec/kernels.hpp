#pragma once

#include <array>

#include "foodrec/codebook.hpp"

namespace foodrec {

/// Chi-square histogram distance, 0.5 * sum (a_i - b_i)^2 / (a_i + b_i),
/// with 0/0 terms contributing zero. Symmetric, zero iff equal.
double chi_square_distance(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b);

struct ChannelBandwidth {
  double a = 1.0;          // mean pairwise chi-square distance
  bool degenerate = false; // all-identical corpus, A substituted with 1
};

/// Mean chi-square distance over unordered distinct pairs of histogram rows.
/// A mean below 1e-12 marks the corpus degenerate and substitutes A = 1.
ChannelBandwidth mean_pairwise_distance(const Mat& histograms);

/// Extended Gaussian kernel exp(-D/a) between every row pair; entries in
/// (0,1].
Mat kernel_matrix(const Mat& rows, const Mat& cols, double a);

/// Training-time variant: symmetric with an exact unit diagonal.
Mat kernel_matrix_symmetric(const Mat& samples, double a);

struct KernelSet {
  std::array<Mat, kChannelCount> k;
  std::array<ChannelBandwidth, kChannelCount> bandwidth;
  Eigen::Index samples = 0;
};

/// Builds the six aligned base kernels from per-channel histogram matrices
/// (consistent row ordering across channels is the caller's contract).
KernelSet build_kernel_set(const std::array<Mat, kChannelCount>& per_channel_histograms);

}  // namespace foodrec
