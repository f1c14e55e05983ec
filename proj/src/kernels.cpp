#include "foodrec/kernels.hpp"

#include <cmath>

namespace foodrec {

double chi_square_distance(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b) {
  if (a.size() != b.size()) throw DomainError("chi_square_distance: length mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double s = a[i] + b[i];
    if (s > 0.0) {
      const double d = a[i] - b[i];
      acc += d * d / s;
    }
  }
  return 0.5 * acc;
}

ChannelBandwidth mean_pairwise_distance(const Mat& histograms) {
  const auto n = histograms.rows();
  if (n < 2) throw DomainError("mean_pairwise_distance needs at least 2 histograms");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      acc += chi_square_distance(histograms.row(i).transpose(), histograms.row(j).transpose());
    }
  }
  const double mean = acc / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
  ChannelBandwidth bw;
  if (mean < 1e-12) {
    bw.a = 1.0;
    bw.degenerate = true;
  } else {
    bw.a = mean;
  }
  return bw;
}

Mat kernel_matrix(const Mat& rows, const Mat& cols, double a) {
  if (a <= 0.0) throw DomainError("kernel bandwidth must be positive");
  if (rows.cols() != cols.cols()) throw DomainError("kernel_matrix: histogram lengths differ");
  Mat k(rows.rows(), cols.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < cols.rows(); ++j) {
      k(i, j) = std::exp(-chi_square_distance(rows.row(i).transpose(), cols.row(j).transpose()) / a);
    }
  }
  return k;
}

Mat kernel_matrix_symmetric(const Mat& samples, double a) {
  if (a <= 0.0) throw DomainError("kernel bandwidth must be positive");
  const auto n = samples.rows();
  Mat k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v =
          std::exp(-chi_square_distance(samples.row(i).transpose(), samples.row(j).transpose()) / a);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

KernelSet build_kernel_set(const std::array<Mat, kChannelCount>& per_channel_histograms) {
  KernelSet set;
  set.samples = per_channel_histograms[0].rows();
  for (int c = 0; c < kChannelCount; ++c) {
    if (per_channel_histograms[c].rows() != set.samples) {
      throw DomainError("build_kernel_set: channel sample counts are misaligned");
    }
  }
  for (int c = 0; c < kChannelCount; ++c) {
    set.bandwidth[c] = mean_pairwise_distance(per_channel_histograms[c]);
    set.k[c] = kernel_matrix_symmetric(per_channel_histograms[c], set.bandwidth[c].a);
  }
  return set;
}

}  // namespace foodrec
