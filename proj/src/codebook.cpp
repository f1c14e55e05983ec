#include "foodrec/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace foodrec {

namespace {

// Distances from every row of x to every row of centers via the expansion
// ||a-b||^2 = ||a||^2 - 2 a.b + ||b||^2; returns n x k.
Mat pairwise_sq_dist(const Mat& x, const Mat& centers) {
  Mat d = -2.0 * (x * centers.transpose());
  d.colwise() += x.rowwise().squaredNorm();
  d.rowwise() += centers.rowwise().squaredNorm().transpose();
  return d.cwiseMax(0.0);
}

void assign_nearest(const Mat& d, std::vector<int>& assign, Vec& best) {
  const auto n = d.rows();
  const auto k = d.cols();
  assign.resize(static_cast<std::size_t>(n));
  best.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    int arg = 0;
    double b = d(i, 0);
    for (Eigen::Index j = 1; j < k; ++j) {
      if (d(i, j) < b) {  // strict keeps the lowest index on ties
        b = d(i, j);
        arg = static_cast<int>(j);
      }
    }
    assign[static_cast<std::size_t>(i)] = arg;
    best[i] = b;
  }
}

}  // namespace

int count_distinct_rows(const Mat& vectors, int cap) {
  std::unordered_map<std::uint64_t, std::vector<Eigen::Index>> buckets;
  int distinct = 0;
  // rows of a col-major matrix are strided; hash via a contiguous copy
  Vec tmp;
  for (Eigen::Index i = 0; i < vectors.rows() && distinct < cap; ++i) {
    tmp = vectors.row(i).transpose();
    const std::uint64_t h = fnv1a(tmp.data(), sizeof(double) * static_cast<std::size_t>(tmp.size()));
    auto& bucket = buckets[h];
    bool seen = false;
    for (Eigen::Index j : bucket) {
      if ((vectors.row(j) - vectors.row(i)).cwiseAbs().maxCoeff() == 0.0) {
        seen = true;
        break;
      }
    }
    if (!seen) {
      bucket.push_back(i);
      ++distinct;
    }
  }
  return distinct;
}

Codebook kmeans_fit(const Mat& vectors, int k, std::uint64_t seed, Channel channel,
                    KMeansDiagnostics* diag) {
  const auto n = vectors.rows();
  const auto dim = vectors.cols();
  if (k < 1) throw DomainError("k must be >= 1");
  if (n < k) throw FitError("k-means needs at least k vectors");
  if (count_distinct_rows(vectors, k) < k) {
    throw FitError("k-means needs at least k distinct vectors");
  }

  Rng rng(seed);
  Mat centers(k, dim);

  // k-means++ seeding
  centers.row(0) = vectors.row(static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(n))));
  Vec d2 = (vectors.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = -1;
    if (total > 0.0) {
      double target = rng.next_double() * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= d2[i];
        if (target <= 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = n - 1;
    } else {
      // all points coincide with chosen centers; take the first unused distinct row
      for (Eigen::Index i = 0; i < n; ++i) {
        bool used = false;
        for (int j = 0; j < c; ++j) {
          if ((vectors.row(i) - centers.row(j)).cwiseAbs().maxCoeff() == 0.0) {
            used = true;
            break;
          }
        }
        if (!used) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = 0;
    }
    centers.row(c) = vectors.row(pick);
    d2 = d2.cwiseMin((vectors.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  // Lloyd
  std::vector<int> assign;
  Vec best;
  double prev_inertia = std::numeric_limits<double>::infinity();
  double inertia = prev_inertia;
  int iter = 0;
  bool converged = false;
  constexpr int kMaxIter = 100;
  constexpr double kRelTol = 1e-4;

  for (iter = 0; iter < kMaxIter; ++iter) {
    Mat d = pairwise_sq_dist(vectors, centers);
    assign_nearest(d, assign, best);

    // reseed empty clusters to the point currently farthest from its center
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
    for (int a : assign) ++counts[static_cast<std::size_t>(a)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = 0;
      double fd = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])] > 1 && best[i] > fd) {
          fd = best[i];
          far = i;
        }
      }
      centers.row(c) = vectors.row(far);
      --counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(far)])];
      assign[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      best[far] = 0.0;
    }

    inertia = best.sum();
    if (diag) diag->inertia_history.push_back(inertia);

    // update step
    Mat sums = Mat::Zero(k, dim);
    std::vector<std::int64_t> sizes(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += vectors.row(i);
      ++sizes[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
      }
    }

    if (std::isfinite(prev_inertia)) {
      const double denom = std::max(prev_inertia, 1e-300);
      if ((prev_inertia - inertia) / denom < kRelTol) {
        converged = true;
        ++iter;
        break;
      }
    }
    prev_inertia = inertia;
  }

  // final inertia against the final centers
  {
    Mat d = pairwise_sq_dist(vectors, centers);
    assign_nearest(d, assign, best);
    inertia = best.sum();
  }

  if (diag) {
    diag->iterations = iter;
    diag->converged = converged;
  }

  Codebook cb;
  cb.channel = channel;
  cb.k = k;
  cb.centers = std::move(centers);
  cb.seed = seed;
  cb.inertia = inertia;
  return cb;
}

BowHistogram quantize(const Codebook& codebook, const Mat& descriptors, BowScaling scaling) {
  BowHistogram h;
  h.channel = codebook.channel;
  h.counts = Vec::Zero(codebook.k);
  h.values = Vec::Zero(codebook.k);
  if (descriptors.rows() == 0) return h;
  if (descriptors.cols() != codebook.centers.cols()) {
    throw DomainError("descriptor dimension does not match codebook");
  }

  Mat d = pairwise_sq_dist(descriptors, codebook.centers);
  std::vector<int> assign;
  Vec best;
  assign_nearest(d, assign, best);
  for (int a : assign) h.counts[a] += 1.0;

  if (scaling == BowScaling::MaxNorm) {
    const double mx = h.counts.maxCoeff();
    if (mx > 0) h.values = h.counts / mx;
  } else {
    const double s = h.counts.sum();
    if (s > 0) h.values = h.counts / s;
  }
  return h;
}

Mat stack_histograms(const std::vector<BowHistogram>& histograms) {
  if (histograms.empty()) return {};
  Mat m(static_cast<Eigen::Index>(histograms.size()), histograms[0].values.size());
  for (std::size_t i = 0; i < histograms.size(); ++i) {
    if (histograms[i].values.size() != m.cols()) {
      throw DomainError("histogram lengths differ");
    }
    m.row(static_cast<Eigen::Index>(i)) = histograms[i].values.transpose();
  }
  return m;
}

}  // namespace foodrec
