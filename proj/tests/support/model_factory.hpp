#pragma once

// Randomized RestaurantModel instances for persistence tests.

#include "foodrec/pipeline/model.hpp"

namespace foodrec::testing {

inline pipeline::RestaurantModel random_model(Rng& rng, int n_samples, int n_classes) {
  pipeline::RestaurantModel m;
  m.restaurant_id = "rand" + std::to_string(rng.next_int(0, 999));
  m.seed = rng.next_u64();
  m.config_snapshot = "seed=" + std::to_string(m.seed) + "\n";
  m.svm.c = rng.next_in(0.1, 20.0);
  m.svm.kkt_tol = rng.next_in(1e-6, 1e-3);
  m.svm.gamma_scale = rng.next_in(0.25, 4.0);
  m.bow_scaling = rng.next_double() < 0.5 ? BowScaling::MaxNorm : BowScaling::L1Norm;
  m.mkl_p = rng.next_in(1.1, 8.0);

  const int k = rng.next_int(2, 6);
  for (int c = 0; c < kChannelCount; ++c) {
    Codebook& cb = m.codebooks[c];
    cb.channel = kAllChannels[static_cast<std::size_t>(c)];
    cb.k = k;
    cb.centers = Mat(k, channel_dim(cb.channel));
    for (Eigen::Index i = 0; i < cb.centers.size(); ++i) cb.centers.data()[i] = rng.next_normal();
    cb.seed = rng.next_u64();
    cb.inertia = rng.next_double();
    m.bandwidth[c].a = rng.next_in(0.01, 2.0);
    m.bandwidth[c].degenerate = rng.next_double() < 0.1;
    m.train_histograms[c] = Mat(n_samples, k);
    for (Eigen::Index i = 0; i < m.train_histograms[c].size(); ++i) {
      m.train_histograms[c].data()[i] = rng.next_double();
    }
  }

  m.mkl.p = m.mkl_p;
  for (int c = 0; c < n_classes; ++c) m.mkl.class_labels.push_back("class" + std::to_string(c));
  for (int i = 0; i < n_samples; ++i) m.mkl.sample_labels.push_back(rng.next_int(0, n_classes - 1));
  for (int c = 0; c < n_classes; ++c) {
    MklClassSolution cs;
    cs.alpha = Vec(n_samples);
    for (Eigen::Index i = 0; i < cs.alpha.size(); ++i) cs.alpha[i] = rng.next_double();
    cs.bias = rng.next_normal();
    cs.beta = Vec(kChannelCount);
    for (Eigen::Index i = 0; i < cs.beta.size(); ++i) cs.beta[i] = rng.next_double();
    cs.objective = rng.next_normal();
    cs.support = {0, n_samples - 1};
    cs.converged = rng.next_double() < 0.9;
    m.mkl.per_class.push_back(std::move(cs));
  }
  return m;
}

inline bool models_bitwise_equal(const pipeline::RestaurantModel& a,
                                 const pipeline::RestaurantModel& b) {
  auto vec_eq = [](const Vec& x, const Vec& y) {
    return x.size() == y.size() &&
           std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0;
  };
  auto mat_eq = [](const Mat& x, const Mat& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() &&
           std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0;
  };
  if (a.restaurant_id != b.restaurant_id || a.seed != b.seed ||
      a.config_snapshot != b.config_snapshot || a.svm.c != b.svm.c ||
      a.svm.kkt_tol != b.svm.kkt_tol || a.svm.max_passes != b.svm.max_passes ||
      a.svm.gamma_scale != b.svm.gamma_scale || a.bow_scaling != b.bow_scaling ||
      a.mkl_p != b.mkl_p) {
    return false;
  }
  for (int c = 0; c < kChannelCount; ++c) {
    if (a.codebooks[c].channel != b.codebooks[c].channel || a.codebooks[c].k != b.codebooks[c].k ||
        !mat_eq(a.codebooks[c].centers, b.codebooks[c].centers) ||
        a.codebooks[c].seed != b.codebooks[c].seed ||
        a.codebooks[c].inertia != b.codebooks[c].inertia ||
        a.bandwidth[c].a != b.bandwidth[c].a ||
        a.bandwidth[c].degenerate != b.bandwidth[c].degenerate ||
        !mat_eq(a.train_histograms[c], b.train_histograms[c])) {
      return false;
    }
  }
  if (a.mkl.p != b.mkl.p || a.mkl.class_labels != b.mkl.class_labels ||
      a.mkl.sample_labels != b.mkl.sample_labels ||
      a.mkl.per_class.size() != b.mkl.per_class.size()) {
    return false;
  }
  for (std::size_t c = 0; c < a.mkl.per_class.size(); ++c) {
    const auto& x = a.mkl.per_class[c];
    const auto& y = b.mkl.per_class[c];
    if (!vec_eq(x.alpha, y.alpha) || x.bias != y.bias || !vec_eq(x.beta, y.beta) ||
        x.objective != y.objective || x.support != y.support || x.converged != y.converged) {
      return false;
    }
  }
  return true;
}

}  // namespace foodrec::testing
