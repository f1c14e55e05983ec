#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "foodrec/kernels.hpp"

namespace foodrec {

struct SvmParams {
  double c = 10.0;
  double kkt_tol = 1e-3;
  std::int64_t max_passes = 1000000;  // cap on SMO pair updates
  double gamma_scale = 1.0;           // multiplier on 1/A, tuned by grid search
};

struct BinarySolution {
  Vec alpha;
  double bias = 0.0;
  double objective = 0.0;  // dual value sum(alpha) - 0.5 a'Qa
  std::vector<int> support;
  bool converged = true;
};

/// SMO on a precomputed kernel: maximal-violating-pair selection, exact
/// two-variable updates, terminating when the KKT violation drops below
/// params.kkt_tol (or max_passes, flagged via converged=false). Bias from
/// the average over unbounded support vectors, else the midpoint of the
/// feasible interval.
BinarySolution smo_solve(const Mat& kernel, const std::vector<int>& y, const SvmParams& params);

/// Decision values K * (alpha .* y) + bias for the rows of a cross kernel.
Vec decision_values(const Mat& cross_kernel, const Vec& alpha, const std::vector<int>& y,
                    double bias);

/// Closed-form inner step of the p-norm weight update:
/// beta_k = gamma_k^{2/(p+1)} / (sum_l gamma_l^{2p/(p+1)})^{1/p}, so that
/// ||beta||_p = 1 exactly.
Vec optimal_kernel_weights(const Vec& gamma, double p);

struct MklBinary {
  BinarySolution svm;
  Vec beta;
  int rounds = 0;
  bool converged = true;
  std::vector<double> objective_history;  // combined-kernel dual value per outer round
};

/// Alternating optimization: uniform beta with ||beta||_p = 1, then repeat
/// {combine, smo_solve, recompute gamma_k = (a.*y)' K_k (a.*y), update beta}
/// until the L-inf beta change is < 1e-4 or 50 rounds.
MklBinary mkl_train_binary(const std::vector<Mat>& kernels, const std::vector<int>& y,
                           const SvmParams& params, double p);

struct MklClassSolution {
  Vec alpha;
  double bias = 0.0;
  Vec beta;
  double objective = 0.0;
  std::vector<int> support;
  bool converged = true;
};

struct MklModel {
  double p = 2.0;
  std::vector<std::string> class_labels;
  std::vector<int> sample_labels;  // class index per training sample
  std::vector<MklClassSolution> per_class;

  int classes() const { return static_cast<int>(class_labels.size()); }
  Eigen::Index samples() const { return static_cast<Eigen::Index>(sample_labels.size()); }
};

/// One-vs-rest wrapper; each class learns its own beta.
MklModel train_multiclass(const std::vector<Mat>& kernels, const std::vector<int>& labels,
                          const std::vector<std::string>& class_names, const SvmParams& params,
                          double p);

struct Prediction {
  int class_id = 0;
  Vec decision_values;
};

/// Prediction from precomputed test-vs-train cross kernels (one per base
/// kernel, each m x n). Ties go to the lowest class index.
std::vector<Prediction> predict_rows(const MklModel& model, const std::vector<Mat>& cross_kernels);

struct GridSearchResult {
  SvmParams params;
  double accuracy = 0.0;  // pooled cross-validation accuracy of the winner
};

/// Stratified k-fold cross-validation over the (C, gamma_scale) grid.
/// gamma_scale g rescales the base kernels as K^g elementwise (equivalent to
/// dividing the bandwidth by g). Ties prefer smaller C, then smaller
/// gamma_scale. Deterministic under the seed.
GridSearchResult grid_search(const std::vector<Mat>& base_kernels, const std::vector<int>& labels,
                             int n_classes, const std::vector<double>& c_grid,
                             const std::vector<double>& gamma_scale_grid, int folds,
                             std::uint64_t seed, double p, const SvmParams& base_params);

}  // namespace foodrec
