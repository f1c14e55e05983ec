#include "foodrec/mkl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace foodrec {

namespace {

void check_binary_labels(const Mat& kernel, const std::vector<int>& y) {
  if (kernel.rows() != kernel.cols()) throw DomainError("kernel must be square");
  if (static_cast<Eigen::Index>(y.size()) != kernel.rows()) {
    throw DomainError("label count does not match kernel size");
  }
  if ((kernel - kernel.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw DomainError("kernel must be symmetric");
  }
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw DomainError("labels must be +1 or -1");
  }
  if (!pos || !neg) throw TrainingError("both classes must be present");
}

}  // namespace

BinarySolution smo_solve(const Mat& kernel, const std::vector<int>& y, const SvmParams& params) {
  check_binary_labels(kernel, y);
  if (params.c <= 0.0) throw DomainError("C must be positive");
  if (params.kkt_tol <= 0.0) throw DomainError("kkt_tol must be positive");

  const auto n = kernel.rows();
  const double c = params.c;
  Vec yd(n);
  for (Eigen::Index t = 0; t < n; ++t) yd[t] = y[t];
  Vec alpha = Vec::Zero(n);
  // gradient of 0.5 a'Qa - sum(a) with Q_ij = y_i y_j K_ij; starts at -1
  Vec grad = Vec::Constant(n, -1.0);

  auto in_up = [&](Eigen::Index i) { return y[i] == 1 ? alpha[i] < c : alpha[i] > 0.0; };
  auto in_low = [&](Eigen::Index i) { return y[i] == 1 ? alpha[i] > 0.0 : alpha[i] < c; };

  std::int64_t passes = 0;
  bool converged = false;
  while (passes < params.max_passes) {
    // maximal violating pair
    Eigen::Index i = -1, j = -1;
    double up_max = -std::numeric_limits<double>::infinity();
    double low_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > up_max) {
        up_max = v;
        i = t;
      }
      if (in_low(t) && v < low_min) {
        low_min = v;
        j = t;
      }
    }
    if (i < 0 || j < 0 || up_max - low_min <= params.kkt_tol) {
      converged = true;
      break;
    }

    // exact minimization along alpha_i += y_i t, alpha_j -= y_j t
    double quad = kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j);
    if (quad <= 1e-12) quad = 1e-12;
    double t = (up_max - low_min) / quad;

    double t_max = std::numeric_limits<double>::infinity();
    t_max = std::min(t_max, y[i] == 1 ? c - alpha[i] : alpha[i]);
    t_max = std::min(t_max, y[j] == 1 ? alpha[j] : c - alpha[j]);
    t = std::min(t, t_max);
    if (t <= 0.0) {  // numerically stuck pair; treat as converged at tolerance
      converged = true;
      break;
    }

    const double dai = y[i] * t;
    const double daj = -y[j] * t;
    alpha[i] += dai;
    alpha[j] += daj;
    // snap to the box so the index sets stay crisp
    for (Eigen::Index s : {i, j}) {
      if (alpha[s] < 1e-12) alpha[s] = 0.0;
      if (alpha[s] > c - 1e-12) alpha[s] = c;
    }
    grad += (y[i] * dai) * kernel.col(i).cwiseProduct(yd) +
            (y[j] * daj) * kernel.col(j).cwiseProduct(yd);
    ++passes;
  }

  BinarySolution sol;
  sol.alpha = alpha;
  sol.converged = converged;

  // f0_i = sum_j alpha_j y_j K_ij, recomputed directly for the bias and objective
  Vec ay(n);
  for (Eigen::Index t = 0; t < n; ++t) ay[t] = alpha[t] * y[t];
  const Vec f0 = kernel * ay;

  sol.objective = alpha.sum() - 0.5 * ay.dot(f0);

  double bias_acc = 0.0;
  int unbounded = 0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < n; ++t) {
    const double candidate = y[t] - f0[t];
    if (alpha[t] > 0.0 && alpha[t] < c) {
      bias_acc += candidate;
      ++unbounded;
    } else if (alpha[t] == 0.0) {
      if (y[t] == 1) lo = std::max(lo, candidate);
      else hi = std::min(hi, candidate);
    } else {  // at C
      if (y[t] == 1) hi = std::min(hi, candidate);
      else lo = std::max(lo, candidate);
    }
  }
  if (unbounded > 0) {
    sol.bias = bias_acc / unbounded;
  } else if (std::isfinite(lo) && std::isfinite(hi)) {
    sol.bias = 0.5 * (lo + hi);
  } else if (std::isfinite(lo)) {
    sol.bias = lo;
  } else if (std::isfinite(hi)) {
    sol.bias = hi;
  }

  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha[t] > 1e-12) sol.support.push_back(static_cast<int>(t));
  }
  return sol;
}

Vec decision_values(const Mat& cross_kernel, const Vec& alpha, const std::vector<int>& y,
                    double bias) {
  if (cross_kernel.cols() != alpha.size() ||
      alpha.size() != static_cast<Eigen::Index>(y.size())) {
    throw DomainError("decision_values: size mismatch");
  }
  Vec ay(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) ay[i] = alpha[i] * y[i];
  return (cross_kernel * ay).array() + bias;
}

Vec optimal_kernel_weights(const Vec& gamma, double p) {
  if (p <= 1.0) throw DomainError("p-norm MKL requires p > 1");
  const auto n = gamma.size();
  if (n < 1) throw DomainError("empty gamma");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (gamma[i] < 0.0) throw DomainError("gamma entries must be nonnegative");
  }
  if (gamma.maxCoeff() <= 0.0) throw TrainingError("all kernel margin terms are zero");

  Vec beta(n);
  double denom = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    beta[i] = std::pow(gamma[i], 2.0 / (p + 1.0));
    denom += std::pow(gamma[i], 2.0 * p / (p + 1.0));
  }
  beta /= std::pow(denom, 1.0 / p);
  return beta;
}

MklBinary mkl_train_binary(const std::vector<Mat>& kernels, const std::vector<int>& y,
                           const SvmParams& params, double p) {
  if (kernels.empty()) throw DomainError("no base kernels");
  const auto kn = static_cast<int>(kernels.size());
  for (const Mat& k : kernels) {
    if (k.rows() != kernels[0].rows() || k.cols() != kernels[0].cols()) {
      throw DomainError("base kernels are misaligned");
    }
  }

  MklBinary result;
  result.beta = Vec::Constant(kn, std::pow(static_cast<double>(kn), -1.0 / p));

  auto combine = [&](const Vec& beta) {
    Mat combined = beta[0] * kernels[0];
    for (int k = 1; k < kn; ++k) combined += beta[k] * kernels[k];
    return combined;
  };
  auto margin_terms = [&](const BinarySolution& sol) {
    Vec ay(sol.alpha.size());
    for (Eigen::Index i = 0; i < ay.size(); ++i) ay[i] = sol.alpha[i] * y[i];
    Vec gamma(kn);
    for (int k = 0; k < kn; ++k) gamma[k] = std::max(0.0, ay.dot(kernels[k] * ay));
    return gamma;
  };

  constexpr int kMaxRounds = 50;
  constexpr double kBetaTol = 1e-4;
  constexpr double kObjectiveSlack = 1e-8;

  result.svm = smo_solve(combine(result.beta), y, params);
  result.objective_history.push_back(result.svm.objective);
  result.rounds = 1;
  result.converged = false;

  for (int round = 1; round < kMaxRounds; ++round) {
    const Vec beta_new = optimal_kernel_weights(margin_terms(result.svm), p);
    if ((beta_new - result.beta).cwiseAbs().maxCoeff() < kBetaTol) {
      result.converged = true;
      break;
    }
    BinarySolution trial = smo_solve(combine(beta_new), y, params);
    // the closed-form update is not an exact descent step; a trial that
    // raises the combined dual objective ends the alternation at the
    // previous consistent pair
    if (trial.objective > result.objective_history.back() + kObjectiveSlack) {
      result.converged = true;
      break;
    }
    result.beta = beta_new;
    result.svm = std::move(trial);
    result.objective_history.push_back(result.svm.objective);
    result.rounds = round + 1;
  }
  return result;
}

MklModel train_multiclass(const std::vector<Mat>& kernels, const std::vector<int>& labels,
                          const std::vector<std::string>& class_names, const SvmParams& params,
                          double p) {
  const int n_classes = static_cast<int>(class_names.size());
  if (n_classes < 2) throw TrainingError("need at least 2 classes");
  std::vector<std::int64_t> counts(class_names.size(), 0);
  for (int l : labels) {
    if (l < 0 || l >= n_classes) throw DomainError("label out of range");
    ++counts[static_cast<std::size_t>(l)];
  }
  for (int c = 0; c < n_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] < 2) {
      throw TrainingError("class '" + class_names[static_cast<std::size_t>(c)] +
                          "' has fewer than 2 samples");
    }
  }

  MklModel model;
  model.p = p;
  model.class_labels = class_names;
  model.sample_labels = labels;
  model.per_class.reserve(class_names.size());
  for (int c = 0; c < n_classes; ++c) {
    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == c ? 1 : -1;
    MklBinary bin = mkl_train_binary(kernels, y, params, p);
    MklClassSolution cs;
    cs.alpha = std::move(bin.svm.alpha);
    cs.bias = bin.svm.bias;
    cs.beta = std::move(bin.beta);
    cs.objective = bin.svm.objective;
    cs.support = std::move(bin.svm.support);
    cs.converged = bin.converged && bin.svm.converged;
    model.per_class.push_back(std::move(cs));
  }
  return model;
}

std::vector<Prediction> predict_rows(const MklModel& model, const std::vector<Mat>& cross_kernels) {
  if (cross_kernels.empty()) throw DomainError("no cross kernels");
  const auto m = cross_kernels[0].rows();
  for (const Mat& k : cross_kernels) {
    if (k.rows() != m || k.cols() != model.samples()) {
      throw DomainError("cross kernel shape does not match the model");
    }
  }
  const int n_classes = model.classes();

  Mat decisions(m, n_classes);
  for (int c = 0; c < n_classes; ++c) {
    const auto& cs = model.per_class[static_cast<std::size_t>(c)];
    if (cs.beta.size() != static_cast<Eigen::Index>(cross_kernels.size())) {
      throw DomainError("cross kernel count does not match the model");
    }
    Vec ay(cs.alpha.size());
    for (Eigen::Index i = 0; i < ay.size(); ++i) {
      ay[i] = cs.alpha[i] * (model.sample_labels[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0);
    }
    Vec f = Vec::Zero(m);
    for (std::size_t k = 0; k < cross_kernels.size(); ++k) {
      f += cs.beta[static_cast<Eigen::Index>(k)] * (cross_kernels[k] * ay);
    }
    decisions.col(c) = f.array() + cs.bias;
  }

  std::vector<Prediction> out(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    int arg = 0;
    double best = decisions(i, 0);
    for (int c = 1; c < n_classes; ++c) {
      if (decisions(i, c) > best) {  // strict keeps the lowest index on ties
        best = decisions(i, c);
        arg = c;
      }
    }
    out[static_cast<std::size_t>(i)].class_id = arg;
    out[static_cast<std::size_t>(i)].decision_values = decisions.row(i).transpose();
  }
  return out;
}

GridSearchResult grid_search(const std::vector<Mat>& base_kernels, const std::vector<int>& labels,
                             int n_classes, const std::vector<double>& c_grid,
                             const std::vector<double>& gamma_scale_grid, int folds,
                             std::uint64_t seed, double p, const SvmParams& base_params) {
  if (folds < 2) throw DomainError("grid search needs at least 2 folds");
  if (c_grid.empty() || gamma_scale_grid.empty()) throw DomainError("empty parameter grid");

  const auto n = static_cast<Eigen::Index>(labels.size());

  // stratified fold assignment: shuffle within class, deal round-robin
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(n_classes));
  for (Eigen::Index i = 0; i < n; ++i) {
    by_class[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(
        static_cast<int>(i));
  }
  for (int c = 0; c < n_classes; ++c) {
    if (static_cast<int>(by_class[static_cast<std::size_t>(c)].size()) < folds) {
      throw StratificationError("class " + std::to_string(c) + " has fewer samples than folds");
    }
  }
  Rng rng(seed);
  std::vector<int> fold_of(static_cast<std::size_t>(n), 0);
  for (int c = 0; c < n_classes; ++c) {
    auto& idx = by_class[static_cast<std::size_t>(c)];
    rng.shuffle(idx);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      fold_of[static_cast<std::size_t>(idx[j])] = static_cast<int>(j % folds);
    }
  }

  std::vector<std::string> class_names;
  class_names.reserve(static_cast<std::size_t>(n_classes));
  for (int c = 0; c < n_classes; ++c) class_names.push_back(std::to_string(c));

  std::vector<double> c_sorted = c_grid;
  std::vector<double> g_sorted = gamma_scale_grid;
  std::sort(c_sorted.begin(), c_sorted.end());
  std::sort(g_sorted.begin(), g_sorted.end());

  GridSearchResult best;
  best.accuracy = -1.0;

  for (double cc : c_sorted) {
    for (double gg : g_sorted) {
      std::vector<Mat> scaled;
      scaled.reserve(base_kernels.size());
      for (const Mat& k : base_kernels) scaled.push_back(k.array().pow(gg).matrix());

      std::int64_t correct = 0, total = 0;
      for (int f = 0; f < folds; ++f) {
        std::vector<int> train_idx, test_idx;
        for (Eigen::Index i = 0; i < n; ++i) {
          (fold_of[static_cast<std::size_t>(i)] == f ? test_idx : train_idx)
              .push_back(static_cast<int>(i));
        }
        std::vector<int> train_labels;
        train_labels.reserve(train_idx.size());
        for (int i : train_idx) train_labels.push_back(labels[static_cast<std::size_t>(i)]);

        std::vector<Mat> sub, cross;
        for (const Mat& k : scaled) {
          Mat s(train_idx.size(), train_idx.size());
          for (std::size_t a = 0; a < train_idx.size(); ++a) {
            for (std::size_t b = 0; b < train_idx.size(); ++b) {
              s(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                  k(train_idx[a], train_idx[b]);
            }
          }
          sub.push_back(std::move(s));
          Mat x(test_idx.size(), train_idx.size());
          for (std::size_t a = 0; a < test_idx.size(); ++a) {
            for (std::size_t b = 0; b < train_idx.size(); ++b) {
              x(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                  k(test_idx[a], train_idx[b]);
            }
          }
          cross.push_back(std::move(x));
        }

        SvmParams params = base_params;
        params.c = cc;
        params.gamma_scale = gg;
        MklModel model = train_multiclass(sub, train_labels, class_names, params, p);
        const auto preds = predict_rows(model, cross);
        for (std::size_t t = 0; t < test_idx.size(); ++t) {
          if (preds[t].class_id == labels[static_cast<std::size_t>(test_idx[t])]) ++correct;
          ++total;
        }
      }
      const double acc = total > 0 ? static_cast<double>(correct) / total : 0.0;
      if (acc > best.accuracy) {  // strict '>' keeps the smaller C / gamma on ties
        best.accuracy = acc;
        best.params = base_params;
        best.params.c = cc;
        best.params.gamma_scale = gg;
      }
    }
  }
  return best;
}

}  // namespace foodrec
