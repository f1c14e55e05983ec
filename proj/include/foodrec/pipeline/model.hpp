#pragma once

#include <filesystem>

#include "foodrec/descriptors.hpp"
#include "foodrec/kernels.hpp"
#include "foodrec/mkl.hpp"
#include "foodrec/pipeline/config.hpp"

namespace foodrec::pipeline {

/// Everything needed to classify against one restaurant's menu: codebooks,
/// bandwidths, training histograms, and the per-class MKL solutions.
struct RestaurantModel {
  std::string restaurant_id;
  std::uint64_t seed = 0;
  std::string config_snapshot;
  SvmParams svm;
  BowScaling bow_scaling = BowScaling::MaxNorm;
  double mkl_p = 2.0;

  std::array<Codebook, kChannelCount> codebooks;
  std::array<ChannelBandwidth, kChannelCount> bandwidth;
  std::array<Mat, kChannelCount> train_histograms;  // samples x k, values

  MklModel mkl;  // class_labels are menu slugs

  /// BoW histograms of one test image, per channel, from this model's
  /// codebooks.
  std::array<Vec, kChannelCount> quantize_bundle(const DescriptorBundle& bundle) const;

  /// Decision values against this model's classes for one quantized image.
  /// Cross kernels reuse the training-time bandwidths (times gamma_scale).
  Prediction predict_histograms(const std::array<Vec, kChannelCount>& histograms) const;
};

inline constexpr char kModelMagic[6] = {'C', 'T', 'X', 'M', 'K', 'L'};
inline constexpr std::uint32_t kModelVersion = 1;

void save_model(const std::filesystem::path& path, const RestaurantModel& model);
RestaurantModel load_model(const std::filesystem::path& path);

}  // namespace foodrec::pipeline
