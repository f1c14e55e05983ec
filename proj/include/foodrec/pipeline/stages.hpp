#pragma once

#include <map>
#include <optional>

#include "foodrec/context.hpp"
#include "foodrec/pipeline/model.hpp"
#include "foodrec/segmentation.hpp"

namespace foodrec::pipeline {

struct WorldPaths {
  std::filesystem::path root;

  std::filesystem::path restaurants_json() const { return root / "restaurants.json"; }
  std::filesystem::path menus_dir() const { return root / "menus"; }
  std::filesystem::path store_dir() const { return root / "store"; }
  std::filesystem::path test_dir() const { return root / "test"; }
  std::filesystem::path eval_manifest() const { return root / "eval_manifest.json"; }
};

/// Whole-image features for training images (no segmentation).
DescriptorBundle extract_training_features(const Raster& rgb, const DetectorParams& detector);

/// Test-image features: hierarchical segmentation, food-region selection,
/// mask crop, then detection restricted to the mask. Falls back to the whole
/// image when the crop is too small to detect on.
DescriptorBundle extract_test_features(const Raster& rgb, const DetectorParams& detector,
                                       const std::filesystem::path* dump_mask_beside = nullptr);

/// Per-image descriptor bundles, extracted once and shared across models.
class FeatureCache {
 public:
  explicit FeatureCache(DetectorParams detector) : detector_(detector) {}

  const DescriptorBundle& training(const std::filesystem::path& image);
  const DescriptorBundle& test(const std::filesystem::path& image, bool dump_mask = false);

 private:
  DetectorParams detector_;
  std::map<std::string, DescriptorBundle> cache_;
};

/// FNV-1a over all six channel matrices; identifies a bundle bit-exactly.
std::uint64_t bundle_hash(const DescriptorBundle& bundle);

struct TrainInput {
  std::vector<std::filesystem::path> images;
  std::vector<int> labels;
  std::vector<std::string> class_slugs;
};

TrainInput manifest_to_input(const TrainingManifest& manifest);

/// The full per-restaurant training pipeline: features, corpus subsampling,
/// six codebooks, BoW, chi-square kernels, one-vs-rest p-norm MKL. Stage
/// failures are rethrown as TrainingError naming the stage.
RestaurantModel train_model(const RunConfig& config, const std::string& model_id,
                            const TrainInput& input, FeatureCache& cache);

struct ClassifyRecord {
  std::string image;
  std::vector<std::string> matched_restaurants;
  std::vector<std::string> label_space;
  std::string predicted_slug;
  std::map<std::string, double> decision_values;
  bool low_confidence = false;
};

/// Classifies one pre-extracted bundle against a set of models; decision
/// values are merged over the union label space (max when a slug repeats).
ClassifyRecord classify_bundle(const DescriptorBundle& bundle,
                               const std::vector<const RestaurantModel*>& models,
                               const std::vector<std::string>& matched_ids, bool low_confidence);

std::string classify_record_to_json(const ClassifyRecord& record);

}  // namespace foodrec::pipeline
