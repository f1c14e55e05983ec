#include "foodrec/pipeline/stages.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

namespace foodrec::pipeline {

using nlohmann::json;

DescriptorBundle extract_training_features(const Raster& rgb, const DetectorParams& detector) {
  const Raster gray = to_gray(rgb);
  const auto keypoints = detect_harris_laplace(gray, detector);
  return describe_all(rgb, keypoints);
}

DescriptorBundle extract_test_features(const Raster& rgb, const DetectorParams& detector,
                                       const std::filesystem::path* dump_mask_beside) {
  Raster target = rgb;
  std::optional<MaskedImage> masked;
  try {
    const SegmentHierarchy hierarchy = hierarchical_segment(rgb);
    const FoodRegion region = select_food_region(hierarchy);
    if (dump_mask_beside) {
      std::filesystem::path mask_path = *dump_mask_beside;
      mask_path += ".mask.png";
      save_mask_png(mask_path, region.mask, rgb.width(), rgb.height());
    }
    MaskedImage m = apply_mask(rgb, region.mask);
    if (std::min(m.image.width(), m.image.height()) >= 16) {
      masked = std::move(m);
      target = masked->image;
    }
  } catch (const DomainError&) {
    // image too small to segment; use it whole
  }

  const Raster gray = to_gray(target);
  auto keypoints = detect_harris_laplace(gray, detector);
  if (masked) keypoints = filter_keypoints_by_mask(keypoints, *masked);
  return describe_all(target, keypoints);
}

const DescriptorBundle& FeatureCache::training(const std::filesystem::path& image) {
  const std::string key = "train:" + image.string();
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const Raster rgb = load_image(image);
  return cache_.emplace(key, extract_training_features(rgb, detector_)).first->second;
}

const DescriptorBundle& FeatureCache::test(const std::filesystem::path& image, bool dump_mask) {
  const std::string key = "test:" + image.string();
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const Raster rgb = load_image(image);
  return cache_
      .emplace(key, extract_test_features(rgb, detector_, dump_mask ? &image : nullptr))
      .first->second;
}

std::uint64_t bundle_hash(const DescriptorBundle& bundle) {
  std::uint64_t h = 1469598103934665603ull;
  for (const Mat& m : bundle.rows) {
    h = fnv1a(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()), h);
  }
  return h;
}

TrainInput manifest_to_input(const TrainingManifest& manifest) {
  TrainInput input;
  for (const auto& entry : manifest.entries) {
    const int label = static_cast<int>(input.class_slugs.size());
    input.class_slugs.push_back(entry.slug);
    for (const auto& path : entry.images) {
      input.images.push_back(path);
      input.labels.push_back(label);
    }
  }
  return input;
}

namespace {

template <class Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw TrainingError(std::string("stage ") + name + ": " + e.what());
  }
}

}  // namespace

RestaurantModel train_model(const RunConfig& config, const std::string& model_id,
                            const TrainInput& input, FeatureCache& cache) {
  if (input.images.empty()) throw TrainingError("stage assemble_training_set: no images");

  // feature extraction over all training images
  std::vector<const DescriptorBundle*> bundles = stage("extract_features", [&] {
    std::vector<const DescriptorBundle*> out;
    out.reserve(input.images.size());
    for (const auto& path : input.images) out.push_back(&cache.training(path));
    return out;
  });

  // corpus subsampling for codebook fitting
  std::vector<CorpusPointRef> refs = stage("sample_corpus_points", [&] {
    std::vector<std::vector<Keypoint>> per_image;
    per_image.reserve(bundles.size());
    for (const auto* b : bundles) per_image.push_back(b->keypoints);
    return sample_corpus_points(per_image, PointBudget{config.point_budget}, config.seed);
  });

  RestaurantModel model;
  model.restaurant_id = model_id;
  model.seed = config.seed;
  model.config_snapshot = config.snapshot();
  model.svm = config.svm;
  model.bow_scaling = config.bow_scaling;
  model.mkl_p = config.mkl_p;

  std::array<Mat, kChannelCount> histograms;
  stage("fit_codebooks", [&] {
    for (int c = 0; c < kChannelCount; ++c) {
      const Channel channel = kAllChannels[static_cast<std::size_t>(c)];
      Mat corpus(static_cast<Eigen::Index>(refs.size()), channel_dim(channel));
      for (std::size_t i = 0; i < refs.size(); ++i) {
        corpus.row(static_cast<Eigen::Index>(i)) =
            bundles[static_cast<std::size_t>(refs[i].image)]->rows[c].row(refs[i].point);
      }
      const int k = std::min<int>(config.codebook_k,
                                  count_distinct_rows(corpus, config.codebook_k));
      if (k < 2) {
        throw FitError("channel " + std::string(channel_name(channel)) +
                       " has fewer than 2 distinct descriptors");
      }
      model.codebooks[c] =
          kmeans_fit(corpus, k, config.seed + static_cast<std::uint64_t>(c), channel);
    }
    return 0;
  });

  stage("quantize", [&] {
    for (int c = 0; c < kChannelCount; ++c) {
      Mat h(static_cast<Eigen::Index>(bundles.size()), model.codebooks[c].k);
      for (std::size_t i = 0; i < bundles.size(); ++i) {
        h.row(static_cast<Eigen::Index>(i)) =
            quantize(model.codebooks[c], bundles[i]->rows[c], config.bow_scaling)
                .values.transpose();
      }
      histograms[c] = std::move(h);
    }
    return 0;
  });

  std::vector<Mat> kernels(kChannelCount);
  stage("build_kernels", [&] {
    for (int c = 0; c < kChannelCount; ++c) {
      model.bandwidth[c] = mean_pairwise_distance(histograms[c]);
      const double effective_a = model.bandwidth[c].a / config.svm.gamma_scale;
      kernels[static_cast<std::size_t>(c)] = kernel_matrix_symmetric(histograms[c], effective_a);
      model.train_histograms[c] = histograms[c];
    }
    return 0;
  });

  stage("train_multiclass", [&] {
    model.mkl =
        train_multiclass(kernels, input.labels, input.class_slugs, config.svm, config.mkl_p);
    return 0;
  });
  return model;
}

ClassifyRecord classify_bundle(const DescriptorBundle& bundle,
                               const std::vector<const RestaurantModel*>& models,
                               const std::vector<std::string>& matched_ids, bool low_confidence) {
  if (models.empty()) throw PredictionError("no models to classify against");

  ClassifyRecord record;
  record.matched_restaurants = matched_ids;
  record.low_confidence = low_confidence;

  for (const RestaurantModel* model : models) {
    const auto histograms = model->quantize_bundle(bundle);
    const Prediction pred = model->predict_histograms(histograms);
    for (int c = 0; c < model->mkl.classes(); ++c) {
      const std::string& slug = model->mkl.class_labels[static_cast<std::size_t>(c)];
      const double value = pred.decision_values[c];
      auto it = record.decision_values.find(slug);
      if (it == record.decision_values.end()) {
        record.decision_values[slug] = value;
        record.label_space.push_back(slug);
      } else {
        it->second = std::max(it->second, value);
      }
    }
  }
  std::sort(record.label_space.begin(), record.label_space.end());

  // argmax over the union label space; ties resolve to the smaller slug
  const std::string* best = nullptr;
  double best_value = 0.0;
  for (const std::string& slug : record.label_space) {
    const double v = record.decision_values.at(slug);
    if (!best || v > best_value) {
      best = &slug;
      best_value = v;
    }
  }
  record.predicted_slug = *best;
  return record;
}

std::string classify_record_to_json(const ClassifyRecord& record) {
  json j;
  j["image"] = record.image;
  j["matched_restaurants"] = record.matched_restaurants;
  j["label_space"] = record.label_space;
  j["predicted_slug"] = record.predicted_slug;
  j["decision_values"] = record.decision_values;
  j["low_confidence"] = record.low_confidence;
  return j.dump(2);
}

}  // namespace foodrec::pipeline
