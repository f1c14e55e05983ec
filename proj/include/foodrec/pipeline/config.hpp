#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "foodrec/codebook.hpp"
#include "foodrec/interest.hpp"
#include "foodrec/mkl.hpp"

namespace foodrec::pipeline {

struct RunConfig {
  DetectorParams detector;
  int codebook_k = 200;            // full-scale runs use 1000
  BowScaling bow_scaling = BowScaling::MaxNorm;
  std::int64_t point_budget = 20000;  // full-scale runs use 100000
  int images_per_item = 12;        // full-scale runs use 50
  SvmParams svm;
  double mkl_p = 2.0;
  double radius_m = 75.0;
  std::uint64_t seed = 1;
  std::vector<double> grid_c = {0.25, 1.0, 4.0, 16.0, 64.0};
  std::vector<double> grid_gamma_scale = {0.25, 0.5, 1.0, 2.0, 4.0};
  int grid_folds = 3;
  bool train_union = true;  // `train --all` also fits the union fallback model

  std::filesystem::path world_dir;   // fixtures root: restaurants.json, menus/, store/, test/
  std::filesystem::path models_dir;  // where .ctxmkl files live
  std::filesystem::path out_dir;     // report output
  bool dump_masks = false;

  /// Canonical key=value text, embedded into models and reports.
  std::string snapshot() const;
};

/// Parses a key=value config file (# comments, blank lines ignored).
/// Unknown keys are an error.
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

/// Applies one key=value override; same keys as the config file.
void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value);

}  // namespace foodrec::pipeline
