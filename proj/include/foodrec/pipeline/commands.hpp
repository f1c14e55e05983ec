#pragma once

#include "foodrec/evaluation.hpp"
#include "foodrec/pipeline/stages.hpp"
#include "foodrec/pipeline/synth.hpp"

namespace foodrec::pipeline {

struct TrainSummary {
  std::vector<std::string> trained;                           // model ids written
  std::vector<std::pair<std::string, std::string>> failures;  // id -> diagnostic
};

/// Trains one restaurant (or every restaurant plus the `_union` fallback
/// model when `restaurant` is empty). With --all, failures are collected per
/// restaurant instead of aborting the run.
TrainSummary cmd_train(const RunConfig& config, const std::string& restaurant);

ClassifyRecord cmd_classify(const RunConfig& config, const std::filesystem::path& image,
                            const std::string& restaurant_override);

/// Wild protocol: per-restaurant accuracy over the labeled eval manifest,
/// written as JSON + text (+ per-group confusion CSVs) under out_dir.
EvaluationReport cmd_evaluate_wild(const RunConfig& config);

struct PfidMethodResult {
  std::string method;
  std::vector<double> fold_accuracy_pct;
  double mean_accuracy_pct = 0.0;
  SvmParams tuned;  // winning grid point of the last fold
};

struct PfidReport {
  int categories = 0;
  std::vector<PfidMethodResult> methods;  // six descriptors then MKL
  std::string config_snapshot;
};

/// Leave-one-instance-out harness over a PFID-structured directory
/// (<category>/<instance>/<6 images>): per-descriptor single-kernel SVM rows
/// plus the six-kernel MKL row, each grid-searched on the training split.
PfidReport cmd_evaluate_pfid(const RunConfig& config, const std::filesystem::path& pfid_root);

std::string pfid_report_to_json(const PfidReport& report);
std::string pfid_report_to_text(const PfidReport& report);

/// Location-prior ablation: per-restaurant models vs the union model on
/// identical test features (hash-checked); reports both accuracies and the
/// delta.
AblationReport cmd_ablate_location(const RunConfig& config);

/// CLI entry point; returns the process exit code.
int run(const std::vector<std::string>& args);

}  // namespace foodrec::pipeline
