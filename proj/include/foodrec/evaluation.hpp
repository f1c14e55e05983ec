#pragma once

#include <string>
#include <vector>

#include "foodrec/common.hpp"

namespace foodrec {

struct ConfusionMatrix {
  std::vector<std::string> row_labels;  // true test classes
  std::vector<std::string> col_labels;  // trained classes (may be a superset)
  Eigen::MatrixXi counts;

  int total() const { return counts.sum(); }
  /// Accuracy recomputed from the matrix: correct = counts(r, col(row_label)).
  double accuracy_pct() const;
};

struct GroupResult {
  std::string group_id;
  double accuracy_pct = 0.0;
  ConfusionMatrix confusion;
  int items = 0;
};

struct EvaluationReport {
  std::vector<GroupResult> groups;
  double overall_accuracy_pct = 0.0;  // unweighted mean over groups
  std::string config_snapshot;
};

struct LabeledPrediction {
  std::string true_label;
  std::string predicted_label;
};

/// Builds one group's confusion matrix and accuracy. Row space = sorted
/// distinct true labels; every true label must appear in col_labels.
GroupResult score_group(const std::string& group_id,
                        const std::vector<LabeledPrediction>& predictions,
                        const std::vector<std::string>& col_labels);

/// Assembles the report; overall accuracy is the unweighted group mean.
EvaluationReport make_report(std::vector<GroupResult> groups, std::string config_snapshot);

struct AblationReport {
  EvaluationReport restricted;    // per-restaurant label spaces
  EvaluationReport unrestricted;  // one model over the union of classes
  double delta_pct = 0.0;         // restricted minus unrestricted
  std::vector<std::uint64_t> feature_hashes;  // per test item, shared across conditions
};

AblationReport make_ablation_report(EvaluationReport restricted, EvaluationReport unrestricted,
                                    std::vector<std::uint64_t> feature_hashes);

// ---------------------------------------------------------------------------
// PFID protocol

struct PfidCategory {
  std::string id;
  // exactly 3 instances x 6 views
  std::vector<std::vector<std::string>> instances;
};

struct PfidItem {
  std::string image;
  int category = 0;
};

struct PfidSplit {
  std::vector<PfidItem> train;  // 12 images per category (two instances)
  std::vector<PfidItem> test;   // 6 images per category (the fold's instance)
};

/// Leave-one-instance-out fold: test = the 6 views of instance `fold`,
/// train = the 12 views of the other two instances, per category.
PfidSplit pfid_protocol_split(const std::vector<PfidCategory>& categories, int fold);

// ---------------------------------------------------------------------------
// Report output

std::string report_to_json(const EvaluationReport& report);
std::string report_to_text(const EvaluationReport& report);
std::string confusion_to_csv(const ConfusionMatrix& cm);
std::string ablation_to_json(const AblationReport& report);
std::string ablation_to_text(const AblationReport& report);

}  // namespace foodrec
