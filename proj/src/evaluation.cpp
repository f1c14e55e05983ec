#include "foodrec/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace foodrec {

using nlohmann::json;

double ConfusionMatrix::accuracy_pct() const {
  std::map<std::string, int> col_of;
  for (std::size_t c = 0; c < col_labels.size(); ++c) {
    col_of[col_labels[c]] = static_cast<int>(c);
  }
  int correct = 0;
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    auto it = col_of.find(row_labels[r]);
    if (it == col_of.end()) continue;
    correct += counts(static_cast<Eigen::Index>(r), it->second);
  }
  const int n = total();
  return n > 0 ? 100.0 * correct / n : 0.0;
}

GroupResult score_group(const std::string& group_id,
                        const std::vector<LabeledPrediction>& predictions,
                        const std::vector<std::string>& col_labels) {
  std::map<std::string, int> col_of;
  for (std::size_t c = 0; c < col_labels.size(); ++c) {
    col_of[col_labels[c]] = static_cast<int>(c);
  }

  std::set<std::string> trues;
  for (const auto& p : predictions) {
    if (!col_of.count(p.true_label)) {
      throw DomainError("unknown true label '" + p.true_label + "' in group " + group_id);
    }
    if (!col_of.count(p.predicted_label)) {
      throw DomainError("prediction '" + p.predicted_label + "' outside the trained label space");
    }
    trues.insert(p.true_label);
  }

  GroupResult g;
  g.group_id = group_id;
  g.items = static_cast<int>(predictions.size());
  g.confusion.row_labels.assign(trues.begin(), trues.end());
  g.confusion.col_labels = col_labels;
  g.confusion.counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(trues.size()),
                                             static_cast<Eigen::Index>(col_labels.size()));
  std::map<std::string, int> row_of;
  for (std::size_t r = 0; r < g.confusion.row_labels.size(); ++r) {
    row_of[g.confusion.row_labels[r]] = static_cast<int>(r);
  }
  int correct = 0;
  for (const auto& p : predictions) {
    g.confusion.counts(row_of.at(p.true_label), col_of.at(p.predicted_label)) += 1;
    if (p.true_label == p.predicted_label) ++correct;
  }
  g.accuracy_pct = predictions.empty() ? 0.0 : 100.0 * correct / predictions.size();
  return g;
}

EvaluationReport make_report(std::vector<GroupResult> groups, std::string config_snapshot) {
  EvaluationReport rep;
  rep.groups = std::move(groups);
  rep.config_snapshot = std::move(config_snapshot);
  if (!rep.groups.empty()) {
    double acc = 0.0;
    for (const auto& g : rep.groups) acc += g.accuracy_pct;
    rep.overall_accuracy_pct = acc / static_cast<double>(rep.groups.size());
  }
  return rep;
}

AblationReport make_ablation_report(EvaluationReport restricted, EvaluationReport unrestricted,
                                    std::vector<std::uint64_t> feature_hashes) {
  AblationReport rep;
  rep.restricted = std::move(restricted);
  rep.unrestricted = std::move(unrestricted);
  rep.delta_pct = rep.restricted.overall_accuracy_pct - rep.unrestricted.overall_accuracy_pct;
  rep.feature_hashes = std::move(feature_hashes);
  return rep;
}

PfidSplit pfid_protocol_split(const std::vector<PfidCategory>& categories, int fold) {
  if (fold < 0 || fold > 2) throw DomainError("PFID fold must be 0, 1 or 2");
  if (categories.empty()) throw ProtocolError("no PFID categories");
  PfidSplit split;
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const auto& cat = categories[c];
    if (cat.instances.size() != 3) {
      throw ProtocolError("category '" + cat.id + "' must have exactly 3 instances");
    }
    for (const auto& inst : cat.instances) {
      if (inst.size() != 6) {
        throw ProtocolError("category '" + cat.id + "' must have 6 views per instance");
      }
    }
    for (int i = 0; i < 3; ++i) {
      for (const std::string& img : cat.instances[static_cast<std::size_t>(i)]) {
        (i == fold ? split.test : split.train).push_back({img, static_cast<int>(c)});
      }
    }
  }
  return split;
}

// ---------------------------------------------------------------------------
// Output formats

namespace {

json group_to_json(const GroupResult& g) {
  json cm;
  cm["rows"] = g.confusion.row_labels;
  cm["cols"] = g.confusion.col_labels;
  std::vector<std::vector<int>> counts;
  for (Eigen::Index r = 0; r < g.confusion.counts.rows(); ++r) {
    std::vector<int> row;
    for (Eigen::Index c = 0; c < g.confusion.counts.cols(); ++c) {
      row.push_back(g.confusion.counts(r, c));
    }
    counts.push_back(std::move(row));
  }
  cm["counts"] = counts;
  return json{{"group", g.group_id},
              {"accuracy_pct", g.accuracy_pct},
              {"items", g.items},
              {"confusion", cm}};
}

json report_json(const EvaluationReport& rep) {
  json groups = json::array();
  for (const auto& g : rep.groups) groups.push_back(group_to_json(g));
  return json{{"overall_accuracy_pct", rep.overall_accuracy_pct},
              {"groups", groups},
              {"config", rep.config_snapshot}};
}

}  // namespace

std::string report_to_json(const EvaluationReport& report) { return report_json(report).dump(2); }

std::string report_to_text(const EvaluationReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  std::size_t width = 8;
  for (const auto& g : report.groups) width = std::max(width, g.group_id.size());
  out << std::left << std::setw(static_cast<int>(width + 2)) << "group"
      << std::right << std::setw(10) << "items" << std::setw(12) << "accuracy%" << "\n";
  for (const auto& g : report.groups) {
    out << std::left << std::setw(static_cast<int>(width + 2)) << g.group_id
        << std::right << std::setw(10) << g.items << std::setw(12) << g.accuracy_pct << "\n";
  }
  out << std::left << std::setw(static_cast<int>(width + 2)) << "overall"
      << std::right << std::setw(10) << "" << std::setw(12) << report.overall_accuracy_pct << "\n";
  return out.str();
}

std::string confusion_to_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "true\\predicted";
  for (const auto& c : cm.col_labels) out << "," << c;
  out << "\n";
  for (std::size_t r = 0; r < cm.row_labels.size(); ++r) {
    out << cm.row_labels[r];
    for (Eigen::Index c = 0; c < cm.counts.cols(); ++c) {
      out << "," << cm.counts(static_cast<Eigen::Index>(r), c);
    }
    out << "\n";
  }
  return out.str();
}

std::string ablation_to_json(const AblationReport& report) {
  json j;
  j["restricted"] = report_json(report.restricted);
  j["unrestricted"] = report_json(report.unrestricted);
  j["delta_pct"] = report.delta_pct;
  std::vector<std::string> hashes;
  hashes.reserve(report.feature_hashes.size());
  for (std::uint64_t h : report.feature_hashes) {
    std::ostringstream hex;
    hex << std::hex << h;
    hashes.push_back(hex.str());
  }
  j["feature_hashes"] = hashes;
  return j.dump(2);
}

std::string ablation_to_text(const AblationReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "condition A (restricted, per-restaurant label spaces)\n"
      << report_to_text(report.restricted) << "\n"
      << "condition B (unrestricted, union label space)\n"
      << report_to_text(report.unrestricted) << "\n"
      << "delta (restricted - unrestricted): " << report.delta_pct << " points\n";
  return out.str();
}

}  // namespace foodrec
