#include "foodrec/pipeline/config.hpp"

#include <fstream>
#include <sstream>

namespace foodrec::pipeline {

namespace {

std::string join_doubles(const std::vector<double>& v) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out << ",";
    out << v[i];
  }
  return out.str();
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  if (out.empty()) throw SchemaError("empty numeric list in config");
  return out;
}

}  // namespace

std::string RunConfig::snapshot() const {
  std::ostringstream out;
  out.precision(17);
  out << "detector.sigma0=" << detector.sigma0 << "\n";
  out << "detector.scale_factor=" << detector.scale_factor << "\n";
  out << "detector.levels=" << detector.levels << "\n";
  out << "detector.integration_ratio=" << detector.integration_ratio << "\n";
  out << "detector.kappa=" << detector.harris_kappa << "\n";
  out << "detector.threshold=" << detector.response_threshold << "\n";
  out << "detector.max_points=" << detector.max_points << "\n";
  out << "codebook.k=" << codebook_k << "\n";
  out << "codebook.scaling=" << (bow_scaling == BowScaling::MaxNorm ? "max" : "l1") << "\n";
  out << "budget.points=" << point_budget << "\n";
  out << "training.images_per_item=" << images_per_item << "\n";
  out << "training.union=" << (train_union ? 1 : 0) << "\n";
  out << "svm.c=" << svm.c << "\n";
  out << "svm.kkt_tol=" << svm.kkt_tol << "\n";
  out << "svm.max_passes=" << svm.max_passes << "\n";
  out << "svm.gamma_scale=" << svm.gamma_scale << "\n";
  out << "mkl.p=" << mkl_p << "\n";
  out << "context.radius_m=" << radius_m << "\n";
  out << "seed=" << seed << "\n";
  out << "grid.c=" << join_doubles(grid_c) << "\n";
  out << "grid.gamma_scale=" << join_doubles(grid_gamma_scale) << "\n";
  out << "grid.folds=" << grid_folds << "\n";
  // fixed color-transform constants, recorded for reproducibility
  out << "# imaging.opponent_extreme_o1=0.70710678118654752\n";
  out << "# imaging.opponent_extreme_o2=0.81649658092772603\n";
  out << "# imaging.o3_divisor=1.7320508075688772\n";
  out << "# imaging.c_invariant_eps=1e-06\n";
  out << "# imaging.c_invariant_clamp_band=3\n";
  return out.str();
}

void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value) {
  try {
    if (key == "detector.sigma0") config.detector.sigma0 = std::stod(value);
    else if (key == "detector.scale_factor") config.detector.scale_factor = std::stod(value);
    else if (key == "detector.levels") config.detector.levels = std::stoi(value);
    else if (key == "detector.integration_ratio") config.detector.integration_ratio = std::stod(value);
    else if (key == "detector.kappa") config.detector.harris_kappa = std::stod(value);
    else if (key == "detector.threshold") config.detector.response_threshold = std::stod(value);
    else if (key == "detector.max_points") config.detector.max_points = std::stoi(value);
    else if (key == "codebook.k") config.codebook_k = std::stoi(value);
    else if (key == "codebook.scaling") {
      if (value == "max") config.bow_scaling = BowScaling::MaxNorm;
      else if (value == "l1") config.bow_scaling = BowScaling::L1Norm;
      else throw SchemaError("codebook.scaling must be 'max' or 'l1'");
    }
    else if (key == "budget.points") config.point_budget = std::stoll(value);
    else if (key == "training.images_per_item") config.images_per_item = std::stoi(value);
    else if (key == "training.union") config.train_union = std::stoi(value) != 0;
    else if (key == "svm.c") config.svm.c = std::stod(value);
    else if (key == "svm.kkt_tol") config.svm.kkt_tol = std::stod(value);
    else if (key == "svm.max_passes") config.svm.max_passes = std::stoll(value);
    else if (key == "svm.gamma_scale") config.svm.gamma_scale = std::stod(value);
    else if (key == "mkl.p") config.mkl_p = std::stod(value);
    else if (key == "context.radius_m") config.radius_m = std::stod(value);
    else if (key == "seed") config.seed = std::stoull(value);
    else if (key == "grid.c") config.grid_c = parse_doubles(value);
    else if (key == "grid.gamma_scale") config.grid_gamma_scale = parse_doubles(value);
    else if (key == "grid.folds") config.grid_folds = std::stoi(value);
    else throw SchemaError("unknown config key '" + key + "'");
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw SchemaError("bad value '" + value + "' for config key '" + key + "'");
  }
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    apply_config_entry(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

}  // namespace foodrec::pipeline
