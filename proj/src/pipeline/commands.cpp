#include "foodrec/pipeline/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

namespace foodrec::pipeline {

using nlohmann::json;

namespace {

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

std::filesystem::path model_path(const RunConfig& config, const std::string& id) {
  return config.models_dir / (id + ".ctxmkl");
}

RestaurantModel load_model_or_fail(const RunConfig& config, const std::string& id) {
  const auto path = model_path(config, id);
  if (!std::filesystem::exists(path)) {
    throw PredictionError("no trained model '" + id + "' at " + path.string() +
                          "; run `foodrec train` first");
  }
  return load_model(path);
}

struct EvalManifest {
  struct Item {
    std::filesystem::path image;  // absolute
    std::string label;
  };
  struct Group {
    std::string id;
    std::vector<Item> items;
  };
  std::vector<Group> groups;
};

EvalManifest load_eval_manifest(const WorldPaths& world) {
  const auto path = world.eval_manifest();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open eval manifest " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  if (!j.contains("groups") || !j["groups"].is_array()) {
    throw SchemaError(path.string() + ": field 'groups' missing");
  }
  EvalManifest manifest;
  for (const json& g : j["groups"]) {
    EvalManifest::Group group;
    if (!g.contains("id") || !g["id"].is_string() || !g.contains("items") ||
        !g["items"].is_array()) {
      throw SchemaError(path.string() + ": each group needs 'id' and 'items'");
    }
    group.id = g["id"].get<std::string>();
    for (const json& it : g["items"]) {
      if (!it.contains("image") || !it.contains("label")) {
        throw SchemaError(path.string() + ": each item needs 'image' and 'label'");
      }
      EvalManifest::Item item;
      item.image = world.root / it["image"].get<std::string>();
      item.label = it["label"].get<std::string>();
      if (!std::filesystem::exists(item.image)) {
        throw SchemaError("test image missing: " + item.image.string());
      }
      group.items.push_back(std::move(item));
    }
    manifest.groups.push_back(std::move(group));
  }
  if (manifest.groups.empty()) throw SchemaError(path.string() + ": no groups");
  return manifest;
}

}  // namespace

// ---------------------------------------------------------------------------
// train

TrainSummary cmd_train(const RunConfig& config, const std::string& restaurant) {
  const WorldPaths world{config.world_dir};
  const auto db = load_restaurant_db(world.restaurants_json());
  const FileMenuProvider provider(world.menus_dir());
  std::filesystem::create_directories(config.models_dir);

  std::vector<Restaurant> targets;
  const bool all = restaurant.empty();
  if (all) {
    targets = db;
  } else {
    auto it = std::find_if(db.begin(), db.end(),
                           [&](const Restaurant& r) { return r.id == restaurant; });
    if (it == db.end()) throw NotFoundError("unknown restaurant id '" + restaurant + "'");
    targets.push_back(*it);
  }

  TrainSummary summary;
  FeatureCache cache(config.detector);
  std::vector<TrainInput> inputs;  // kept for the union model

  for (const Restaurant& r : targets) {
    try {
      const Menu menu = fetch_menu(r, provider);
      if (!menu.trainable()) {
        throw TrainingError("stage fetch_menu: menu for " + r.id + " has no items");
      }
      TrainingManifest manifest;
      try {
        manifest = assemble_training_set(menu, world.store_dir(), config.images_per_item);
      } catch (const Error& e) {
        throw TrainingError(std::string("stage assemble_training_set: ") + e.what());
      }
      for (const auto& warning : manifest.warnings) {
        std::cerr << "[train " << r.id << "] warning: " << warning << "\n";
      }
      const TrainInput input = manifest_to_input(manifest);
      RestaurantModel model = train_model(config, r.id, input, cache);
      save_model(model_path(config, r.id), model);
      summary.trained.push_back(r.id);
      inputs.push_back(input);
    } catch (const Error& e) {
      if (!all) throw;
      summary.failures.push_back({r.id, e.what()});
      std::cerr << "[train " << r.id << "] failed: " << e.what() << "\n";
    }
  }

  if (all && config.train_union && summary.failures.empty()) {
    TrainInput union_input;
    for (const auto& input : inputs) {
      const int offset = static_cast<int>(union_input.class_slugs.size());
      union_input.class_slugs.insert(union_input.class_slugs.end(), input.class_slugs.begin(),
                                     input.class_slugs.end());
      union_input.images.insert(union_input.images.end(), input.images.begin(),
                                input.images.end());
      for (int l : input.labels) union_input.labels.push_back(l + offset);
    }
    try {
      RestaurantModel model = train_model(config, "_union", union_input, cache);
      save_model(model_path(config, "_union"), model);
      summary.trained.push_back("_union");
    } catch (const Error& e) {
      summary.failures.push_back({"_union", e.what()});
      std::cerr << "[train _union] failed: " << e.what() << "\n";
    }
  }
  return summary;
}

// ---------------------------------------------------------------------------
// classify

ClassifyRecord cmd_classify(const RunConfig& config, const std::filesystem::path& image,
                            const std::string& restaurant_override) {
  const WorldPaths world{config.world_dir};
  const auto db = load_restaurant_db(world.restaurants_json());

  std::vector<std::string> matched_ids;
  bool low_confidence = false;

  if (!restaurant_override.empty()) {
    auto it = std::find_if(db.begin(), db.end(),
                           [&](const Restaurant& r) { return r.id == restaurant_override; });
    if (it == db.end()) throw NotFoundError("unknown restaurant id '" + restaurant_override + "'");
    matched_ids.push_back(it->id);
  } else {
    const auto geo = extract_geotag(image);
    if (!geo) {
      throw DomainError("image " + image.string() +
                        " has no geotag; pass --restaurant to override");
    }
    for (const Restaurant& r : match_restaurants(*geo, db, config.radius_m)) {
      matched_ids.push_back(r.id);
    }
    if (matched_ids.empty()) low_confidence = true;  // fall back to the union model
  }

  std::vector<RestaurantModel> models;
  if (matched_ids.empty()) {
    models.push_back(load_model_or_fail(config, "_union"));
  } else {
    models.reserve(matched_ids.size());
    for (const auto& id : matched_ids) models.push_back(load_model_or_fail(config, id));
  }
  std::vector<const RestaurantModel*> model_ptrs;
  model_ptrs.reserve(models.size());
  for (const auto& m : models) model_ptrs.push_back(&m);

  const Raster rgb = load_image(image);
  std::filesystem::path dump_beside = image;
  const DescriptorBundle bundle =
      extract_test_features(rgb, config.detector, config.dump_masks ? &dump_beside : nullptr);

  ClassifyRecord record = classify_bundle(bundle, model_ptrs, matched_ids, low_confidence);
  record.image = image.string();
  return record;
}

// ---------------------------------------------------------------------------
// evaluate (wild)

EvaluationReport cmd_evaluate_wild(const RunConfig& config) {
  const WorldPaths world{config.world_dir};
  const EvalManifest manifest = load_eval_manifest(world);

  FeatureCache cache(config.detector);
  std::vector<GroupResult> groups;
  for (const auto& group : manifest.groups) {
    const RestaurantModel model = load_model_or_fail(config, group.id);
    std::vector<LabeledPrediction> preds;
    preds.reserve(group.items.size());
    for (const auto& item : group.items) {
      const DescriptorBundle& bundle = cache.test(item.image, config.dump_masks);
      const Prediction p = model.predict_histograms(model.quantize_bundle(bundle));
      preds.push_back({item.label, model.mkl.class_labels[static_cast<std::size_t>(p.class_id)]});
    }
    groups.push_back(score_group(group.id, preds, model.mkl.class_labels));
  }
  EvaluationReport report = make_report(std::move(groups), config.snapshot());

  if (!config.out_dir.empty()) {
    write_text_file(config.out_dir / "wild_report.json", report_to_json(report));
    write_text_file(config.out_dir / "wild_report.txt", report_to_text(report));
    for (const auto& g : report.groups) {
      write_text_file(config.out_dir / ("confusion_" + g.group_id + ".csv"),
                      confusion_to_csv(g.confusion));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// evaluate (pfid)

namespace {

std::vector<PfidCategory> load_pfid_layout(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) {
    throw SchemaError("PFID directory missing: " + root.string());
  }
  std::vector<PfidCategory> categories;
  std::vector<std::filesystem::path> cat_dirs;
  for (const auto& e : std::filesystem::directory_iterator(root)) {
    if (e.is_directory()) cat_dirs.push_back(e.path());
  }
  std::sort(cat_dirs.begin(), cat_dirs.end());
  for (const auto& cat_dir : cat_dirs) {
    PfidCategory cat;
    cat.id = cat_dir.filename().string();
    std::vector<std::filesystem::path> inst_dirs;
    for (const auto& e : std::filesystem::directory_iterator(cat_dir)) {
      if (e.is_directory()) inst_dirs.push_back(e.path());
    }
    std::sort(inst_dirs.begin(), inst_dirs.end());
    if (inst_dirs.size() != 3) {
      throw ProtocolError("PFID category " + cat.id + " must have exactly 3 instance directories");
    }
    for (const auto& inst_dir : inst_dirs) {
      std::vector<std::string> views;
      std::vector<std::filesystem::path> files;
      for (const auto& e : std::filesystem::directory_iterator(inst_dir)) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) views.push_back(f.string());
      if (views.size() != 6) {
        throw ProtocolError("PFID instance " + inst_dir.string() + " must have exactly 6 images");
      }
      cat.instances.push_back(std::move(views));
    }
    categories.push_back(std::move(cat));
  }
  if (categories.empty()) throw ProtocolError("no PFID categories under " + root.string());
  return categories;
}

}  // namespace

PfidReport cmd_evaluate_pfid(const RunConfig& config, const std::filesystem::path& pfid_root) {
  const auto categories = load_pfid_layout(pfid_root);
  const int n_cats = static_cast<int>(categories.size());

  std::vector<std::string> cat_names;
  cat_names.reserve(categories.size());
  for (const auto& c : categories) cat_names.push_back(c.id);

  PfidReport report;
  report.categories = n_cats;
  report.config_snapshot = config.snapshot();
  for (Channel c : kAllChannels) report.methods.push_back({channel_name(c), {}, 0.0, config.svm});
  report.methods.push_back({"MKL", {}, 0.0, config.svm});

  FeatureCache cache(config.detector);

  for (int fold = 0; fold < 3; ++fold) {
    const PfidSplit split = pfid_protocol_split(categories, fold);

    std::vector<const DescriptorBundle*> train_bundles, test_bundles;
    std::vector<int> train_labels, test_labels;
    for (const auto& item : split.train) {
      train_bundles.push_back(&cache.training(item.image));
      train_labels.push_back(item.category);
    }
    for (const auto& item : split.test) {
      test_bundles.push_back(&cache.training(item.image));
      test_labels.push_back(item.category);
    }

    // codebooks from the training split only
    std::vector<std::vector<Keypoint>> per_image;
    per_image.reserve(train_bundles.size());
    for (const auto* b : train_bundles) per_image.push_back(b->keypoints);
    const auto refs = sample_corpus_points(per_image, PointBudget{config.point_budget},
                                           config.seed + static_cast<std::uint64_t>(fold));

    std::vector<Mat> base_train(kChannelCount), base_cross(kChannelCount);
    for (int c = 0; c < kChannelCount; ++c) {
      const Channel channel = kAllChannels[static_cast<std::size_t>(c)];
      Mat corpus(static_cast<Eigen::Index>(refs.size()), channel_dim(channel));
      for (std::size_t i = 0; i < refs.size(); ++i) {
        corpus.row(static_cast<Eigen::Index>(i)) =
            train_bundles[static_cast<std::size_t>(refs[i].image)]->rows[c].row(refs[i].point);
      }
      const int k =
          std::min<int>(config.codebook_k, count_distinct_rows(corpus, config.codebook_k));
      if (k < 2) throw FitError("PFID: too few distinct descriptors in channel " +
                                std::string(channel_name(channel)));
      const Codebook cb = kmeans_fit(corpus, k, config.seed + static_cast<std::uint64_t>(c), channel);

      Mat train_h(static_cast<Eigen::Index>(train_bundles.size()), cb.k);
      for (std::size_t i = 0; i < train_bundles.size(); ++i) {
        train_h.row(static_cast<Eigen::Index>(i)) =
            quantize(cb, train_bundles[i]->rows[c], config.bow_scaling).values.transpose();
      }
      Mat test_h(static_cast<Eigen::Index>(test_bundles.size()), cb.k);
      for (std::size_t i = 0; i < test_bundles.size(); ++i) {
        test_h.row(static_cast<Eigen::Index>(i)) =
            quantize(cb, test_bundles[i]->rows[c], config.bow_scaling).values.transpose();
      }
      const ChannelBandwidth bw = mean_pairwise_distance(train_h);
      base_train[static_cast<std::size_t>(c)] = kernel_matrix_symmetric(train_h, bw.a);
      base_cross[static_cast<std::size_t>(c)] = kernel_matrix(test_h, train_h, bw.a);
    }

    auto run_method = [&](std::vector<Mat> kernels_train, std::vector<Mat> kernels_cross,
                          PfidMethodResult& method) {
      const GridSearchResult best =
          grid_search(kernels_train, train_labels, n_cats, config.grid_c, config.grid_gamma_scale,
                      config.grid_folds, config.seed, config.mkl_p, config.svm);
      std::vector<Mat> scaled_train, scaled_cross;
      for (const Mat& k : kernels_train) {
        scaled_train.push_back(k.array().pow(best.params.gamma_scale).matrix());
      }
      for (const Mat& k : kernels_cross) {
        scaled_cross.push_back(k.array().pow(best.params.gamma_scale).matrix());
      }
      const MklModel model =
          train_multiclass(scaled_train, train_labels, cat_names, best.params, config.mkl_p);
      const auto preds = predict_rows(model, scaled_cross);
      int correct = 0;
      for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].class_id == test_labels[i]) ++correct;
      }
      method.fold_accuracy_pct.push_back(100.0 * correct / static_cast<double>(preds.size()));
      method.tuned = best.params;
    };

    for (int c = 0; c < kChannelCount; ++c) {
      run_method({base_train[static_cast<std::size_t>(c)]},
                 {base_cross[static_cast<std::size_t>(c)]},
                 report.methods[static_cast<std::size_t>(c)]);
    }
    run_method(base_train, base_cross, report.methods.back());
  }

  for (auto& m : report.methods) {
    double acc = 0.0;
    for (double a : m.fold_accuracy_pct) acc += a;
    m.mean_accuracy_pct = acc / static_cast<double>(m.fold_accuracy_pct.size());
  }

  if (!config.out_dir.empty()) {
    write_text_file(config.out_dir / "pfid_report.json", pfid_report_to_json(report));
    write_text_file(config.out_dir / "pfid_report.txt", pfid_report_to_text(report));
  }
  return report;
}

std::string pfid_report_to_json(const PfidReport& report) {
  json methods = json::array();
  for (const auto& m : report.methods) {
    methods.push_back({{"method", m.method},
                       {"fold_accuracy_pct", m.fold_accuracy_pct},
                       {"mean_accuracy_pct", m.mean_accuracy_pct},
                       {"tuned_c", m.tuned.c},
                       {"tuned_gamma_scale", m.tuned.gamma_scale}});
  }
  return json{{"categories", report.categories},
              {"methods", methods},
              {"config", report.config_snapshot}}
      .dump(2);
}

std::string pfid_report_to_text(const PfidReport& report) {
  std::ostringstream out;
  out << "PFID 3-fold comparison, " << report.categories << " categories\n";
  out << "protocol: per fold, train = the 12 images of two instances, "
         "test = the 6 images of the held-out instance\n";
  out << std::left << std::setw(20) << "method" << std::right;
  for (std::size_t f = 0; f < 3; ++f) out << std::setw(10) << ("fold" + std::to_string(f));
  out << std::setw(10) << "mean" << "\n";
  out << std::fixed << std::setprecision(2);
  for (const auto& m : report.methods) {
    out << std::left << std::setw(20) << m.method << std::right;
    for (double a : m.fold_accuracy_pct) out << std::setw(10) << a;
    out << std::setw(10) << m.mean_accuracy_pct << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// ablate-location

AblationReport cmd_ablate_location(const RunConfig& config) {
  const WorldPaths world{config.world_dir};
  const EvalManifest manifest = load_eval_manifest(world);
  const RestaurantModel union_model = load_model_or_fail(config, "_union");

  FeatureCache cache(config.detector);
  std::vector<GroupResult> restricted_groups, union_groups;
  std::vector<std::uint64_t> hashes;

  for (const auto& group : manifest.groups) {
    const RestaurantModel model = load_model_or_fail(config, group.id);
    std::vector<LabeledPrediction> preds_a, preds_b;
    for (const auto& item : group.items) {
      const DescriptorBundle& bundle = cache.test(item.image);
      const std::uint64_t h = bundle_hash(bundle);
      hashes.push_back(h);

      const Prediction pa = model.predict_histograms(model.quantize_bundle(bundle));
      preds_a.push_back(
          {item.label, model.mkl.class_labels[static_cast<std::size_t>(pa.class_id)]});

      // condition B consumes the identical bundle; the shared hash records it
      const Prediction pb =
          union_model.predict_histograms(union_model.quantize_bundle(bundle));
      preds_b.push_back(
          {item.label, union_model.mkl.class_labels[static_cast<std::size_t>(pb.class_id)]});
    }
    restricted_groups.push_back(score_group(group.id, preds_a, model.mkl.class_labels));
    union_groups.push_back(score_group(group.id, preds_b, union_model.mkl.class_labels));
  }

  AblationReport report = make_ablation_report(
      make_report(std::move(restricted_groups), config.snapshot()),
      make_report(std::move(union_groups), config.snapshot()), std::move(hashes));

  if (!config.out_dir.empty()) {
    write_text_file(config.out_dir / "ablation_report.json", ablation_to_json(report));
    write_text_file(config.out_dir / "ablation_report.txt", ablation_to_text(report));
  }
  return report;
}

// ---------------------------------------------------------------------------
// CLI

namespace {

void add_config_options(CLI::App* cmd, RunConfig& config, std::string& config_file,
                        std::vector<std::string>& overrides) {
  cmd->add_option("--config", config_file, "key=value config file");
  cmd->add_option("--set", overrides, "config override key=value (repeatable)");
  cmd->add_option("--seed", config.seed, "master seed");
  cmd->add_option("--world", config.world_dir, "world directory (fixtures, store, test data)");
  cmd->add_option("--models", config.models_dir, "model directory");
  cmd->add_option("--out", config.out_dir, "report output directory");
  cmd->add_flag("--dump-masks", config.dump_masks, "write segmentation masks beside test images");
}

RunConfig finalize_config(RunConfig config, const std::string& config_file,
                          const std::vector<std::string>& overrides, bool need_world,
                          bool seed_flag_given = false) {
  if (!config_file.empty()) {
    // CLI flags still win: reload the file under the already-parsed values
    RunConfig from_file = load_config_file(config_file, RunConfig{});
    from_file.world_dir = config.world_dir;
    from_file.models_dir = config.models_dir;
    from_file.out_dir = config.out_dir;
    from_file.dump_masks = config.dump_masks;
    if (seed_flag_given) from_file.seed = config.seed;
    config = from_file;
  }
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    apply_config_entry(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (need_world) {
    if (config.world_dir.empty()) throw UsageError("--world is required");
    if (config.models_dir.empty()) config.models_dir = config.world_dir / "models";
    if (config.out_dir.empty()) config.out_dir = config.world_dir / "reports";
  }
  return config;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"context-driven dish recognition"};
  app.require_subcommand(1);

  RunConfig config;
  std::string config_file;
  std::vector<std::string> overrides;

  // generate
  SynthParams synth;
  auto* generate = app.add_subcommand("generate", "emit a synthetic desk-scale world");
  generate->add_option("--out", synth.out_dir, "output directory")->required();
  generate->add_option("--seed", synth.seed, "generator seed");
  generate->add_option("--restaurants", synth.restaurants, "restaurant count");
  generate->add_option("--dishes", synth.dishes_per_restaurant, "dishes per restaurant");
  generate->add_option("--images-per-dish", synth.images_per_dish, "training images per dish");
  generate->add_option("--test-images-per-dish", synth.test_images_per_dish,
                       "held-out test images per dish");
  generate->add_option("--image-size", synth.image_size, "square image side in pixels");
  generate->add_flag("--force", synth.force, "overwrite an existing output directory");
  bool no_collisions = false;
  generate->add_flag("--no-collisions", no_collisions,
                     "give every restaurant unique dish signatures");

  // train
  auto* train = app.add_subcommand("train", "train per-restaurant models");
  std::string train_restaurant;
  bool train_all = false;
  train->add_option("--restaurant", train_restaurant, "restaurant id to train");
  train->add_flag("--all", train_all, "train every restaurant plus the union model");
  add_config_options(train, config, config_file, overrides);

  // classify
  auto* classify = app.add_subcommand("classify", "classify one image");
  std::filesystem::path classify_image;
  std::string classify_restaurant;
  classify->add_option("image", classify_image, "image to classify")->required();
  classify->add_option("--restaurant", classify_restaurant, "bypass geotag matching");
  add_config_options(classify, config, config_file, overrides);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "run an evaluation protocol");
  std::string protocol = "wild";
  std::filesystem::path pfid_root;
  evaluate->add_option("--protocol", protocol, "wild | pfid")
      ->check(CLI::IsMember({"wild", "pfid"}));
  evaluate->add_option("--pfid-root", pfid_root, "PFID-structured dataset directory");
  add_config_options(evaluate, config, config_file, overrides);

  // ablate-location
  auto* ablate = app.add_subcommand("ablate-location", "location-prior ablation");
  add_config_options(ablate, config, config_file, overrides);

  // fetch (optional helper, out of the test surface)
  auto* fetch = app.add_subcommand("fetch", "populate the image store via a downloader script");
  std::string downloader;
  std::string fetch_restaurant;
  fetch->add_option("--downloader", downloader,
                    "command invoked as: <cmd> <slug> <query> <dest-dir>")->required();
  fetch->add_option("--restaurant", fetch_restaurant, "restaurant id")->required();
  add_config_options(fetch, config, config_file, overrides);

  try {
    std::vector<const char*> argv;
    argv.push_back("foodrec");
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help();
      return 0;
    }
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (generate->parsed()) {
      synth.collisions = !no_collisions;
      generate_synthetic_world(synth);
      std::cout << "world written to " << synth.out_dir.string() << "\n";
      return 0;
    }

    if (train->parsed()) {
      if (train_all == !train_restaurant.empty()) {
        throw UsageError("train needs exactly one of --restaurant or --all");
      }
      const RunConfig cfg = finalize_config(config, config_file, overrides, true, train->count("--seed") > 0);
      const TrainSummary summary = cmd_train(cfg, train_restaurant);
      for (const auto& id : summary.trained) {
        std::cout << "trained " << id << " -> " << model_path(cfg, id).string() << "\n";
      }
      return summary.failures.empty() ? 0 : 3;
    }

    if (classify->parsed()) {
      const RunConfig cfg = finalize_config(config, config_file, overrides, true, classify->count("--seed") > 0);
      const ClassifyRecord record = cmd_classify(cfg, classify_image, classify_restaurant);
      std::cout << classify_record_to_json(record) << "\n";
      return 0;
    }

    if (evaluate->parsed()) {
      const RunConfig cfg = finalize_config(config, config_file, overrides, true, evaluate->count("--seed") > 0);
      if (protocol == "wild") {
        const EvaluationReport report = cmd_evaluate_wild(cfg);
        std::cout << report_to_text(report);
      } else {
        if (pfid_root.empty()) throw UsageError("--pfid-root is required for the pfid protocol");
        const PfidReport report = cmd_evaluate_pfid(cfg, pfid_root);
        std::cout << pfid_report_to_text(report);
      }
      return 0;
    }

    if (ablate->parsed()) {
      const RunConfig cfg = finalize_config(config, config_file, overrides, true, ablate->count("--seed") > 0);
      const AblationReport report = cmd_ablate_location(cfg);
      std::cout << ablation_to_text(report);
      return 0;
    }

    if (fetch->parsed()) {
      const RunConfig cfg = finalize_config(config, config_file, overrides, true, fetch->count("--seed") > 0);
      const WorldPaths world{cfg.world_dir};
      const auto db = load_restaurant_db(world.restaurants_json());
      auto it = std::find_if(db.begin(), db.end(),
                             [&](const Restaurant& r) { return r.id == fetch_restaurant; });
      if (it == db.end()) throw NotFoundError("unknown restaurant id '" + fetch_restaurant + "'");
      const FileMenuProvider provider(world.menus_dir());
      const Menu menu = fetch_menu(*it, provider);
      for (const MenuItem& item : menu.items) {
        const auto dest = world.store_dir() / item.slug;
        std::filesystem::create_directories(dest);
        const std::string cmd =
            downloader + " " + item.slug + " \"" + item.name + "\" " + dest.string();
        std::cout << "$ " << cmd << "\n";
        if (std::system(cmd.c_str()) != 0) {
          std::cerr << "downloader failed for " << item.slug << "\n";
        }
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace foodrec::pipeline
