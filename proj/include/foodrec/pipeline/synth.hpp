#pragma once

#include <filesystem>

#include "foodrec/common.hpp"

namespace foodrec::pipeline {

struct SynthParams {
  std::uint64_t seed = 42;
  int restaurants = 2;
  int dishes_per_restaurant = 4;
  int images_per_dish = 12;
  int test_images_per_dish = 5;
  int image_size = 96;
  bool collisions = true;  // reuse dish signatures across restaurants
  std::filesystem::path out_dir;
  bool force = false;
};

/// Emits a deterministic desk-scale world: restaurants.json, menus/, a
/// weakly-labeled image store of procedurally textured dish images, geotagged
/// test images and an eval manifest. With collisions on, restaurants share
/// visual dish signatures under different labels so a union-label model has
/// ambiguous classes while per-restaurant models do not.
void generate_synthetic_world(const SynthParams& params);

}  // namespace foodrec::pipeline
