#include "foodrec/pipeline/synth.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "foodrec/imaging.hpp"

namespace foodrec::pipeline {

using nlohmann::json;

namespace {

struct DishSignature {
  double hue = 0.0;        // dish base hue
  double sat = 0.85;
  double value = 0.80;     // base tone
  double dot_hue_off = 0.05;
  double dot_value_off = -0.07;
  double dot_radius_lo = 3.0;  // dot size band identifies the dish texture
  double dot_radius_hi = 4.5;
  double dot_spacing = 9.0;    // mean center spacing in pixels
};

DishSignature make_signature(std::uint64_t seed, int signature_index, int signature_count) {
  Rng rng(seed ^ (0x5157bd1ull * static_cast<std::uint64_t>(signature_index + 1)));
  DishSignature s;
  // even hue spacing over the signatures actually in play
  s.hue = std::fmod((signature_index + rng.next_in(-0.08, 0.08)) /
                        std::max(1, signature_count),
                    1.0);
  if (s.hue < 0) s.hue += 1.0;
  s.sat = rng.next_in(0.75, 0.9);
  s.value = rng.next_in(0.76, 0.84);
  // dot tones stay within the region-union color tolerance so the food mask
  // keeps the dots and their keypoints
  s.dot_hue_off = (signature_index % 2 ? 0.02 : -0.02) + rng.next_in(-0.004, 0.004);
  s.dot_value_off = (signature_index % 3 == 0 ? -1.0 : 1.0) * rng.next_in(0.035, 0.05);
  s.dot_radius_lo = 2.2 + 0.9 * (signature_index % 4);
  s.dot_radius_hi = s.dot_radius_lo + 0.6;
  s.dot_spacing = 2.6 * s.dot_radius_hi;
  return s;
}

Eigen::Vector3d hsv_pixel_to_rgb(double h, double s, double v) {
  Raster px(1, 1, 3, ColorSpace::Hsv);
  px.at(0, 0, 0) = h;
  px.at(0, 0, 1) = s;
  px.at(0, 0, 2) = v;
  const Raster rgb = hsv_to_rgb(px);
  return {rgb.at(0, 0, 0), rgb.at(0, 0, 1), rgb.at(0, 0, 2)};
}

// closeup = true renders border-to-border food texture (the web-image style
// the training store holds); closeup = false renders the in-the-wild scene:
// dish on a plate on a dark table, for the segmentation path to crop.
Raster render_dish(const DishSignature& sig, int size, Rng& rng, bool closeup) {
  Raster img(size, size, 3, ColorSpace::Rgb);

  const double cx = size / 2.0 + rng.next_in(-2.0, 2.0);
  const double cy = size / 2.0 + rng.next_in(-2.0, 2.0);
  const double radius = closeup ? 2.0 * size : size * rng.next_in(0.42, 0.47);
  const double hue_jitter = rng.next_in(-0.012, 0.012);
  const double value_jitter = rng.next_in(-0.02, 0.02);

  const double hue = std::fmod(sig.hue + hue_jitter + 1.0, 1.0);
  const double dot_hue = std::fmod(hue + sig.dot_hue_off + 1.0, 1.0);
  const Eigen::Vector3d base = hsv_pixel_to_rgb(hue, sig.sat, sig.value + value_jitter);
  const Eigen::Vector3d dot_color =
      hsv_pixel_to_rgb(dot_hue, sig.sat, sig.value + sig.dot_value_off + value_jitter);

  // aperiodic dot field: isolated blobs give the detector distinct extrema,
  // unlike a periodic pattern whose structure tensor is position-independent
  struct Dot {
    double x, y, r;
  };
  std::vector<Dot> dots;
  if (closeup) {
    const double pad = sig.dot_radius_hi;
    const double span = size + 2.0 * pad;
    const int n_dots = static_cast<int>(span * span / (sig.dot_spacing * sig.dot_spacing));
    for (int i = 0; i < n_dots; ++i) {
      dots.push_back({rng.next_in(-pad, size + pad), rng.next_in(-pad, size + pad),
                      rng.next_in(sig.dot_radius_lo, sig.dot_radius_hi)});
    }
  } else {
    const double area = 3.141592653589793 * radius * radius;
    const int n_dots = static_cast<int>(area / (sig.dot_spacing * sig.dot_spacing));
    for (int i = 0; i < n_dots; ++i) {
      const double ang = rng.next_in(0.0, 6.283185307179586);
      const double rr = radius * std::sqrt(rng.next_double());
      dots.push_back({cx + rr * std::cos(ang), cy + rr * std::sin(ang),
                      rng.next_in(sig.dot_radius_lo, sig.dot_radius_hi)});
    }
  }

  const double plate = radius * 1.06;  // thin rim
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double r = std::hypot(dx, dy);
      Eigen::Vector3d color;
      if (r <= radius) {
        color = base;
        for (const Dot& d : dots) {
          const double dist = std::hypot(x - d.x, y - d.y);
          if (dist <= d.r + 0.5) {
            // 1px anti-aliased edge
            const double t = std::clamp(d.r + 0.5 - dist, 0.0, 1.0);
            color = (1.0 - t) * color + t * dot_color;
          }
        }
      } else if (r <= plate) {
        color = Eigen::Vector3d(0.82, 0.82, 0.84);  // plate rim
      } else {
        color = Eigen::Vector3d(0.13, 0.11, 0.10);  // table
      }
      for (int c = 0; c < 3; ++c) {
        const double noisy = color[c] + 0.01 * rng.next_normal();
        img.at(x, y, c) = std::clamp(noisy, 0.0, 1.0);
      }
    }
  }
  return img;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

}  // namespace

void generate_synthetic_world(const SynthParams& params) {
  if (params.restaurants < 2 && params.collisions) {
    // collisions need at least two restaurants; a single-restaurant world is
    // still useful for degenerate-case tests
  }
  if (params.restaurants < 1 || params.dishes_per_restaurant < 2) {
    throw DomainError("synthetic world needs >= 1 restaurants and >= 2 dishes each");
  }
  if (std::filesystem::exists(params.out_dir) && !params.force) {
    throw IoError("output directory exists (use --force): " + params.out_dir.string());
  }
  std::filesystem::create_directories(params.out_dir);
  std::filesystem::create_directories(params.out_dir / "menus");
  std::filesystem::create_directories(params.out_dir / "store");
  std::filesystem::create_directories(params.out_dir / "test");

  json restaurants = json::array();
  json manifest_groups = json::array();

  static const char* kCuisines[] = {"american", "indian", "italian", "mexican", "thai"};

  for (int r = 0; r < params.restaurants; ++r) {
    const std::string rid = "r" + std::to_string(r);
    const double lat = 40.0 + 0.01 * r;  // ~1.1 km apart
    const double lon = -80.0;

    restaurants.push_back({{"id", rid},
                           {"name", "Restaurant " + std::to_string(r)},
                           {"lat", lat},
                           {"lon", lon},
                           {"cuisine", kCuisines[r % 5]},
                           {"menu_ref", "menu_" + rid}});

    json items = json::array();
    json group_items = json::array();

    for (int d = 0; d < params.dishes_per_restaurant; ++d) {
      const std::string slug = rid + "_dish" + std::to_string(d);
      items.push_back({{"slug", slug}, {"name", "Dish " + std::to_string(d)}});

      const int signature_index =
          params.collisions ? d : r * params.dishes_per_restaurant + d;
      const int signature_count = params.collisions
                                      ? params.dishes_per_restaurant
                                      : params.restaurants * params.dishes_per_restaurant;
      const DishSignature sig = make_signature(params.seed, signature_index, signature_count);

      const std::filesystem::path dish_dir = params.out_dir / "store" / slug;
      std::filesystem::create_directories(dish_dir);
      for (int i = 0; i < params.images_per_dish; ++i) {
        Rng rng(params.seed ^ fnv1a(slug.data(), slug.size()) ^
                static_cast<std::uint64_t>(i + 1));
        char name[32];
        std::snprintf(name, sizeof(name), "img_%03d.ppm", i);
        save_ppm(dish_dir / name, render_dish(sig, params.image_size, rng, true));
      }

      const std::filesystem::path test_dir = params.out_dir / "test" / rid / slug;
      std::filesystem::create_directories(test_dir);
      for (int i = 0; i < params.test_images_per_dish; ++i) {
        // disjoint variation stream from the training images
        Rng rng(params.seed ^ fnv1a(slug.data(), slug.size()) ^
                static_cast<std::uint64_t>(100000 + i));
        char name[32];
        std::snprintf(name, sizeof(name), "t_%02d.ppm", i);
        const std::filesystem::path img_path = test_dir / name;
        save_ppm(img_path, render_dish(sig, params.image_size, rng, false));

        const std::string rel =
            (std::filesystem::path("test") / rid / slug / name).generic_string();

        // geotag sidecar within ~20 m of the restaurant; seeded from the
        // world-relative path so identical seeds give identical bytes
        // regardless of the output directory
        Rng geo_rng(params.seed ^ fnv1a(rel.data(), rel.size()));
        json side = {{"lat", lat + geo_rng.next_in(-1.5e-4, 1.5e-4)},
                     {"lon", lon + geo_rng.next_in(-1.5e-4, 1.5e-4)}};
        std::filesystem::path side_path = img_path;
        side_path += ".geo.json";
        write_text(side_path, side.dump(2));
        group_items.push_back({{"image", rel}, {"label", slug}});
      }
    }

    write_text(params.out_dir / "menus" / ("menu_" + rid + ".json"),
               json{{"schema_version", 1}, {"restaurant_id", rid}, {"items", items}}.dump(2));
    manifest_groups.push_back({{"id", rid}, {"items", group_items}});
  }

  write_text(params.out_dir / "restaurants.json",
             json{{"schema_version", 1}, {"restaurants", restaurants}}.dump(2));
  write_text(params.out_dir / "eval_manifest.json",
             json{{"schema_version", 1}, {"groups", manifest_groups}}.dump(2));
}

}  // namespace foodrec::pipeline
