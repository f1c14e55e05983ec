#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "foodrec/common.hpp"

namespace foodrec {

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]
};

void validate_geo_point(const GeoPoint& p);

struct Restaurant {
  std::string id;
  std::string name;
  GeoPoint location;
  std::string cuisine;
  std::string menu_ref;
};

struct MenuItem {
  std::string slug;
  std::string name;
};

struct Menu {
  std::string restaurant_id;
  std::vector<MenuItem> items;

  bool trainable() const { return !items.empty(); }
};

struct TrainingManifest {
  std::string restaurant_id;
  struct Entry {
    std::string slug;
    std::vector<std::filesystem::path> images;
  };
  std::vector<Entry> entries;
  int images_per_item = 0;
  std::vector<std::string> warnings;

  std::size_t total_images() const;
};

/// GPS coordinates from JPEG EXIF, else from a `<image>.geo.json` sidecar
/// ({"lat": .., "lon": ..}); absent when neither carries a position.
/// Malformed EXIF rationals raise ParseError rather than returning absent.
std::optional<GeoPoint> extract_geotag(const std::filesystem::path& image);

/// Great-circle distance in meters, Earth radius 6 371 000 m.
double haversine_m(const GeoPoint& a, const GeoPoint& b);

/// Restaurants within radius meters, nearest first.
std::vector<Restaurant> match_restaurants(const GeoPoint& point, const std::vector<Restaurant>& db,
                                          double radius_m);

class MenuProvider {
 public:
  virtual ~MenuProvider() = default;
  virtual Menu fetch(const Restaurant& restaurant) const = 0;
};

/// Reads menus/<menu_ref>.json fixture files.
class FileMenuProvider final : public MenuProvider {
 public:
  explicit FileMenuProvider(std::filesystem::path menus_dir);
  Menu fetch(const Restaurant& restaurant) const override;

 private:
  std::filesystem::path menus_dir_;
};

Menu fetch_menu(const Restaurant& restaurant, const MenuProvider& provider);

/// restaurants.json: either a bare array of records or
/// {"schema_version": 1, "restaurants": [...]}.
std::vector<Restaurant> load_restaurant_db(const std::filesystem::path& restaurants_json);

/// Picks the lexicographically first images_per_item files from
/// image_store/<slug>/ for every menu item; items without images are dropped
/// with a warning, an entirely empty store is an error.
TrainingManifest assemble_training_set(const Menu& menu, const std::filesystem::path& image_store,
                                       int images_per_item);

}  // namespace foodrec
