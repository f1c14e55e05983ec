#include "foodrec/context.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include <json.hpp>

namespace foodrec {

using nlohmann::json;

void validate_geo_point(const GeoPoint& p) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || p.lat < -90.0 || p.lat > 90.0 ||
      p.lon < -180.0 || p.lon > 180.0) {
    throw SchemaError("geo point out of range");
  }
}

std::size_t TrainingManifest::total_images() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.images.size();
  return n;
}

// ---------------------------------------------------------------------------
// EXIF GPS

namespace {

class ByteReader {
 public:
  ByteReader(const std::vector<unsigned char>& data, std::size_t base, bool little_endian)
      : data_(data), base_(base), little_(little_endian) {}

  std::uint16_t u16(std::size_t off) const {
    check(off, 2);
    const std::size_t p = base_ + off;
    return little_ ? static_cast<std::uint16_t>(data_[p] | (data_[p + 1] << 8))
                   : static_cast<std::uint16_t>((data_[p] << 8) | data_[p + 1]);
  }
  std::uint32_t u32(std::size_t off) const {
    check(off, 4);
    const std::size_t p = base_ + off;
    if (little_) {
      return data_[p] | (data_[p + 1] << 8) | (data_[p + 2] << 16)
             | (static_cast<std::uint32_t>(data_[p + 3]) << 24);
    }
    return (static_cast<std::uint32_t>(data_[p]) << 24) | (data_[p + 1] << 16)
           | (data_[p + 2] << 8) | data_[p + 3];
  }
  unsigned char byte(std::size_t off) const {
    check(off, 1);
    return data_[base_ + off];
  }
  std::size_t size() const { return data_.size() - base_; }

 private:
  void check(std::size_t off, std::size_t len) const {
    if (base_ + off + len > data_.size()) throw ParseError("EXIF data truncated");
  }
  const std::vector<unsigned char>& data_;
  std::size_t base_;
  bool little_;
};

struct IfdEntry {
  std::uint16_t tag = 0;
  std::uint16_t type = 0;
  std::uint32_t count = 0;
  std::uint32_t value_offset = 0;  // raw field; inline when the payload fits 4 bytes
  std::size_t entry_offset = 0;    // offset of the entry itself in TIFF space
};

std::vector<IfdEntry> read_ifd(const ByteReader& tiff, std::size_t offset) {
  const std::uint16_t count = tiff.u16(offset);
  std::vector<IfdEntry> entries;
  entries.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i) {
    const std::size_t e = offset + 2 + static_cast<std::size_t>(i) * 12;
    IfdEntry ent;
    ent.tag = tiff.u16(e);
    ent.type = tiff.u16(e + 2);
    ent.count = tiff.u32(e + 4);
    ent.value_offset = tiff.u32(e + 8);
    ent.entry_offset = e;
    entries.push_back(ent);
  }
  return entries;
}

// Degrees+minutes+seconds from three unsigned rationals.
double read_dms(const ByteReader& tiff, const IfdEntry& ent) {
  if (ent.type != 5 || ent.count != 3) throw ParseError("GPS coordinate is not 3 rationals");
  const std::size_t at = ent.value_offset;
  double parts[3];
  for (int i = 0; i < 3; ++i) {
    const std::uint32_t num = tiff.u32(at + static_cast<std::size_t>(i) * 8);
    const std::uint32_t den = tiff.u32(at + static_cast<std::size_t>(i) * 8 + 4);
    if (den == 0) throw ParseError("GPS rational with zero denominator");
    parts[i] = static_cast<double>(num) / den;
  }
  return parts[0] + parts[1] / 60.0 + parts[2] / 3600.0;
}

char read_ref(const ByteReader& tiff, const IfdEntry& ent) {
  if (ent.type != 2 || ent.count < 1) throw ParseError("GPS hemisphere reference malformed");
  // ASCII of count <= 4 is stored inline in the value field
  if (ent.count <= 4) {
    return static_cast<char>(tiff.byte(ent.entry_offset + 8));
  }
  return static_cast<char>(tiff.byte(ent.value_offset));
}

std::optional<GeoPoint> exif_gps(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4 || bytes[0] != 0xFF || bytes[1] != 0xD8) return std::nullopt;

  // scan JPEG markers for APP1/Exif
  std::size_t pos = 2;
  std::size_t exif_at = 0, exif_len = 0;
  while (pos + 4 <= bytes.size()) {
    if (bytes[pos] != 0xFF) break;
    const unsigned char marker = bytes[pos + 1];
    if (marker == 0xD8 || (marker >= 0xD0 && marker <= 0xD7) || marker == 0x01) {
      pos += 2;
      continue;
    }
    if (marker == 0xDA || marker == 0xD9) break;  // start of scan / end
    const std::size_t seg_len = (static_cast<std::size_t>(bytes[pos + 2]) << 8) | bytes[pos + 3];
    if (seg_len < 2 || pos + 2 + seg_len > bytes.size()) break;
    if (marker == 0xE1 && seg_len >= 8 &&
        std::memcmp(bytes.data() + pos + 4, "Exif\0\0", 6) == 0) {
      exif_at = pos + 10;
      exif_len = seg_len - 8;
      break;
    }
    pos += 2 + seg_len;
  }
  if (exif_len == 0) return std::nullopt;

  std::vector<unsigned char> tiff_bytes(bytes.begin() + static_cast<std::ptrdiff_t>(exif_at),
                                        bytes.begin() + static_cast<std::ptrdiff_t>(exif_at + exif_len));
  if (tiff_bytes.size() < 8) throw ParseError("EXIF TIFF header truncated");
  bool little;
  if (tiff_bytes[0] == 'I' && tiff_bytes[1] == 'I') little = true;
  else if (tiff_bytes[0] == 'M' && tiff_bytes[1] == 'M') little = false;
  else throw ParseError("EXIF byte-order mark invalid");

  ByteReader tiff(tiff_bytes, 0, little);
  if (tiff.u16(2) != 42) throw ParseError("EXIF TIFF magic invalid");
  const std::uint32_t ifd0 = tiff.u32(4);

  std::uint32_t gps_ifd = 0;
  for (const IfdEntry& ent : read_ifd(tiff, ifd0)) {
    if (ent.tag == 0x8825) {  // GPSInfo pointer
      gps_ifd = ent.value_offset;
      break;
    }
  }
  if (gps_ifd == 0) return std::nullopt;

  std::optional<double> lat, lon;
  char lat_ref = 'N', lon_ref = 'E';
  bool saw_lat_ref = false, saw_lon_ref = false;
  for (const IfdEntry& ent : read_ifd(tiff, gps_ifd)) {
    switch (ent.tag) {
      case 1: lat_ref = read_ref(tiff, ent); saw_lat_ref = true; break;
      case 2: lat = read_dms(tiff, ent); break;
      case 3: lon_ref = read_ref(tiff, ent); saw_lon_ref = true; break;
      case 4: lon = read_dms(tiff, ent); break;
      default: break;
    }
  }
  if (!lat || !lon) return std::nullopt;
  (void)saw_lat_ref;
  (void)saw_lon_ref;

  GeoPoint p;
  p.lat = (lat_ref == 'S') ? -*lat : *lat;
  p.lon = (lon_ref == 'W') ? -*lon : *lon;
  validate_geo_point(p);
  return p;
}

std::optional<GeoPoint> sidecar_geotag(const std::filesystem::path& image) {
  std::filesystem::path sidecar = image;
  sidecar += ".geo.json";
  if (!std::filesystem::exists(sidecar)) return std::nullopt;
  std::ifstream in(sidecar);
  if (!in) throw IoError("cannot open " + sidecar.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("sidecar " + sidecar.string() + ": " + e.what());
  }
  if (!j.contains("lat") || !j.contains("lon") || !j["lat"].is_number() || !j["lon"].is_number()) {
    throw SchemaError("sidecar " + sidecar.string() + ": fields lat/lon required");
  }
  GeoPoint p{j["lat"].get<double>(), j["lon"].get<double>()};
  validate_geo_point(p);
  return p;
}

}  // namespace

std::optional<GeoPoint> extract_geotag(const std::filesystem::path& image) {
  std::ifstream in(image, std::ios::binary);
  if (!in) throw IoError("cannot open " + image.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (auto p = exif_gps(bytes)) return p;
  return sidecar_geotag(image);
}

// ---------------------------------------------------------------------------
// Geo matching

double haversine_m(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kEarthRadiusM = 6371000.0;
  constexpr double kDeg = 3.141592653589793 / 180.0;
  const double dlat = (b.lat - a.lat) * kDeg;
  const double dlon = (b.lon - a.lon) * kDeg;
  const double s1 = std::sin(0.5 * dlat);
  const double s2 = std::sin(0.5 * dlon);
  const double h = s1 * s1 + std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

std::vector<Restaurant> match_restaurants(const GeoPoint& point, const std::vector<Restaurant>& db,
                                          double radius_m) {
  if (radius_m <= 0.0) throw DomainError("radius must be positive");
  std::vector<std::pair<double, const Restaurant*>> hits;
  for (const Restaurant& r : db) {
    const double d = haversine_m(point, r.location);
    if (d <= radius_m) hits.push_back({d, &r});
  }
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second->id < b.second->id;
  });
  std::vector<Restaurant> out;
  out.reserve(hits.size());
  for (const auto& [d, r] : hits) out.push_back(*r);
  return out;
}

// ---------------------------------------------------------------------------
// Fixtures

namespace {

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::string require_string(const json& j, const char* field, const std::string& where) {
  if (!j.contains(field) || !j[field].is_string()) {
    throw SchemaError(where + ": field '" + field + "' missing or not a string");
  }
  return j[field].get<std::string>();
}

double require_number(const json& j, const char* field, const std::string& where) {
  if (!j.contains(field) || !j[field].is_number()) {
    throw SchemaError(where + ": field '" + field + "' missing or not a number");
  }
  return j[field].get<double>();
}

}  // namespace

std::vector<Restaurant> load_restaurant_db(const std::filesystem::path& restaurants_json) {
  json j = load_json_file(restaurants_json);
  const std::string where = restaurants_json.string();
  json arr;
  if (j.is_array()) {
    arr = j;
  } else if (j.is_object() && j.contains("restaurants") && j["restaurants"].is_array()) {
    arr = j["restaurants"];
  } else {
    throw SchemaError(where + ": expected an array or an object with a 'restaurants' array");
  }
  std::vector<Restaurant> out;
  std::set<std::string> ids;
  for (const json& e : arr) {
    Restaurant r;
    r.id = require_string(e, "id", where);
    r.name = require_string(e, "name", where);
    r.location.lat = require_number(e, "lat", where);
    r.location.lon = require_number(e, "lon", where);
    r.cuisine = require_string(e, "cuisine", where);
    r.menu_ref = require_string(e, "menu_ref", where);
    validate_geo_point(r.location);
    if (!ids.insert(r.id).second) throw SchemaError(where + ": duplicate restaurant id " + r.id);
    out.push_back(std::move(r));
  }
  return out;
}

FileMenuProvider::FileMenuProvider(std::filesystem::path menus_dir)
    : menus_dir_(std::move(menus_dir)) {}

Menu FileMenuProvider::fetch(const Restaurant& restaurant) const {
  const std::filesystem::path path = menus_dir_ / (restaurant.menu_ref + ".json");
  if (!std::filesystem::exists(path)) {
    throw NotFoundError("no menu fixture for restaurant " + restaurant.id + " at " + path.string());
  }
  json j = load_json_file(path);
  const std::string where = path.string();
  Menu m;
  m.restaurant_id = require_string(j, "restaurant_id", where);
  if (!j.contains("items") || !j["items"].is_array()) {
    throw SchemaError(where + ": field 'items' missing or not an array");
  }
  std::set<std::string> slugs;
  for (const json& e : j["items"]) {
    MenuItem item;
    item.slug = require_string(e, "slug", where);
    item.name = require_string(e, "name", where);
    if (!slugs.insert(item.slug).second) {
      throw SchemaError(where + ": duplicate menu slug '" + item.slug + "'");
    }
    m.items.push_back(std::move(item));
  }
  return m;
}

Menu fetch_menu(const Restaurant& restaurant, const MenuProvider& provider) {
  return provider.fetch(restaurant);
}

TrainingManifest assemble_training_set(const Menu& menu, const std::filesystem::path& image_store,
                                       int images_per_item) {
  if (images_per_item < 1) throw DomainError("images_per_item must be >= 1");
  if (!std::filesystem::is_directory(image_store)) {
    throw IoError("image store missing: " + image_store.string());
  }
  static const std::set<std::string> kImageExts = {".ppm", ".png", ".jpg", ".jpeg"};

  TrainingManifest manifest;
  manifest.restaurant_id = menu.restaurant_id;
  manifest.images_per_item = images_per_item;

  for (const MenuItem& item : menu.items) {
    const std::filesystem::path dir = image_store / item.slug;
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(dir)) {
      for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        if (kImageExts.count(ext)) files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());  // "top" ordering proxy: lexicographic
    if (files.empty()) {
      manifest.warnings.push_back("menu item '" + item.slug + "' has no images; dropped");
      continue;
    }
    if (static_cast<int>(files.size()) > images_per_item) {
      files.resize(static_cast<std::size_t>(images_per_item));
    } else if (static_cast<int>(files.size()) < images_per_item) {
      manifest.warnings.push_back("menu item '" + item.slug + "' has only " +
                                  std::to_string(files.size()) + " of " +
                                  std::to_string(images_per_item) + " images");
    }
    manifest.entries.push_back({item.slug, std::move(files)});
  }
  if (manifest.entries.empty()) {
    throw TrainingError("no menu item has any training images under " + image_store.string());
  }
  return manifest;
}

}  // namespace foodrec
