#include "foodrec/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <set>

namespace foodrec {

namespace {

struct Cell {
  Eigen::Vector3d color_sum = Eigen::Vector3d::Zero();
  int pixel_count = 0;
};

struct ActiveRegion {
  Eigen::Vector3d color_sum = Eigen::Vector3d::Zero();
  int pixel_count = 0;
  int id = 0;        // smallest original cell id contained
  int generation = 0;
  bool alive = false;
  std::set<int> adjacent;  // slot indices

  Eigen::Vector3d mean() const { return color_sum / pixel_count; }
};

struct Edge {
  double cost;
  int a, b;          // slot indices, a < b by region id at push time
  int id_a, id_b;    // region ids for tie-breaking
  int gen_a, gen_b;

  bool operator>(const Edge& other) const {
    if (cost != other.cost) return cost > other.cost;
    if (id_a != other.id_a) return id_a > other.id_a;
    return id_b > other.id_b;
  }
};

}  // namespace

SegmentHierarchy hierarchical_segment(const Raster& rgb, const SegmentParams& params) {
  if (rgb.channels() != 3) throw DomainError("hierarchical_segment requires a 3-channel raster");
  const int w = rgb.width(), h = rgb.height();
  if (std::min(w, h) < 32) throw DomainError("image too small to segment (min dimension 32)");

  const int cell_size = (static_cast<std::int64_t>(w) * h > params.superpixel_area_threshold) ? 2 : 1;
  const int cw = (w + cell_size - 1) / cell_size;
  const int ch = (h + cell_size - 1) / cell_size;
  const int n_cells = cw * ch;

  // cell id of each pixel, plus per-cell color sums
  std::vector<Cell> cells(static_cast<std::size_t>(n_cells));
  std::vector<int> cell_of_pixel(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int cid = (y / cell_size) * cw + (x / cell_size);
      cell_of_pixel[static_cast<std::size_t>(y) * w + x] = cid;
      auto& cell = cells[static_cast<std::size_t>(cid)];
      cell.color_sum += Eigen::Vector3d(rgb.at(x, y, 0), rgb.at(x, y, 1), rgb.at(x, y, 2));
      ++cell.pixel_count;
    }
  }

  std::vector<ActiveRegion> regions(static_cast<std::size_t>(n_cells));
  for (int i = 0; i < n_cells; ++i) {
    auto& r = regions[static_cast<std::size_t>(i)];
    r.color_sum = cells[static_cast<std::size_t>(i)].color_sum;
    r.pixel_count = cells[static_cast<std::size_t>(i)].pixel_count;
    r.id = i;
    r.generation = 0;
    r.alive = true;
  }
  for (int cy = 0; cy < ch; ++cy) {
    for (int cx = 0; cx < cw; ++cx) {
      const int i = cy * cw + cx;
      if (cx + 1 < cw) {
        regions[static_cast<std::size_t>(i)].adjacent.insert(i + 1);
        regions[static_cast<std::size_t>(i + 1)].adjacent.insert(i);
      }
      if (cy + 1 < ch) {
        regions[static_cast<std::size_t>(i)].adjacent.insert(i + cw);
        regions[static_cast<std::size_t>(i + cw)].adjacent.insert(i);
      }
    }
  }

  // union-find over cells to place pixels at snapshot time
  std::vector<int> parent(static_cast<std::size_t>(n_cells));
  for (int i = 0; i < n_cells; ++i) parent[static_cast<std::size_t>(i)] = i;
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };

  std::priority_queue<Edge, std::vector<Edge>, std::greater<Edge>> heap;
  auto push_edge = [&](int a, int b) {
    const auto& ra = regions[static_cast<std::size_t>(a)];
    const auto& rb = regions[static_cast<std::size_t>(b)];
    Edge e;
    e.cost = (ra.mean() - rb.mean()).norm();
    if (ra.id <= rb.id) {
      e.a = a; e.b = b; e.id_a = ra.id; e.id_b = rb.id; e.gen_a = ra.generation; e.gen_b = rb.generation;
    } else {
      e.a = b; e.b = a; e.id_a = rb.id; e.id_b = ra.id; e.gen_a = rb.generation; e.gen_b = ra.generation;
    }
    heap.push(e);
  };
  for (int i = 0; i < n_cells; ++i) {
    for (int j : regions[static_cast<std::size_t>(i)].adjacent) {
      if (i < j) push_edge(i, j);
    }
  }

  auto pop_valid = [&]() -> std::optional<Edge> {
    while (!heap.empty()) {
      Edge e = heap.top();
      const auto& ra = regions[static_cast<std::size_t>(e.a)];
      const auto& rb = regions[static_cast<std::size_t>(e.b)];
      if (!ra.alive || !rb.alive || ra.generation != e.gen_a || rb.generation != e.gen_b) {
        heap.pop();
        continue;
      }
      return e;
    }
    return std::nullopt;
  };

  int active_count = n_cells;

  SegmentHierarchy hierarchy;
  hierarchy.width = w;
  hierarchy.height = h;

  // snapshot machinery: maps union-find roots to level regions
  std::vector<int> prev_root_of_region;  // root slot per region of the previous level
  auto take_snapshot = [&](int target) {
    SegmentLevel level;
    level.target_count = target;

    std::map<int, int> slot_to_index;  // root slot -> region index, ordered by region id
    std::vector<int> roots;
    for (int i = 0; i < n_cells; ++i) {
      if (regions[static_cast<std::size_t>(i)].alive) roots.push_back(i);
    }
    std::sort(roots.begin(), roots.end(), [&](int a, int b) {
      return regions[static_cast<std::size_t>(a)].id < regions[static_cast<std::size_t>(b)].id;
    });
    for (int r : roots) slot_to_index[r] = static_cast<int>(slot_to_index.size());

    level.regions.resize(roots.size());
    for (std::size_t ri = 0; ri < roots.size(); ++ri) {
      auto& reg = level.regions[ri];
      reg.mean_color = regions[static_cast<std::size_t>(roots[ri])].mean();
      reg.x0 = w; reg.y0 = h; reg.x1 = -1; reg.y1 = -1;
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int root = find(cell_of_pixel[static_cast<std::size_t>(y) * w + x]);
        auto& reg = level.regions[static_cast<std::size_t>(slot_to_index.at(root))];
        reg.pixels.push_back(y * w + x);
        reg.x0 = std::min(reg.x0, x);
        reg.x1 = std::max(reg.x1, x);
        reg.y0 = std::min(reg.y0, y);
        reg.y1 = std::max(reg.y1, y);
      }
    }

    if (!hierarchy.levels.empty()) {
      level.parent_of_prev.resize(prev_root_of_region.size());
      for (std::size_t i = 0; i < prev_root_of_region.size(); ++i) {
        level.parent_of_prev[i] = slot_to_index.at(find(prev_root_of_region[i]));
      }
    }
    prev_root_of_region.clear();
    for (int r : roots) prev_root_of_region.push_back(r);

    hierarchy.levels.push_back(std::move(level));
  };

  std::vector<int> targets = params.snapshot_counts;
  std::sort(targets.begin(), targets.end(), std::greater<int>());
  std::size_t next_target = 0;

  auto maybe_snapshot = [&]() {
    while (next_target < targets.size() && active_count <= targets[next_target]) {
      const auto e = pop_valid();
      if (e && e->cost <= params.zero_cost_eps) return;  // wait out the zero-cost plateau
      take_snapshot(targets[next_target]);
      ++next_target;
    }
  };

  maybe_snapshot();
  while (next_target < targets.size() && active_count > 1) {
    const auto e = pop_valid();
    if (!e) break;
    heap.pop();

    // merge b into a (a keeps the smaller region id by construction)
    auto& ra = regions[static_cast<std::size_t>(e->a)];
    auto& rb = regions[static_cast<std::size_t>(e->b)];
    ra.color_sum += rb.color_sum;
    ra.pixel_count += rb.pixel_count;
    ra.generation++;
    rb.alive = false;
    parent[static_cast<std::size_t>(find(e->b))] = find(e->a);

    ra.adjacent.erase(e->b);
    rb.adjacent.erase(e->a);
    for (int nb : rb.adjacent) {
      regions[static_cast<std::size_t>(nb)].adjacent.erase(e->b);
      regions[static_cast<std::size_t>(nb)].adjacent.insert(e->a);
      ra.adjacent.insert(nb);
    }
    rb.adjacent.clear();
    --active_count;

    for (int nb : ra.adjacent) push_edge(e->a, nb);
    maybe_snapshot();
  }
  // exhausted merges (single region or no edges): record any remaining levels
  while (next_target < targets.size()) {
    take_snapshot(targets[next_target]);
    ++next_target;
  }
  return hierarchy;
}

FoodRegion select_food_region(const SegmentHierarchy& hierarchy, const SegmentParams& params) {
  if (hierarchy.levels.empty()) throw DomainError("empty segment hierarchy");
  const int w = hierarchy.width, h = hierarchy.height;

  const SegmentLevel* level = nullptr;
  for (const auto& l : hierarchy.levels) {
    if (l.target_count == 16) level = &l;
  }
  if (!level) level = &hierarchy.levels.back();

  auto centered_fallback = [&]() {
    FoodRegion fr;
    fr.fallback = true;
    fr.mask.assign(static_cast<std::size_t>(w) * h, 0);
    const int x0 = w / 4, x1 = x0 + w / 2;
    const int y0 = h / 4, y1 = y0 + h / 2;
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) fr.mask[static_cast<std::size_t>(y) * w + x] = 1;
    }
    return fr;
  };

  if (level->regions.size() <= 1) return centered_fallback();  // no segmentation signal

  // score = pixel count x fraction of pixels inside the centered 50% window
  const int wx0 = w / 4, wx1 = wx0 + w / 2;
  const int wy0 = h / 4, wy1 = wy0 + h / 2;
  int best = -1;
  double best_score = -1.0;
  for (std::size_t i = 0; i < level->regions.size(); ++i) {
    const auto& reg = level->regions[i];
    int inside = 0;
    for (int p : reg.pixels) {
      const int x = p % w, y = p / w;
      if (x >= wx0 && x < wx1 && y >= wy0 && y < wy1) ++inside;
    }
    const double score = static_cast<double>(reg.count()) *
                         (static_cast<double>(inside) / reg.count());
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }

  // label map for adjacency between regions at this level
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  for (std::size_t i = 0; i < level->regions.size(); ++i) {
    for (int p : level->regions[i].pixels) label[static_cast<std::size_t>(p)] = static_cast<int>(i);
  }
  std::set<int> adjacent;
  for (int p : level->regions[static_cast<std::size_t>(best)].pixels) {
    const int x = p % w, y = p / w;
    const int offsets[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& o : offsets) {
      const int nx = x + o[0], ny = y + o[1];
      if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
      const int nl = label[static_cast<std::size_t>(ny) * w + nx];
      if (nl != best) adjacent.insert(nl);
    }
  }

  FoodRegion fr;
  fr.mask.assign(static_cast<std::size_t>(w) * h, 0);
  const Eigen::Vector3d base_color = level->regions[static_cast<std::size_t>(best)].mean_color;
  std::size_t covered = 0;
  auto add_region = [&](int idx) {
    for (int p : level->regions[static_cast<std::size_t>(idx)].pixels) {
      if (!fr.mask[static_cast<std::size_t>(p)]) {
        fr.mask[static_cast<std::size_t>(p)] = 1;
        ++covered;
      }
    }
  };
  add_region(best);
  for (int nb : adjacent) {
    if ((level->regions[static_cast<std::size_t>(nb)].mean_color - base_color).norm() <=
        params.adjacent_color_tol) {
      add_region(nb);
    }
  }

  if (static_cast<double>(covered) < params.min_coverage_frac * w * h) return centered_fallback();
  return fr;
}

MaskedImage apply_mask(const Raster& img, const std::vector<std::uint8_t>& mask) {
  const int w = img.width(), h = img.height();
  if (mask.size() != static_cast<std::size_t>(w) * h) {
    throw DomainError("mask dimensions do not match the image");
  }
  int x0 = w, y0 = h, x1 = -1, y1 = -1;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask[static_cast<std::size_t>(y) * w + x]) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
  }
  if (x1 < x0) throw DomainError("empty mask");

  const int cw = x1 - x0 + 1, chh = y1 - y0 + 1;
  MaskedImage out;
  out.image = Raster(cw, chh, img.channels(), img.space());
  out.offset_x = x0;
  out.offset_y = y0;
  out.mask.assign(static_cast<std::size_t>(cw) * chh, 0);
  for (int y = 0; y < chh; ++y) {
    for (int x = 0; x < cw; ++x) {
      const bool inside = mask[static_cast<std::size_t>(y + y0) * w + (x + x0)] != 0;
      out.mask[static_cast<std::size_t>(y) * cw + x] = inside ? 1 : 0;
      for (int c = 0; c < img.channels(); ++c) {
        out.image.at(x, y, c) = inside ? img.at(x + x0, y + y0, c) : 0.0;
      }
    }
  }
  return out;
}

std::vector<Keypoint> filter_keypoints_by_mask(const std::vector<Keypoint>& keypoints,
                                               const MaskedImage& masked) {
  const int w = masked.image.width(), h = masked.image.height();
  std::vector<Keypoint> out;
  for (const Keypoint& kp : keypoints) {
    const int x = static_cast<int>(std::lround(kp.x));
    const int y = static_cast<int>(std::lround(kp.y));
    if (x < 0 || x >= w || y < 0 || y >= h) continue;
    if (masked.mask[static_cast<std::size_t>(y) * w + x]) out.push_back(kp);
  }
  return out;
}

}  // namespace foodrec
