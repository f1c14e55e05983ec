#include "foodrec/interest.hpp"

#include <algorithm>
#include <map>
#include <tuple>
#include <cmath>
#include <numeric>

namespace foodrec {

namespace {

struct LevelMaps {
  double sigma_d = 0.0;
  ImagePlane harris;  // cornerness
  ImagePlane log_abs; // scale-normalized |Lxx + Lyy|
};

void gradients(const ImagePlane& img, ImagePlane& gx, ImagePlane& gy) {
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  gx.resize(h, w);
  gy.resize(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(0, x - 1), xp = std::min(w - 1, x + 1);
      const int ym = std::max(0, y - 1), yp = std::min(h - 1, y + 1);
      gx(y, x) = 0.5 * (img(y, xp) - img(y, xm));
      gy(y, x) = 0.5 * (img(yp, x) - img(ym, x));
    }
  }
}

LevelMaps build_level(const ImagePlane& base, double sigma_d, double integration_ratio,
                      double kappa) {
  LevelMaps lm;
  lm.sigma_d = sigma_d;
  const double sigma_i = integration_ratio * sigma_d;

  const ImagePlane smoothed = gaussian_blur(base, sigma_d);
  ImagePlane gx, gy;
  gradients(smoothed, gx, gy);

  const double s2 = sigma_d * sigma_d;
  const ImagePlane ixx = gaussian_blur((s2 * gx * gx).eval(), sigma_i);
  const ImagePlane iyy = gaussian_blur((s2 * gy * gy).eval(), sigma_i);
  const ImagePlane ixy = gaussian_blur((s2 * gx * gy).eval(), sigma_i);

  lm.harris = ixx * iyy - ixy * ixy - kappa * (ixx + iyy) * (ixx + iyy);

  // second derivatives of the smoothed image for the Laplacian
  const int h = static_cast<int>(base.rows());
  const int w = static_cast<int>(base.cols());
  lm.log_abs.resize(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(0, x - 1), xp = std::min(w - 1, x + 1);
      const int ym = std::max(0, y - 1), yp = std::min(h - 1, y + 1);
      const double lxx = smoothed(y, xp) - 2.0 * smoothed(y, x) + smoothed(y, xm);
      const double lyy = smoothed(yp, x) - 2.0 * smoothed(y, x) + smoothed(ym, x);
      lm.log_abs(y, x) = s2 * std::abs(lxx + lyy);
    }
  }
  return lm;
}

// Quadratic sub-pixel offset from a 1-D triple, clamped to [-0.5, 0.5].
double parabola_offset(double left, double center, double right) {
  const double denom = 2.0 * (2.0 * center - left - right);
  if (std::abs(denom) < 1e-18) return 0.0;
  return std::clamp((right - left) / denom, -0.5, 0.5);
}

}  // namespace

std::vector<Keypoint> detect_harris_laplace(const Raster& gray, const DetectorParams& params) {
  if (gray.channels() != 1) throw DomainError("detect_harris_laplace requires a single-channel raster");
  const int w = gray.width();
  const int h = gray.height();
  if (std::min(w, h) < 16) {
    throw DetectionError("image too small for detection (min dimension 16)");
  }

  const ImagePlane base = gray.plane(0);
  std::vector<LevelMaps> levels;
  levels.reserve(params.levels);
  for (int l = 0; l < params.levels; ++l) {
    const double sigma_d = params.sigma0 * std::pow(params.scale_factor, l);
    levels.push_back(build_level(base, sigma_d, params.integration_ratio, params.harris_kappa));
  }

  double max_response = 0.0;
  for (const auto& lm : levels) max_response = std::max(max_response, lm.harris.maxCoeff());
  if (max_response <= 0.0) return {};  // degenerate (constant) image

  // One entry per (pixel, selected level); later duplicates keep the higher
  // response.
  std::map<std::tuple<int, int, int>, Keypoint> unique;

  for (int l = 0; l < params.levels; ++l) {
    const auto& hm = levels[l].harris;
    for (int y = 1; y < h - 1; ++y) {
      for (int x = 1; x < w - 1; ++x) {
        const double r = hm(y, x);
        if (r / max_response < params.response_threshold) continue;
        // 3x3 maximum; plateau ties keep only the first pixel in scan order
        bool is_max = true;
        for (int dy = -1; dy <= 1 && is_max; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const double nb = hm(y + dy, x + dx);
            const bool precedes = dy < 0 || (dy == 0 && dx < 0);
            if (nb > r || (nb == r && precedes)) {
              is_max = false;
              break;
            }
          }
        }
        if (!is_max) continue;

        // Laplacian scale selection: the characteristic scale is the level
        // where the scale-normalized |LoG| at this position peaks against its
        // two neighbors (3-level comparison). The peak nearest the detection
        // level wins so fine structure keeps fine scales; points without an
        // interior peak are dropped.
        int peak_level = -1;
        for (int m = 1; m + 1 < params.levels; ++m) {
          const double cur = levels[m].log_abs(y, x);
          if (cur > levels[m - 1].log_abs(y, x) && cur > levels[m + 1].log_abs(y, x)) {
            if (peak_level < 0 || std::abs(m - l) < std::abs(peak_level - l)) {
              peak_level = m;
            }
          }
        }
        if (peak_level < 0) continue;

        Keypoint kp;
        kp.x = x + parabola_offset(hm(y, x - 1), r, hm(y, x + 1));
        kp.y = y + parabola_offset(hm(y - 1, x), r, hm(y + 1, x));
        kp.scale = levels[peak_level].sigma_d;
        kp.response = r / max_response;

        auto [it, inserted] = unique.try_emplace({x, y, peak_level}, kp);
        if (!inserted && kp.response > it->second.response) it->second = kp;
      }
    }
  }
  std::vector<Keypoint> found;
  found.reserve(unique.size());
  for (const auto& [key, kp] : unique) found.push_back(kp);

  std::sort(found.begin(), found.end(), [](const Keypoint& a, const Keypoint& b) {
    if (a.response != b.response) return a.response > b.response;
    if (a.y != b.y) return a.y < b.y;
    if (a.x != b.x) return a.x < b.x;
    return a.scale < b.scale;
  });
  if (static_cast<int>(found.size()) > params.max_points) {
    found.resize(params.max_points);
  }
  return found;
}

std::vector<CorpusPointRef> sample_corpus_points(const std::vector<std::vector<Keypoint>>& per_image,
                                                 const PointBudget& budget, std::uint64_t seed) {
  if (budget.total < 1) throw DomainError("point budget must be >= 1");
  if (per_image.empty()) throw SamplingError("empty corpus");

  std::int64_t total = 0;
  for (const auto& kps : per_image) total += static_cast<std::int64_t>(kps.size());
  if (total == 0) throw SamplingError("corpus has no keypoints");

  std::vector<CorpusPointRef> out;
  if (total <= budget.total) {
    out.reserve(static_cast<std::size_t>(total));
    for (int i = 0; i < static_cast<int>(per_image.size()); ++i) {
      for (int j = 0; j < static_cast<int>(per_image[i].size()); ++j) out.push_back({i, j});
    }
    return out;
  }

  // Largest-remainder apportionment of the budget across images.
  const int n_images = static_cast<int>(per_image.size());
  std::vector<std::int64_t> quota(n_images, 0);
  std::vector<std::pair<double, int>> remainders;
  std::int64_t assigned = 0;
  for (int i = 0; i < n_images; ++i) {
    const double exact = static_cast<double>(budget.total) * per_image[i].size() / total;
    quota[i] = static_cast<std::int64_t>(std::floor(exact));
    quota[i] = std::min<std::int64_t>(quota[i], per_image[i].size());
    assigned += quota[i];
    remainders.push_back({exact - std::floor(exact), i});
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (const auto& [rem, i] : remainders) {
    if (assigned >= budget.total) break;
    if (quota[i] < static_cast<std::int64_t>(per_image[i].size())) {
      ++quota[i];
      ++assigned;
    }
  }
  // leftover capacity (images that hit their size cap) is spilled in index order
  for (int i = 0; i < n_images && assigned < budget.total; ++i) {
    while (quota[i] < static_cast<std::int64_t>(per_image[i].size()) && assigned < budget.total) {
      ++quota[i];
      ++assigned;
    }
  }

  Rng rng(seed);
  for (int i = 0; i < n_images; ++i) {
    const auto m = static_cast<std::int64_t>(per_image[i].size());
    if (quota[i] == 0) continue;
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    // partial Fisher-Yates: first quota[i] entries are a uniform subset
    for (std::int64_t j = 0; j < quota[i]; ++j) {
      const auto pick = j + static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(m - j)));
      std::swap(idx[j], idx[pick]);
    }
    std::vector<int> chosen(idx.begin(), idx.begin() + quota[i]);
    std::sort(chosen.begin(), chosen.end());
    for (int j : chosen) out.push_back({i, j});
  }
  return out;
}

}  // namespace foodrec
