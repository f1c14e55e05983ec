#include "foodrec/descriptors.hpp"

#include <algorithm>
#include <cmath>

namespace foodrec {

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kTwoPi = 6.283185307179586;
constexpr double kPatchRadiusFactor = 3.0 * 1.4142135623730951;  // 3*scale*sqrt(2)

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a;
}

}  // namespace

int channel_dim(Channel c) {
  switch (c) {
    case Channel::Sift: return 128;
    case Channel::RgbSift: return 384;
    case Channel::OppSift: return 384;
    case Channel::CSift: return 384;
    case Channel::HueHist: return 36;
    case Channel::ColorMomentInv: return 21;
  }
  throw DomainError("unknown descriptor channel");
}

const char* channel_name(Channel c) {
  switch (c) {
    case Channel::Sift: return "SIFT";
    case Channel::RgbSift: return "RGB_SIFT";
    case Channel::OppSift: return "OPP_SIFT";
    case Channel::CSift: return "C_SIFT";
    case Channel::HueHist: return "HUE_HIST";
    case Channel::ColorMomentInv: return "COLOR_MOMENT_INV";
  }
  throw DomainError("unknown descriptor channel");
}

Channel channel_from_name(const std::string& name) {
  for (Channel c : kAllChannels) {
    if (name == channel_name(c)) return c;
  }
  throw DomainError("unknown descriptor channel name: " + name);
}

// ---------------------------------------------------------------------------
// SIFT

SiftExtractor::SiftExtractor(const Raster& single_channel)
    : width_(single_channel.width()), height_(single_channel.height()),
      plane_(single_channel.plane(0)) {
  if (single_channel.channels() != 1) {
    throw DomainError("SiftExtractor requires a single-channel raster");
  }
}

const SiftExtractor::GradientPlanes& SiftExtractor::planes_for(double sigma) const {
  std::int64_t key;
  static_assert(sizeof(key) == sizeof(sigma));
  std::memcpy(&key, &sigma, sizeof(key));
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;

  // Patches past the image border are zero-padded, so the blur and the
  // gradients use zero padding as well.
  ImagePlane smoothed = gaussian_blur(plane_, sigma, BorderMode::Zero);
  GradientPlanes gp;
  gp.mag.resize(height_, width_);
  gp.angle.resize(height_, width_);
  auto sample = [&](int x, int y) {
    if (x < 0 || x >= width_ || y < 0 || y >= height_) return 0.0;
    return smoothed(y, x);
  };
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const double dx = 0.5 * (sample(x + 1, y) - sample(x - 1, y));
      const double dy = 0.5 * (sample(x, y + 1) - sample(x, y - 1));
      gp.mag(y, x) = std::hypot(dx, dy);
      gp.angle(y, x) = wrap_angle(std::atan2(dy, dx));
    }
  }
  return cache_.emplace(key, std::move(gp)).first->second;
}

std::vector<double> SiftExtractor::dominant_orientations(const Keypoint& kp) const {
  if (kp.x < 0 || kp.x >= width_ || kp.y < 0 || kp.y >= height_) {
    throw DomainError("keypoint outside image");
  }
  const auto& gp = planes_for(kp.scale);

  constexpr int kBins = 36;
  const double window_sigma = 1.5 * kp.scale;
  const double radius = 3.0 * window_sigma;
  std::array<double, kBins> hist{};

  const int x0 = std::max(0, static_cast<int>(std::floor(kp.x - radius)));
  const int x1 = std::min(width_ - 1, static_cast<int>(std::ceil(kp.x + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(kp.y - radius)));
  const int y1 = std::min(height_ - 1, static_cast<int>(std::ceil(kp.y + radius)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double du = x - kp.x;
      const double dv = y - kp.y;
      const double r2 = du * du + dv * dv;
      if (r2 > radius * radius) continue;
      const double w = std::exp(-r2 / (2.0 * window_sigma * window_sigma));
      const int bin = std::min(kBins - 1, static_cast<int>(gp.angle(y, x) / kTwoPi * kBins));
      hist[bin] += w * gp.mag(y, x);
    }
  }

  // circular [1 1 1]/3 smoothing, applied six times as usual
  for (int pass = 0; pass < 6; ++pass) {
    std::array<double, kBins> s{};
    for (int i = 0; i < kBins; ++i) {
      s[i] = (hist[(i + kBins - 1) % kBins] + hist[i] + hist[(i + 1) % kBins]) / 3.0;
    }
    hist = s;
  }

  const double peak = *std::max_element(hist.begin(), hist.end());
  if (peak <= 0.0) return {0.0};

  std::vector<std::pair<double, double>> peaks;  // (value, angle)
  for (int i = 0; i < kBins; ++i) {
    const double l = hist[(i + kBins - 1) % kBins];
    const double c = hist[i];
    const double r = hist[(i + 1) % kBins];
    if (c > l && c > r && c >= 0.8 * peak) {
      const double denom = l - 2.0 * c + r;
      const double off = std::abs(denom) > 1e-18 ? std::clamp(0.5 * (l - r) / denom, -0.5, 0.5) : 0.0;
      peaks.push_back({c, wrap_angle((i + 0.5 + off) / kBins * kTwoPi)});
    }
  }
  if (peaks.empty()) return {0.0};
  std::sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<double> out;
  out.reserve(peaks.size());
  for (const auto& [v, ang] : peaks) out.push_back(ang);
  return out;
}

Vec SiftExtractor::describe(const Keypoint& kp, double orientation) const {
  if (kp.x < 0 || kp.x >= width_ || kp.y < 0 || kp.y >= height_) {
    throw DomainError("keypoint outside image");
  }
  const auto& gp = planes_for(kp.scale);

  constexpr int kCells = 4;
  constexpr int kOriBins = 8;
  const double cell = 1.5 * kp.scale;                 // cell side in pixels
  const double patch_radius = kPatchRadiusFactor * kp.scale;
  const double win_sigma = 0.5 * patch_radius;
  const double cos_t = std::cos(orientation);
  const double sin_t = std::sin(orientation);

  double hist[kCells][kCells][kOriBins] = {};

  const int x0 = std::max(0, static_cast<int>(std::floor(kp.x - patch_radius)));
  const int x1 = std::min(width_ - 1, static_cast<int>(std::ceil(kp.x + patch_radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(kp.y - patch_radius)));
  const int y1 = std::min(height_ - 1, static_cast<int>(std::ceil(kp.y + patch_radius)));

  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - kp.x;
      const double dy = y - kp.y;
      // rotated frame coordinates in cell units, origin at patch center
      const double u = (dx * cos_t + dy * sin_t) / cell;
      const double v = (-dx * sin_t + dy * cos_t) / cell;
      const double cbin = u + 0.5 * kCells - 0.5;
      const double rbin = v + 0.5 * kCells - 0.5;
      if (cbin <= -1.0 || cbin >= kCells || rbin <= -1.0 || rbin >= kCells) continue;

      const double mag = gp.mag(y, x);
      if (mag <= 0.0) continue;
      const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * win_sigma * win_sigma));
      const double theta = wrap_angle(gp.angle(y, x) - orientation);
      const double obin = theta / kTwoPi * kOriBins;

      const int c0 = static_cast<int>(std::floor(cbin));
      const int r0 = static_cast<int>(std::floor(rbin));
      const int o0 = static_cast<int>(std::floor(obin)) % kOriBins;
      const double fc = cbin - std::floor(cbin);
      const double fr = rbin - std::floor(rbin);
      const double fo = obin - std::floor(obin);

      for (int dr = 0; dr <= 1; ++dr) {
        const int rr = r0 + dr;
        if (rr < 0 || rr >= kCells) continue;
        const double wr = dr ? fr : 1.0 - fr;
        for (int dc = 0; dc <= 1; ++dc) {
          const int cc = c0 + dc;
          if (cc < 0 || cc >= kCells) continue;
          const double wc = dc ? fc : 1.0 - fc;
          for (int doo = 0; doo <= 1; ++doo) {
            const int oo = (o0 + doo) % kOriBins;
            const double wo = doo ? fo : 1.0 - fo;
            hist[rr][cc][oo] += mag * w * wr * wc * wo;
          }
        }
      }
    }
  }

  Vec desc(128);
  int k = 0;
  for (int r = 0; r < kCells; ++r) {
    for (int c = 0; c < kCells; ++c) {
      for (int o = 0; o < kOriBins; ++o) desc[k++] = hist[r][c][o];
    }
  }

  const double energy = desc.squaredNorm();
  if (energy < 1e-12) return Vec::Zero(128);
  desc /= std::sqrt(energy);
  // clamp/renormalize to a fixed point so the ceiling survives the final
  // normalization (a handful of passes on concentrated histograms)
  for (int pass = 0; pass < 50 && desc.maxCoeff() > 0.2 + 1e-6; ++pass) {
    desc = desc.cwiseMin(0.2);
    const double n = desc.norm();
    if (n <= 0.0) break;
    desc /= n;
  }
  return desc;
}

Vec describe_sift(const Raster& gray, const Keypoint& kp) {
  SiftExtractor ex(gray);
  return ex.describe(kp, ex.dominant_orientations(kp)[0]);
}

Vec describe_color_sift(const Raster& img, const Keypoint& kp) {
  if (img.channels() != 3 ||
      (img.space() != ColorSpace::Rgb && img.space() != ColorSpace::Opponent &&
       img.space() != ColorSpace::CInvariant)) {
    throw DomainError("describe_color_sift requires an RGB, OPPONENT or C_INVARIANT raster");
  }
  Vec out(384);
  for (int c = 0; c < 3; ++c) {
    out.segment(128 * c, 128) = describe_sift(img.channel_as_gray(c), kp);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hue histogram

Vec describe_hue_histogram(const Raster& hsv, const Keypoint& kp) {
  if (hsv.channels() != 3 || hsv.space() != ColorSpace::Hsv) {
    throw DomainError("describe_hue_histogram requires an HSV raster");
  }
  const int w = hsv.width(), h = hsv.height();
  if (kp.x < 0 || kp.x >= w || kp.y < 0 || kp.y >= h) {
    throw DomainError("keypoint outside image");
  }
  constexpr int kBins = 36;
  Vec hist = Vec::Zero(kBins);
  const double radius = 3.0 * kp.scale;
  const int x0 = std::max(0, static_cast<int>(std::floor(kp.x - radius)));
  const int x1 = std::min(w - 1, static_cast<int>(std::ceil(kp.x + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(kp.y - radius)));
  const int y1 = std::min(h - 1, static_cast<int>(std::ceil(kp.y + radius)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double du = x - kp.x, dv = y - kp.y;
      if (du * du + dv * dv > radius * radius) continue;
      const double hue = hsv.at(x, y, 0);
      const double sat = hsv.at(x, y, 1);
      const int bin = std::min(kBins - 1, static_cast<int>(hue * kBins));
      hist[bin] += sat;
    }
  }
  const double total = hist.sum();
  if (total <= 1e-12) return Vec::Zero(kBins);
  return hist / total;
}

// ---------------------------------------------------------------------------
// Generalized color moments

namespace {

void check_rect(const Raster& rgb, const PatchRect& r) {
  if (r.empty()) throw DomainError("empty moment region");
  if (r.x0 < 0 || r.y0 < 0 || r.x1 >= rgb.width() || r.y1 >= rgb.height()) {
    throw DomainError("moment region outside image");
  }
}

double axis_coord(int i, int lo, int hi) {
  // patch-centered coordinate rescaled to [-1, 1]
  if (hi == lo) return 0.0;
  return 2.0 * (i - lo) / (hi - lo) - 1.0;
}

}  // namespace

GeneralizedMoment compute_generalized_moment(const Raster& rgb, const PatchRect& region,
                                             int p, int q, int a, int b, int c) {
  if (rgb.channels() != 3) throw DomainError("moments require a 3-channel raster");
  if (p < 0 || p > 2 || q < 0 || q > 2 || a < 0 || a > 2 || b < 0 || b > 2 || c < 0 || c > 2) {
    throw DomainError("moment orders must lie in {0,1,2}");
  }
  check_rect(rgb, region);

  auto ipow = [](double v, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= v;
    return r;
  };

  double acc = 0.0;
  std::int64_t count = 0;
  for (int y = region.y0; y <= region.y1; ++y) {
    const double yh = axis_coord(y, region.y0, region.y1);
    for (int x = region.x0; x <= region.x1; ++x) {
      const double xh = axis_coord(x, region.x0, region.x1);
      acc += ipow(xh, p) * ipow(yh, q) * ipow(rgb.at(x, y, 0), a) * ipow(rgb.at(x, y, 1), b) *
             ipow(rgb.at(x, y, 2), c);
      ++count;
    }
  }
  return {p, q, a, b, c, acc / static_cast<double>(count)};
}

Vec describe_color_moment_invariants(const Raster& rgb, const Keypoint& kp) {
  if (rgb.channels() != 3 || rgb.space() != ColorSpace::Rgb) {
    throw DomainError("color moment invariants require an RGB raster");
  }
  const int w = rgb.width(), h = rgb.height();
  if (kp.x < 0 || kp.x >= w || kp.y < 0 || kp.y >= h) {
    throw DomainError("keypoint outside image");
  }
  const double half = 3.0 * kp.scale;
  PatchRect r;
  r.x0 = std::max(0, static_cast<int>(std::floor(kp.x - half)));
  r.x1 = std::min(w - 1, static_cast<int>(std::ceil(kp.x + half)));
  r.y0 = std::max(0, static_cast<int>(std::floor(kp.y - half)));
  r.y1 = std::min(h - 1, static_cast<int>(std::ceil(kp.y + half)));

  // Single pass accumulating every moment the 21 ratios need.
  double m00[3] = {};      // M_00 with exponent 1 on band u
  double m00sq[3] = {};    // M_00 with exponent 2 on band u
  double m10[3] = {}, m01[3] = {}, m20[3] = {}, m02[3] = {}, m11[3] = {};
  double mpair[3] = {};    // M_00 with exponent 1 on bands of pair {RG, RB, GB}
  std::int64_t count = 0;

  for (int y = r.y0; y <= r.y1; ++y) {
    const double yh = axis_coord(y, r.y0, r.y1);
    for (int x = r.x0; x <= r.x1; ++x) {
      const double xh = axis_coord(x, r.x0, r.x1);
      const double band[3] = {rgb.at(x, y, 0), rgb.at(x, y, 1), rgb.at(x, y, 2)};
      for (int u = 0; u < 3; ++u) {
        m00[u] += band[u];
        m00sq[u] += band[u] * band[u];
        m10[u] += xh * band[u];
        m01[u] += yh * band[u];
        m20[u] += xh * xh * band[u];
        m02[u] += yh * yh * band[u];
        m11[u] += xh * yh * band[u];
      }
      mpair[0] += band[0] * band[1];
      mpair[1] += band[0] * band[2];
      mpair[2] += band[1] * band[2];
      ++count;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(count);
  for (int u = 0; u < 3; ++u) {
    m00[u] *= inv_n;
    m00sq[u] *= inv_n;
    m10[u] *= inv_n;
    m01[u] *= inv_n;
    m20[u] *= inv_n;
    m02[u] *= inv_n;
    m11[u] *= inv_n;
  }
  for (double& v : mpair) v *= inv_n;

  constexpr double eps = 1e-9;
  auto ratio = [](double num, double den) {
    return std::clamp(num / (den + eps), -10.0, 10.0);
  };

  Vec out(21);
  int k = 0;
  for (int u = 0; u < 3; ++u) {
    out[k++] = ratio(m00sq[u], m00[u] * m00[u]);
    out[k++] = ratio(m10[u], m00[u]);
    out[k++] = ratio(m01[u], m00[u]);
    out[k++] = ratio(m20[u], m00[u]);
    out[k++] = ratio(m02[u], m00[u]);
    out[k++] = ratio(m11[u], m00[u]);
  }
  out[k++] = ratio(mpair[0], m00[0] * m00[1]);
  out[k++] = ratio(mpair[1], m00[0] * m00[2]);
  out[k++] = ratio(mpair[2], m00[1] * m00[2]);
  return out;
}

// ---------------------------------------------------------------------------
// Bundle extraction

DescriptorBundle describe_all(const Raster& rgb, const std::vector<Keypoint>& keypoints) {
  if (rgb.channels() != 3 || rgb.space() != ColorSpace::Rgb) {
    throw DomainError("describe_all requires an RGB raster");
  }
  const Raster gray = to_gray(rgb);
  const Raster hsv = to_hsv(rgb);
  const Raster opp = to_opponent(rgb);
  const Raster cinv = to_c_invariant(rgb);

  SiftExtractor gray_ex(gray);
  std::array<SiftExtractor, 3> rgb_ex = {SiftExtractor(rgb.channel_as_gray(0)),
                                         SiftExtractor(rgb.channel_as_gray(1)),
                                         SiftExtractor(rgb.channel_as_gray(2))};
  std::array<SiftExtractor, 3> opp_ex = {SiftExtractor(opp.channel_as_gray(0)),
                                         SiftExtractor(opp.channel_as_gray(1)),
                                         SiftExtractor(opp.channel_as_gray(2))};
  std::array<SiftExtractor, 3> cinv_ex = {SiftExtractor(cinv.channel_as_gray(0)),
                                          SiftExtractor(cinv.channel_as_gray(1)),
                                          SiftExtractor(cinv.channel_as_gray(2))};

  const int w = rgb.width(), h = rgb.height();

  struct Row {
    Keypoint kp;
    double orientation;
  };
  std::vector<Row> rows;
  for (const Keypoint& kp : keypoints) {
    if (kp.x < 0 || kp.x >= w || kp.y < 0 || kp.y >= h) continue;

    // drop keypoints whose patch is more than 75% outside the image
    const double r = kPatchRadiusFactor * kp.scale;
    const double area = (2.0 * r) * (2.0 * r);
    const double ix = std::max(0.0, std::min(kp.x + r, static_cast<double>(w)) - std::max(kp.x - r, 0.0));
    const double iy = std::max(0.0, std::min(kp.y + r, static_cast<double>(h)) - std::max(kp.y - r, 0.0));
    if (ix * iy < 0.25 * area) continue;

    for (double ori : gray_ex.dominant_orientations(kp)) {
      rows.push_back({kp, ori});
    }
  }

  DescriptorBundle bundle;
  const int n = static_cast<int>(rows.size());
  for (Channel c : kAllChannels) {
    bundle.rows[static_cast<int>(c)].resize(n, channel_dim(c));
  }
  bundle.keypoints.reserve(n);

  for (int i = 0; i < n; ++i) {
    const auto& [kp, ori] = rows[i];
    bundle.keypoints.push_back(kp);
    bundle.rows[static_cast<int>(Channel::Sift)].row(i) = gray_ex.describe(kp, ori).transpose();
    for (int c = 0; c < 3; ++c) {
      bundle.rows[static_cast<int>(Channel::RgbSift)].row(i).segment(128 * c, 128) =
          rgb_ex[c].describe(kp, ori).transpose();
      bundle.rows[static_cast<int>(Channel::OppSift)].row(i).segment(128 * c, 128) =
          opp_ex[c].describe(kp, ori).transpose();
      bundle.rows[static_cast<int>(Channel::CSift)].row(i).segment(128 * c, 128) =
          cinv_ex[c].describe(kp, ori).transpose();
    }
    bundle.rows[static_cast<int>(Channel::HueHist)].row(i) =
        describe_hue_histogram(hsv, kp).transpose();
    bundle.rows[static_cast<int>(Channel::ColorMomentInv)].row(i) =
        describe_color_moment_invariants(rgb, kp).transpose();
  }
  return bundle;
}

}  // namespace foodrec
