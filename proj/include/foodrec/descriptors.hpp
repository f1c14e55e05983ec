#pragma once

#include <array>
#include <map>
#include <vector>

#include "foodrec/imaging.hpp"
#include "foodrec/interest.hpp"

namespace foodrec {

enum class Channel : int {
  Sift = 0,
  RgbSift = 1,
  OppSift = 2,
  CSift = 3,
  HueHist = 4,
  ColorMomentInv = 5,
};

constexpr int kChannelCount = 6;

constexpr std::array<Channel, kChannelCount> kAllChannels = {
    Channel::Sift, Channel::RgbSift, Channel::OppSift,
    Channel::CSift, Channel::HueHist, Channel::ColorMomentInv};

int channel_dim(Channel c);
const char* channel_name(Channel c);
Channel channel_from_name(const std::string& name);

/// Caches per-scale smoothed gradients of one intensity plane so repeated
/// keypoints at the same pyramid level share work. Not thread-safe; use one
/// instance per thread.
class SiftExtractor {
 public:
  explicit SiftExtractor(const Raster& single_channel);

  /// Peak orientation plus any >=80%-of-peak secondary peaks, strongest first.
  /// A gradient-free patch yields {0.0}.
  std::vector<double> dominant_orientations(const Keypoint& kp) const;

  /// 128-d SIFT for the given patch orientation: 4x4 cells x 8 bins, patch
  /// half-width 3*scale in the rotated frame, Gaussian window sigma = half
  /// the patch radius, trilinear interpolation, L2-normalize then clamp at
  /// 0.2 / renormalize to a fixed point. Zero vector when the patch has no
  /// gradient energy.
  Vec describe(const Keypoint& kp, double orientation) const;

 private:
  struct GradientPlanes {
    ImagePlane mag;
    ImagePlane angle;
  };
  const GradientPlanes& planes_for(double sigma) const;

  int width_ = 0;
  int height_ = 0;
  ImagePlane plane_;
  mutable std::map<std::int64_t, GradientPlanes> cache_;
};

/// SIFT at the dominant orientation of the keypoint's own patch.
Vec describe_sift(const Raster& gray, const Keypoint& kp);

/// Per-plane SIFT concatenation (384-d) for RGB, OPPONENT or C_INVARIANT
/// rasters; each 128-block is describe_sift on that plane.
Vec describe_color_sift(const Raster& img, const Keypoint& kp);

/// Saturation-weighted 36-bin hue histogram over the circular patch of
/// radius 3*scale; L1-normalized, zero when total weight <= 1e-12.
Vec describe_hue_histogram(const Raster& hsv, const Keypoint& kp);

/// Inclusive pixel rectangle.
struct PatchRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool empty() const { return x1 < x0 || y1 < y0; }
};

struct GeneralizedMoment {
  int p = 0, q = 0, a = 0, b = 0, c = 0;
  double value = 0.0;
};

/// Mean over region pixels of xh^p yh^q R^a G^b B^c with patch-centered
/// coordinates rescaled to [-1,1]; M_00^000 = 1 by construction.
GeneralizedMoment compute_generalized_moment(const Raster& rgb, const PatchRect& region,
                                             int p, int q, int a, int b, int c);

/// 21 ratios of generalized moments over the square patch of side 6*scale,
/// invariant to independent per-band scaling. Order: for each band R,G,B the
/// six ratios M00^2u/(M00^u)^2, M10^u/M00^u, M01^u/M00^u, M20^u/M00^u,
/// M02^u/M00^u, M11^u/M00^u; then M00^{u+v}/(M00^u M00^v) for the pairs
/// RG, RB, GB. Denominators get +1e-9, results clamped to [-10,10].
Vec describe_color_moment_invariants(const Raster& rgb, const Keypoint& kp);

struct DescriptorBundle {
  std::array<Mat, kChannelCount> rows;  // one matrix per channel, keypoints x dim
  std::vector<Keypoint> keypoints;      // back-references, post orientation duplication

  int count() const { return static_cast<int>(keypoints.size()); }
};

/// Full six-channel extraction for one RGB image. Derives the gray / HSV /
/// opponent / C-invariant rasters, drops keypoints whose SIFT patch lies
/// >75% outside the image, and duplicates rows for secondary orientations
/// (orientations taken from the gray plane and shared across the SIFT-family
/// channels so rows stay aligned).
DescriptorBundle describe_all(const Raster& rgb, const std::vector<Keypoint>& keypoints);

}  // namespace foodrec
