#pragma once

#include <filesystem>
#include <vector>

#include "foodrec/common.hpp"

namespace foodrec {

enum class ColorSpace { Rgb, Gray, Hsv, Opponent, CInvariant };

const char* color_space_name(ColorSpace cs);

/// Planar raster: one row-major plane per channel, samples in [0,1].
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels, ColorSpace space);

  static Raster constant(int width, int height, int channels, ColorSpace space, double value);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  ColorSpace space() const { return space_; }

  double at(int x, int y, int c) const {
    return data_[static_cast<std::size_t>(c) * plane_size() + static_cast<std::size_t>(y) * width_ + x];
  }
  double& at(int x, int y, int c) {
    return data_[static_cast<std::size_t>(c) * plane_size() + static_cast<std::size_t>(y) * width_ + x];
  }

  std::size_t plane_size() const { return static_cast<std::size_t>(width_) * height_; }

  Eigen::Map<const ImagePlane> plane(int c) const {
    return {data_.data() + static_cast<std::size_t>(c) * plane_size(), height_, width_};
  }
  Eigen::Map<ImagePlane> plane(int c) {
    return {data_.data() + static_cast<std::size_t>(c) * plane_size(), height_, width_};
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  /// Single channel extracted as a GRAY-tagged raster (shared-nothing copy).
  Raster channel_as_gray(int c) const;

  /// Checks the type invariants: sample count, finiteness, [0,1] range.
  void validate() const;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  ColorSpace space_ = ColorSpace::Rgb;
  std::vector<double> data_;
};

/// Loads PPM (P6, 8-bit), PNG or JPEG into an RGB raster, samples /255.
/// Grayscale files are promoted to RGB by channel replication.
Raster load_image(const std::filesystem::path& path);

/// P6 PPM writer, used by the synthetic-world generator and debug dumps.
void save_ppm(const std::filesystem::path& path, const Raster& rgb);

/// Grayscale PNG writer for --dump-masks debug output.
void save_mask_png(const std::filesystem::path& path, const std::vector<std::uint8_t>& mask,
                   int width, int height);

/// 0.299 R + 0.587 G + 0.114 B, clamped to [0,1].
Raster to_gray(const Raster& rgb);

/// Hexcone HSV; H scaled to [0,1), H=S=0 on the gray axis (max=min).
Raster to_hsv(const Raster& rgb);

/// Inverse of to_hsv for pixels with S>0; used for round-trip checks and
/// procedural texture generation.
Raster hsv_to_rgb(const Raster& hsv);

/// O1=(R-G)/sqrt2, O2=(R+G-2B)/sqrt6, O3=(R+G+B)/sqrt3. O1,O2 affinely
/// mapped to [0,1] by x -> (x+c)/(2c) with c the analytic extreme
/// (1/sqrt2 resp. 2/sqrt6); O3 divided by sqrt3.
Raster to_opponent(const Raster& rgb);

/// C-invariant: (O1/(O3+eps), O2/(O3+eps), O3/sqrt3) with eps=1e-6;
/// the first two ratios clamped to [-3,3] then mapped to [0,1].
Raster to_c_invariant(const Raster& rgb);

enum class BorderMode { Reflect101, Zero };

/// Separable Gaussian blur, kernel radius ceil(3*sigma).
ImagePlane gaussian_blur(const Eigen::Ref<const ImagePlane>& src, double sigma,
                         BorderMode border = BorderMode::Reflect101);

}  // namespace foodrec
