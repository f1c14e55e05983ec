#include "foodrec/imaging.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace foodrec {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kSqrt6 = 2.449489742783178;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

const char* color_space_name(ColorSpace cs) {
  switch (cs) {
    case ColorSpace::Rgb: return "RGB";
    case ColorSpace::Gray: return "GRAY";
    case ColorSpace::Hsv: return "HSV";
    case ColorSpace::Opponent: return "OPPONENT";
    case ColorSpace::CInvariant: return "C_INVARIANT";
  }
  return "?";
}

Raster::Raster(int width, int height, int channels, ColorSpace space)
    : width_(width), height_(height), channels_(channels), space_(space),
      data_(static_cast<std::size_t>(width) * height * channels, 0.0) {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3)) {
    throw DomainError("raster dimensions must be positive with 1 or 3 channels");
  }
}

Raster Raster::constant(int width, int height, int channels, ColorSpace space, double value) {
  Raster r(width, height, channels, space);
  std::fill(r.data_.begin(), r.data_.end(), value);
  return r;
}

Raster Raster::channel_as_gray(int c) const {
  Raster out(width_, height_, 1, ColorSpace::Gray);
  const std::size_t n = plane_size();
  std::copy_n(data_.data() + static_cast<std::size_t>(c) * n, n, out.data_.data());
  return out;
}

void Raster::validate() const {
  if (data_.size() != plane_size() * static_cast<std::size_t>(channels_)) {
    throw DomainError("raster data length mismatch");
  }
  for (double v : data_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw DomainError("raster sample outside [0,1]");
    }
  }
}

// ---------------------------------------------------------------------------
// File loading

namespace {

Raster from_rgb8(const std::vector<unsigned char>& interleaved, int w, int h) {
  Raster r(w, h, 3, ColorSpace::Rgb);
  const std::size_t n = r.plane_size();
  double* red = r.data().data();
  double* green = red + n;
  double* blue = green + n;
  for (std::size_t i = 0; i < n; ++i) {
    red[i] = interleaved[3 * i] / 255.0;
    green[i] = interleaved[3 * i + 1] / 255.0;
    blue[i] = interleaved[3 * i + 2] / 255.0;
  }
  return r;
}

int ppm_next_token(std::istream& in, std::string& tok) {
  tok.clear();
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (std::isspace(ch)) {
      ch = in.get();
    } else {
      break;
    }
  }
  while (ch != EOF && !std::isspace(ch)) {
    tok.push_back(static_cast<char>(ch));
    ch = in.get();
  }
  return tok.empty() ? EOF : 0;
}

Raster load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string tok;
  if (ppm_next_token(in, tok) == EOF || tok != "P6") {
    throw FormatError("not a P6 PPM: " + path.string());
  }
  long vals[3];
  for (long& v : vals) {
    if (ppm_next_token(in, tok) == EOF) throw FormatError("truncated PPM header: " + path.string());
    try {
      v = std::stol(tok);
    } catch (const std::exception&) {
      throw FormatError("bad PPM header token '" + tok + "' in " + path.string());
    }
  }
  const long w = vals[0], h = vals[1], maxval = vals[2];
  if (w <= 0 || h <= 0) throw FormatError("bad PPM dimensions in " + path.string());
  if (maxval != 255) throw FormatError("PPM maxval must be 255 (8-bit) in " + path.string());
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw FormatError("truncated PPM pixel data in " + path.string());
  }
  return from_rgb8(buf, static_cast<int>(w), static_cast<int>(h));
}

Raster load_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw FormatError("PNG read failed: " + std::string(image.message));
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw FormatError("PNG decode failed: " + msg);
  }
  return from_rgb8(buf, static_cast<int>(image.width), static_cast<int>(image.height));
}

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

Raster load_jpeg(const std::filesystem::path& path) {
  std::FILE* fp = std::fopen(path.string().c_str(), "rb");
  if (!fp) throw IoError("cannot open " + path.string());

  jpeg_decompress_struct cinfo;
  JpegErrorMgr jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    std::fclose(fp);
    throw FormatError("JPEG decode failed: " + std::string(jerr.message));
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, fp);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;  // promotes grayscale to RGB
  jpeg_start_decompress(&cinfo);

  const int w = static_cast<int>(cinfo.output_width);
  const int h = static_cast<int>(cinfo.output_height);
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    unsigned char* row = buf.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  std::fclose(fp);
  return from_rgb8(buf, w, h);
}

}  // namespace

Raster load_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path.string());
  unsigned char magic[8] = {0};
  probe.read(reinterpret_cast<char*>(magic), sizeof(magic));
  if (probe.gcount() < 2) throw FormatError("file too short: " + path.string());
  probe.close();

  if (magic[0] == 'P' && magic[1] == '6') return load_ppm(path);
  if (magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G') return load_png(path);
  if (magic[0] == 0xFF && magic[1] == 0xD8) return load_jpeg(path);

  std::string ext = path.extension().string();
  throw FormatError("unsupported image format '" + (ext.empty() ? "unknown" : ext) +
                    "' for " + path.string());
}

void save_ppm(const std::filesystem::path& path, const Raster& rgb) {
  if (rgb.channels() != 3) throw DomainError("save_ppm expects 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << rgb.width() << " " << rgb.height() << "\n255\n";
  const std::size_t n = rgb.plane_size();
  std::vector<unsigned char> buf(n * 3);
  const double* red = rgb.data().data();
  const double* green = red + n;
  const double* blue = green + n;
  for (std::size_t i = 0; i < n; ++i) {
    buf[3 * i] = static_cast<unsigned char>(std::lround(clamp01(red[i]) * 255.0));
    buf[3 * i + 1] = static_cast<unsigned char>(std::lround(clamp01(green[i]) * 255.0));
    buf[3 * i + 2] = static_cast<unsigned char>(std::lround(clamp01(blue[i]) * 255.0));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("short write to " + path.string());
}

void save_mask_png(const std::filesystem::path& path, const std::vector<std::uint8_t>& mask,
                   int width, int height) {
  if (mask.size() != static_cast<std::size_t>(width) * height) {
    throw DomainError("mask size does not match dimensions");
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_GRAY;
  std::vector<unsigned char> buf(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) buf[i] = mask[i] ? 255 : 0;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buf.data(), 0, nullptr)) {
    throw IoError("PNG write failed: " + std::string(image.message));
  }
}

// ---------------------------------------------------------------------------
// Color transforms

namespace {

void require_rgb(const Raster& r, const char* op) {
  if (r.channels() != 3 || r.space() != ColorSpace::Rgb) {
    throw DomainError(std::string(op) + " requires an RGB raster, got " +
                      color_space_name(r.space()));
  }
}

}  // namespace

Raster to_gray(const Raster& rgb) {
  require_rgb(rgb, "to_gray");
  Raster out(rgb.width(), rgb.height(), 1, ColorSpace::Gray);
  const std::size_t n = rgb.plane_size();
  const double* r = rgb.data().data();
  const double* g = r + n;
  const double* b = g + n;
  double* y = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = clamp01(0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i]);
  }
  return out;
}

Raster to_hsv(const Raster& rgb) {
  require_rgb(rgb, "to_hsv");
  Raster out(rgb.width(), rgb.height(), 3, ColorSpace::Hsv);
  const std::size_t n = rgb.plane_size();
  const double* r = rgb.data().data();
  const double* g = r + n;
  const double* b = g + n;
  double* hp = out.data().data();
  double* sp = hp + n;
  double* vp = sp + n;
  for (std::size_t i = 0; i < n; ++i) {
    const double mx = std::max({r[i], g[i], b[i]});
    const double mn = std::min({r[i], g[i], b[i]});
    const double d = mx - mn;
    double h = 0.0, s = 0.0;
    if (d > 0.0) {
      if (mx == r[i]) {
        h = (g[i] - b[i]) / d;
        if (h < 0) h += 6.0;
      } else if (mx == g[i]) {
        h = (b[i] - r[i]) / d + 2.0;
      } else {
        h = (r[i] - g[i]) / d + 4.0;
      }
      h /= 6.0;
      if (h >= 1.0) h -= 1.0;
      s = d / mx;
    }
    hp[i] = h;
    sp[i] = s;
    vp[i] = mx;
  }
  return out;
}

Raster hsv_to_rgb(const Raster& hsv) {
  if (hsv.channels() != 3 || hsv.space() != ColorSpace::Hsv) {
    throw DomainError("hsv_to_rgb requires an HSV raster");
  }
  Raster out(hsv.width(), hsv.height(), 3, ColorSpace::Rgb);
  const std::size_t n = hsv.plane_size();
  const double* hp = hsv.data().data();
  const double* sp = hp + n;
  const double* vp = sp + n;
  double* r = out.data().data();
  double* g = r + n;
  double* b = g + n;
  for (std::size_t i = 0; i < n; ++i) {
    const double h6 = hp[i] * 6.0;
    const int sector = std::min(5, static_cast<int>(h6));
    const double f = h6 - sector;
    const double v = vp[i];
    const double p = v * (1.0 - sp[i]);
    const double q = v * (1.0 - sp[i] * f);
    const double t = v * (1.0 - sp[i] * (1.0 - f));
    double rr, gg, bb;
    switch (sector) {
      case 0: rr = v; gg = t; bb = p; break;
      case 1: rr = q; gg = v; bb = p; break;
      case 2: rr = p; gg = v; bb = t; break;
      case 3: rr = p; gg = q; bb = v; break;
      case 4: rr = t; gg = p; bb = v; break;
      default: rr = v; gg = p; bb = q; break;
    }
    r[i] = clamp01(rr);
    g[i] = clamp01(gg);
    b[i] = clamp01(bb);
  }
  return out;
}

Raster to_opponent(const Raster& rgb) {
  require_rgb(rgb, "to_opponent");
  Raster out(rgb.width(), rgb.height(), 3, ColorSpace::Opponent);
  const std::size_t n = rgb.plane_size();
  const double* r = rgb.data().data();
  const double* g = r + n;
  const double* b = g + n;
  double* o1 = out.data().data();
  double* o2 = o1 + n;
  double* o3 = o2 + n;
  constexpr double c1 = 1.0 / kSqrt2;  // analytic extreme of O1
  constexpr double c2 = 2.0 / kSqrt6;  // analytic extreme of O2
  for (std::size_t i = 0; i < n; ++i) {
    const double v1 = (r[i] - g[i]) / kSqrt2;
    const double v2 = (r[i] + g[i] - 2.0 * b[i]) / kSqrt6;
    const double v3 = (r[i] + g[i] + b[i]) / kSqrt3;
    o1[i] = clamp01((v1 + c1) / (2.0 * c1));
    o2[i] = clamp01((v2 + c2) / (2.0 * c2));
    o3[i] = clamp01(v3 / kSqrt3);
  }
  return out;
}

Raster to_c_invariant(const Raster& rgb) {
  require_rgb(rgb, "to_c_invariant");
  Raster out(rgb.width(), rgb.height(), 3, ColorSpace::CInvariant);
  const std::size_t n = rgb.plane_size();
  const double* r = rgb.data().data();
  const double* g = r + n;
  const double* b = g + n;
  double* c1p = out.data().data();
  double* c2p = c1p + n;
  double* c3p = c2p + n;
  constexpr double eps = 1e-6;
  constexpr double band = 3.0;  // clamp band for the ratio channels
  for (std::size_t i = 0; i < n; ++i) {
    const double v1 = (r[i] - g[i]) / kSqrt2;
    const double v2 = (r[i] + g[i] - 2.0 * b[i]) / kSqrt6;
    const double v3 = (r[i] + g[i] + b[i]) / kSqrt3;
    const double q1 = std::clamp(v1 / (v3 + eps), -band, band);
    const double q2 = std::clamp(v2 / (v3 + eps), -band, band);
    c1p[i] = (q1 + band) / (2.0 * band);
    c2p[i] = (q2 + band) / (2.0 * band);
    c3p[i] = clamp01(v3 / kSqrt3);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Filtering

ImagePlane gaussian_blur(const Eigen::Ref<const ImagePlane>& src, double sigma,
                         BorderMode border) {
  const int h = static_cast<int>(src.rows());
  const int w = static_cast<int>(src.cols());
  if (sigma <= 0.0) return src;

  int radius = static_cast<int>(std::ceil(3.0 * sigma));
  radius = std::max(1, std::min(radius, std::max(w, h)));
  Eigen::VectorXd kernel(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
  }
  kernel /= kernel.sum();

  auto fold = [](int idx, int size) {
    // reflect-101: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
    if (size == 1) return 0;
    const int period = 2 * (size - 1);
    idx = std::abs(idx) % period;
    return idx < size ? idx : period - idx;
  };

  ImagePlane tmp(h, w);
  // horizontal pass
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int xx = x + k;
        if (border == BorderMode::Zero) {
          if (xx < 0 || xx >= w) continue;
          acc += kernel[k + radius] * src(y, xx);
        } else {
          acc += kernel[k + radius] * src(y, fold(xx, w));
        }
      }
      tmp(y, x) = acc;
    }
  }
  ImagePlane out(h, w);
  // vertical pass
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int yy = y + k;
        if (border == BorderMode::Zero) {
          if (yy < 0 || yy >= h) continue;
          acc += kernel[k + radius] * tmp(yy, x);
        } else {
          acc += kernel[k + radius] * tmp(fold(yy, h), x);
        }
      }
      out(y, x) = acc;
    }
  }
  return out;
}

}  // namespace foodrec
