#pragma once

// Minimal libjpeg-based encoder for tests: writes a raster as JPEG and can
// embed an EXIF APP1 payload so the geotag path sees a real camera-style file.

#include <jpeglib.h>

#include <cstdio>
#include <filesystem>
#include <vector>

#include "foodrec/imaging.hpp"

namespace foodrec::testing {

inline void write_jpeg(const std::filesystem::path& path, const Raster& rgb,
                       const std::vector<unsigned char>& app1_payload = {}, int quality = 95) {
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw IoError("cannot write " + path.string());

  jpeg_compress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, fp);

  cinfo.image_width = static_cast<JDIMENSION>(rgb.width());
  cinfo.image_height = static_cast<JDIMENSION>(rgb.height());
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);

  if (!app1_payload.empty()) {
    jpeg_write_marker(&cinfo, JPEG_APP0 + 1, app1_payload.data(),
                      static_cast<unsigned int>(app1_payload.size()));
  }

  const std::size_t n = rgb.plane_size();
  std::vector<unsigned char> row(static_cast<std::size_t>(rgb.width()) * 3);
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = rgb.data()[static_cast<std::size_t>(c) * n +
                                    static_cast<std::size_t>(y) * rgb.width() + x];
        row[static_cast<std::size_t>(x) * 3 + c] =
            static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
      }
    }
    unsigned char* rows[1] = {row.data()};
    jpeg_write_scanlines(&cinfo, rows, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::fclose(fp);
}

}  // namespace foodrec::testing
