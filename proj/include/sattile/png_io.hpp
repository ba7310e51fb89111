#pragma once

// Lossless raster I/O. Only 8-bit RGB PNG is accepted; anything else
// (16-bit, gray, palette, alpha, interlaced) is rejected rather than converted.

#include <png.h>

#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "error.hpp"
#include "raster.hpp"

namespace sattile {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline bool has_png_extension(const std::string& path) {
  if (path.size() < 4) return false;
  std::string ext = path.substr(path.size() - 4);
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".png";
}

}  // namespace detail

inline PixelGrid read_png(const std::string& path) {
  if (!detail::has_png_extension(path)) throw Error(path + ": only lossless .png rasters are accepted");
  detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error("cannot open " + path);

  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw Error(path + ": not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("png_create_info_struct failed");
  }

  std::string failure;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(path + ": corrupt PNG");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  const int interlace = png_get_interlace_type(png, info);
  if (depth != 8) {
    failure = "bit depth " + std::to_string(depth) + " (need 8)";
  } else if (color != PNG_COLOR_TYPE_RGB) {
    failure = "color type " + std::to_string(color) + " (need RGB)";
  } else if (interlace != PNG_INTERLACE_NONE) {
    failure = "interlaced images are not supported";
  } else {
    data.resize(static_cast<std::size_t>(width) * height * 3);
    rows.resize(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) rows[y] = data.data() + static_cast<std::size_t>(y) * width * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!failure.empty()) throw Error(path + ": unsupported raster: " + failure);
  return PixelGrid(width, height, std::move(data));
}

/// Output is deterministic for a given grid (fixed filter and compression).
inline void write_png(const std::string& path, const PixelGrid& grid) {
  detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("failed writing " + path);
  }
  png_init_io(png, fp.get());
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_SUB);
  png_set_IHDR(png, info, static_cast<png_uint_32>(grid.width()), static_cast<png_uint_32>(grid.height()), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < grid.height(); ++y) {
    png_write_row(png, const_cast<png_bytep>(grid.row(y).data()));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(fp.get()) != 0) throw Error("failed writing " + path);
}

}  // namespace sattile
