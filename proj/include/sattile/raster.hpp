#pragma once

// 8-bit RGB rasters and nearest-neighbor upscaling.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace sattile {

using Rgb = std::array<std::uint8_t, 3>;

/// Row-major, interleaved 3-channel 8-bit image.
class PixelGrid {
 public:
  static constexpr int kChannels = 3;

  PixelGrid(int width, int height) : PixelGrid(width, height, Rgb{0, 0, 0}) {}

  PixelGrid(int width, int height, Rgb fill) : width_(width), height_(height) {
    check_dims(width, height);
    data_.resize(static_cast<std::size_t>(width) * height * kChannels);
    for (std::size_t i = 0; i < data_.size(); i += kChannels) {
      data_[i] = fill[0];
      data_[i + 1] = fill[1];
      data_[i + 2] = fill[2];
    }
  }

  PixelGrid(int width, int height, std::vector<std::uint8_t> data)
      : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * height * kChannels)
      throw std::invalid_argument("pixel buffer size does not match dimensions");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels;
  }

  Rgb at(int x, int y) const {
    const auto o = offset(x, y);
    return {data_[o], data_[o + 1], data_[o + 2]};
  }

  void set(int x, int y, Rgb v) {
    const auto o = offset(x, y);
    data_[o] = v[0];
    data_[o + 1] = v[1];
    data_[o + 2] = v[2];
  }

  std::span<const std::uint8_t> row(int y) const noexcept {
    return std::span(data_).subspan(offset(0, y), static_cast<std::size_t>(width_) * kChannels);
  }

  friend bool operator==(const PixelGrid&, const PixelGrid&) = default;

 private:
  static void check_dims(int w, int h) {
    if (w < 1 || h < 1) throw std::invalid_argument("raster dimensions must be positive");
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

/// Pixel replication: out(x, y) = src(floor(x / factor), floor(y / factor)).
inline PixelGrid nn_upscale(const PixelGrid& src, int factor) {
  if (factor < 1) throw std::invalid_argument("upscale factor must be >= 1");
  if (factor == 1) return src;
  const int ow = src.width() * factor;
  const int oh = src.height() * factor;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(ow) * oh * PixelGrid::kChannels);
  const auto in = src.data();
  const std::size_t out_stride = static_cast<std::size_t>(ow) * PixelGrid::kChannels;
  for (int sy = 0; sy < src.height(); ++sy) {
    // Build one output row, then copy it factor-1 more times.
    std::uint8_t* first = out.data() + static_cast<std::size_t>(sy) * factor * out_stride;
    std::uint8_t* dst = first;
    const std::uint8_t* s = in.data() + src.offset(0, sy);
    for (int sx = 0; sx < src.width(); ++sx, s += PixelGrid::kChannels) {
      for (int k = 0; k < factor; ++k) {
        *dst++ = s[0];
        *dst++ = s[1];
        *dst++ = s[2];
      }
    }
    for (int k = 1; k < factor; ++k) std::copy(first, first + out_stride, first + k * out_stride);
  }
  return PixelGrid(ow, oh, std::move(out));
}

}  // namespace sattile
