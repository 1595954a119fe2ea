#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace psfcn {

/// Interleaved float image, values nominally in [0, 1] (HDR values above 1
/// are legal until 8-bit encoding clamps them).
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> pixels;

  float& at(int y, int x, int c) {
    return pixels[(std::size_t(y) * width + x) * channels + c];
  }
  float at(int y, int x, int c) const {
    return pixels[(std::size_t(y) * width + x) * channels + c];
  }
};

Image make_image(int height, int width, int channels, float fill = 0.f);

/// Foreground flags, one byte per pixel.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> on;

  bool at(int y, int x) const { return on[std::size_t(y) * width + x] != 0; }
  std::size_t count_on() const;
};

Mask make_mask(int height, int width, bool fill = false);

/// Raw PNG samples; 8-bit values live in [0, 255], 16-bit in [0, 65535].
struct PngBuffer {
  int height = 0;
  int width = 0;
  int channels = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;
};

std::vector<std::uint8_t> encode_png(const PngBuffer& buf);
PngBuffer decode_png(std::span<const std::uint8_t> bytes);

void save_png(const std::string& path, const PngBuffer& buf);
PngBuffer load_png(const std::string& path);

/// round(clamp(v, 0, 1) * 255); the only place HDR values are clipped.
PngBuffer image_to_png8(const Image& img);
Image png_to_image(const PngBuffer& buf);

PngBuffer mask_to_png(const Mask& mask);
Mask png_to_mask(const PngBuffer& buf);

Image resize_bilinear(const Image& img, int out_h, int out_w);
Mask resize_nearest(const Mask& mask, int out_h, int out_w);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace psfcn
