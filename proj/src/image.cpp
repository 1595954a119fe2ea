#include "psfcn/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "psfcn/error.hpp"

namespace psfcn {

Image make_image(int height, int width, int channels, float fill) {
  if (height < 1 || width < 1 || channels < 1) {
    throw_shape("image: invalid extents ", height, "x", width, "x", channels);
  }
  Image img{height, width, channels, {}};
  img.pixels.assign(std::size_t(height) * width * channels, fill);
  return img;
}

std::size_t Mask::count_on() const {
  std::size_t c = 0;
  for (std::uint8_t v : on) c += v ? 1 : 0;
  return c;
}

Mask make_mask(int height, int width, bool fill) {
  Mask m{height, width, {}};
  m.on.assign(std::size_t(height) * width, fill ? 1 : 0);
  return m;
}

namespace {

struct MemReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void png_mem_read(png_structp png, png_bytep out, png_size_t count) {
  auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
  if (r->pos + count > r->size) {
    png_error(png, "unexpected end of PNG stream");
  }
  std::memcpy(out, r->data + r->pos, count);
  r->pos += count;
}

void png_mem_write(png_structp png, png_bytep data, png_size_t count) {
  auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  v->insert(v->end(), data, data + count);
}

void png_mem_flush(png_structp) {}

// Recovered via longjmp into the caller's setjmp block.
[[noreturn]] void png_throw(png_structp png, png_const_charp) {
  longjmp(png_jmpbuf(png), 1);
}

void png_quiet_warn(png_structp, png_const_charp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(const PngBuffer& buf) {
  if (buf.bit_depth != 8 && buf.bit_depth != 16) {
    throw_value("png: bit depth must be 8 or 16, got ", buf.bit_depth);
  }
  if (buf.channels != 1 && buf.channels != 3) {
    throw_value("png: channels must be 1 or 3, got ", buf.channels);
  }
  if (std::int64_t(buf.samples.size()) !=
      std::int64_t(buf.height) * buf.width * buf.channels) {
    throw_shape("png: sample count ", buf.samples.size(),
                " does not match ", buf.height, "x", buf.width, "x",
                buf.channels);
  }
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw,
                              png_quiet_warn);
  if (!png) throw_io("png: failed to allocate write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw_io("png: failed to allocate info struct");
  }
  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows(buf.height);
  std::vector<std::uint8_t> packed;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw_io("png: encode failed");
  }
  png_set_write_fn(png, &out, png_mem_write, png_mem_flush);
  png_set_compression_level(png, 6);
  const int color =
      buf.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(png, info, buf.width, buf.height, buf.bit_depth, color,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const std::size_t row_samples = std::size_t(buf.width) * buf.channels;
  if (buf.bit_depth == 8) {
    packed.resize(std::size_t(buf.height) * row_samples);
    for (std::size_t i = 0; i < packed.size(); ++i) {
      packed[i] = std::uint8_t(buf.samples[i]);
    }
    for (int y = 0; y < buf.height; ++y) {
      rows[y] = packed.data() + std::size_t(y) * row_samples;
    }
  } else {
    png_set_swap(png);  // rows handed over in host little-endian order
    for (int y = 0; y < buf.height; ++y) {
      rows[y] = reinterpret_cast<png_bytep>(
          const_cast<std::uint16_t*>(buf.samples.data() + std::size_t(y) * row_samples));
    }
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

PngBuffer decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw_io("png: bad signature");
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw,
                             png_quiet_warn);
  if (!png) throw_io("png: failed to allocate read struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw_io("png: failed to allocate info struct");
  }
  MemReader reader{bytes.data(), bytes.size(), 0};
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> raw;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw_io("png: decode failed (malformed stream)");
  }
  png_set_read_fn(png, &reader, png_mem_read);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);

  PngBuffer buf;
  buf.height = int(png_get_image_height(png, info));
  buf.width = int(png_get_image_width(png, info));
  buf.channels = int(png_get_channels(png, info));
  buf.bit_depth = int(png_get_bit_depth(png, info));
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  raw.resize(row_bytes * buf.height);
  rows.resize(buf.height);
  for (int y = 0; y < buf.height; ++y) rows[y] = raw.data() + row_bytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t count =
      std::size_t(buf.height) * buf.width * buf.channels;
  buf.samples.resize(count);
  if (buf.bit_depth == 16) {
    std::memcpy(buf.samples.data(), raw.data(), count * 2);
  } else {
    for (std::size_t i = 0; i < count; ++i) buf.samples[i] = raw[i];
  }
  return buf;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw_io("cannot open ", path, " for reading");
  std::fseek(f, 0, SEEK_END);
  const long size = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  std::vector<std::uint8_t> bytes(std::size_t(std::max(0L, size)));
  if (!bytes.empty() && std::fread(bytes.data(), 1, bytes.size(), f) != bytes.size()) {
    std::fclose(f);
    throw_io("short read from ", path);
  }
  std::fclose(f);
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw_io("cannot open ", path, " for writing");
  if (!bytes.empty() && std::fwrite(bytes.data(), 1, bytes.size(), f) != bytes.size()) {
    std::fclose(f);
    throw_io("short write to ", path);
  }
  std::fclose(f);
}

void save_png(const std::string& path, const PngBuffer& buf) {
  const auto bytes = encode_png(buf);
  write_file(path, bytes);
}

PngBuffer load_png(const std::string& path) {
  const auto bytes = read_file(path);
  try {
    return decode_png(bytes);
  } catch (const Error& e) {
    throw_io(path, ": ", e.what());
  }
}

PngBuffer image_to_png8(const Image& img) {
  PngBuffer buf;
  buf.height = img.height;
  buf.width = img.width;
  buf.channels = img.channels;
  buf.bit_depth = 8;
  buf.samples.resize(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const float v = std::clamp(img.pixels[i], 0.f, 1.f);
    buf.samples[i] = std::uint16_t(std::lround(v * 255.f));
  }
  return buf;
}

Image png_to_image(const PngBuffer& buf) {
  Image img = make_image(buf.height, buf.width, buf.channels);
  const float inv = 1.f / float((1 << buf.bit_depth) - 1);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    img.pixels[i] = float(buf.samples[i]) * inv;
  }
  return img;
}

PngBuffer mask_to_png(const Mask& mask) {
  PngBuffer buf;
  buf.height = mask.height;
  buf.width = mask.width;
  buf.channels = 1;
  buf.bit_depth = 8;
  buf.samples.resize(mask.on.size());
  for (std::size_t i = 0; i < mask.on.size(); ++i) {
    buf.samples[i] = mask.on[i] ? 255 : 0;
  }
  return buf;
}

Mask png_to_mask(const PngBuffer& buf) {
  Mask m = make_mask(buf.height, buf.width);
  const int max_val = (1 << buf.bit_depth) - 1;
  const std::size_t px = std::size_t(buf.height) * buf.width;
  for (std::size_t i = 0; i < px; ++i) {
    // Any channel above half intensity marks foreground.
    bool set = false;
    for (int c = 0; c < buf.channels; ++c) {
      set = set || buf.samples[i * buf.channels + c] > max_val / 2;
    }
    m.on[i] = set ? 1 : 0;
  }
  return m;
}

Image resize_bilinear(const Image& img, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) {
    throw_shape("resize: invalid target ", out_h, "x", out_w);
  }
  Image out = make_image(out_h, out_w, img.channels);
  const double sy = double(img.height) / out_h;
  const double sx = double(img.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const int y0 = std::clamp(int(std::floor(fy)), 0, img.height - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const float wy = float(std::clamp(fy - y0, 0.0, 1.0));
    for (int x = 0; x < out_w; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const int x0 = std::clamp(int(std::floor(fx)), 0, img.width - 1);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const float wx = float(std::clamp(fx - x0, 0.0, 1.0));
      for (int c = 0; c < img.channels; ++c) {
        const float top =
            img.at(y0, x0, c) * (1.f - wx) + img.at(y0, x1, c) * wx;
        const float bot =
            img.at(y1, x0, c) * (1.f - wx) + img.at(y1, x1, c) * wx;
        out.at(y, x, c) = top * (1.f - wy) + bot * wy;
      }
    }
  }
  return out;
}

Mask resize_nearest(const Mask& mask, int out_h, int out_w) {
  Mask out = make_mask(out_h, out_w);
  const double sy = double(mask.height) / out_h;
  const double sx = double(mask.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const int iy = std::clamp(int((y + 0.5) * sy), 0, mask.height - 1);
    for (int x = 0; x < out_w; ++x) {
      const int ix = std::clamp(int((x + 0.5) * sx), 0, mask.width - 1);
      out.on[std::size_t(y) * out_w + x] = mask.on[std::size_t(iy) * mask.width + ix];
    }
  }
  return out;
}

}  // namespace psfcn
