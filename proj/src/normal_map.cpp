#include "psfcn/normal_map.hpp"

#include <cmath>

#include "psfcn/error.hpp"

namespace psfcn {

NormalMap make_normal_map(int height, int width) {
  NormalMap m;
  m.height = height;
  m.width = width;
  m.n.assign(std::size_t(height) * width * 3, 0.f);
  m.mask = make_mask(height, width);
  return m;
}

std::vector<std::uint8_t> encode_normal_png(const NormalMap& map) {
  PngBuffer buf;
  buf.height = map.height;
  buf.width = map.width;
  buf.channels = 3;
  buf.bit_depth = 16;
  buf.samples.assign(std::size_t(map.height) * map.width * 3, 0);
  for (std::size_t i = 0; i < map.mask.on.size(); ++i) {
    if (!map.mask.on[i]) continue;  // background stays (0, 0, 0)
    for (int c = 0; c < 3; ++c) {
      const double v = (double(map.n[i * 3 + c]) + 1.0) / 2.0 * 65535.0;
      buf.samples[i * 3 + c] =
          std::uint16_t(std::lround(std::clamp(v, 0.0, 65535.0)));
    }
  }
  return encode_png(buf);
}

NormalMap decode_normal_png(std::span<const std::uint8_t> bytes) {
  const PngBuffer buf = decode_png(bytes);
  if (buf.channels != 3 || buf.bit_depth != 16) {
    throw_io("normal PNG must be 16-bit RGB, got ", buf.bit_depth, "-bit ",
             buf.channels, "-channel");
  }
  NormalMap map = make_normal_map(buf.height, buf.width);
  for (std::size_t i = 0; i < map.mask.on.size(); ++i) {
    const std::uint16_t r = buf.samples[i * 3];
    const std::uint16_t g = buf.samples[i * 3 + 1];
    const std::uint16_t b = buf.samples[i * 3 + 2];
    if (r == 0 && g == 0 && b == 0) continue;
    double v[3] = {2.0 * r / 65535.0 - 1.0, 2.0 * g / 65535.0 - 1.0,
                   2.0 * b / 65535.0 - 1.0};
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (norm > 0.0) {
      for (double& x : v) x /= norm;
    }
    map.mask.on[i] = 1;
    map.n[i * 3] = float(v[0]);
    map.n[i * 3 + 1] = float(v[1]);
    map.n[i * 3 + 2] = float(v[2]);
  }
  return map;
}

void save_normal_png(const std::string& path, const NormalMap& map) {
  write_file(path, encode_normal_png(map));
}

NormalMap load_normal_png(const std::string& path) {
  return decode_normal_png(read_file(path));
}

double mean_angular_error_deg(const NormalMap& pred, const NormalMap& ref) {
  if (pred.height != ref.height || pred.width != ref.width) {
    throw_shape("angular error: size mismatch ", pred.height, "x", pred.width,
                " vs ", ref.height, "x", ref.width);
  }
  if (pred.mask.on != ref.mask.on) {
    throw_value("angular error: masks do not match");
  }
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pred.mask.on.size(); ++i) {
    if (!pred.mask.on[i]) continue;
    const double dot = double(pred.n[i * 3]) * ref.n[i * 3] +
                       double(pred.n[i * 3 + 1]) * ref.n[i * 3 + 1] +
                       double(pred.n[i * 3 + 2]) * ref.n[i * 3 + 2];
    acc += std::acos(std::clamp(dot, -1.0, 1.0));
    ++count;
  }
  if (count == 0) throw_value("angular error: no valid pixels");
  return acc / double(count) * 180.0 / M_PI;
}

NormalMap resize_normals(const NormalMap& map, int out_h, int out_w) {
  Image vec = make_image(map.height, map.width, 3);
  vec.pixels = map.n;
  const Image resized = resize_bilinear(vec, out_h, out_w);
  NormalMap out = make_normal_map(out_h, out_w);
  for (std::size_t i = 0; i < out.mask.on.size(); ++i) {
    double v[3] = {resized.pixels[i * 3], resized.pixels[i * 3 + 1],
                   resized.pixels[i * 3 + 2]};
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (norm > 1e-12) {
      for (double& x : v) x /= norm;
    }
    out.n[i * 3] = float(v[0]);
    out.n[i * 3 + 1] = float(v[1]);
    out.n[i * 3 + 2] = float(v[2]);
  }
  out.mask = resize_nearest(map.mask, out_h, out_w);
  return out;
}

Tensor normals_to_tensor(const NormalMap& map) {
  Tensor t({1, 3, map.height, map.width});
  const std::int64_t plane = std::int64_t(map.height) * map.width;
  for (std::int64_t i = 0; i < plane; ++i) {
    t.data()[i] = map.n[i * 3];
    t.data()[plane + i] = map.n[i * 3 + 1];
    t.data()[2 * plane + i] = map.n[i * 3 + 2];
  }
  return t;
}

NormalMap tensor_to_normals(const Tensor& t, Mask mask) {
  if (t.n() != 1 || t.c() != 3) {
    throw_shape("tensor_to_normals: expected 1x3xHxW, got ", t.shape().str());
  }
  if (mask.height != t.h() || mask.width != t.w()) {
    throw_shape("tensor_to_normals: mask ", mask.height, "x", mask.width,
                " does not match tensor ", t.shape().str());
  }
  NormalMap map = make_normal_map(t.h(), t.w());
  const std::int64_t plane = std::int64_t(t.h()) * t.w();
  for (std::int64_t i = 0; i < plane; ++i) {
    map.n[i * 3] = t.data()[i];
    map.n[i * 3 + 1] = t.data()[plane + i];
    map.n[i * 3 + 2] = t.data()[2 * plane + i];
  }
  map.mask = std::move(mask);
  return map;
}

}  // namespace psfcn
