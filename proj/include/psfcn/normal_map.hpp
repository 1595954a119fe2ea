#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "psfcn/image.hpp"
#include "psfcn/tensor.hpp"

namespace psfcn {

/// Per-pixel unit normals (camera coordinates: x right, y up, z toward the
/// viewer) plus a foreground validity mask. Vectors are interleaved
/// (nx, ny, nz) in row-major pixel order.
struct NormalMap {
  int height = 0;
  int width = 0;
  std::vector<float> n;
  Mask mask;

  std::array<float, 3> at(int y, int x) const {
    const std::size_t i = (std::size_t(y) * width + x) * 3;
    return {n[i], n[i + 1], n[i + 2]};
  }
  void set(int y, int x, float nx, float ny, float nz) {
    const std::size_t i = (std::size_t(y) * width + x) * 3;
    n[i] = nx;
    n[i + 1] = ny;
    n[i + 2] = nz;
  }
};

NormalMap make_normal_map(int height, int width);

/// 16-bit mapping v = round((n + 1) / 2 * 65535); mask-off pixels encode
/// (0, 0, 0). Decoding inverts the mapping and re-normalizes.
std::vector<std::uint8_t> encode_normal_png(const NormalMap& map);
NormalMap decode_normal_png(std::span<const std::uint8_t> bytes);

void save_normal_png(const std::string& path, const NormalMap& map);
NormalMap load_normal_png(const std::string& path);

/// Mean angular error in degrees over the (matching) masks:
/// mean(acos(clamp(n . n_ref, -1, 1))) * 180 / pi.
double mean_angular_error_deg(const NormalMap& pred, const NormalMap& ref);

/// Bilinear resampling followed by re-normalization; the mask is resampled
/// nearest-neighbor so it stays binary.
NormalMap resize_normals(const NormalMap& map, int out_h, int out_w);

/// Planar 1x3xHxW tensor view of the vectors (mask not included).
Tensor normals_to_tensor(const NormalMap& map);
NormalMap tensor_to_normals(const Tensor& t, Mask mask);

}  // namespace psfcn
