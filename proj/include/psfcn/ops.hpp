#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "psfcn/tensor.hpp"

namespace psfcn::ops {

// Cross-correlation with kernel layout [Cout, Cin, k, k] and bias [1, Cout,
// 1, 1]. Output extent is floor((H + 2*pad - k) / stride) + 1 per axis.
// Accumulation is float32 in (ci, ky, kx) order on both paths, so the
// im2col path and the direct path produce identical bits.
Tensor conv2d(const Tensor& x, const Tensor& k, const Tensor& bias,
              int stride, int pad);
// Reference loop-nest implementation of the same contract.
Tensor conv2d_direct(const Tensor& x, const Tensor& k, const Tensor& bias,
                     int stride, int pad);
Tensor conv2d_backward_input(const Tensor& gy, const Tensor& k, int stride,
                             int pad, const Shape& x_shape);
Tensor conv2d_backward_kernel(const Tensor& gy, const Tensor& x,
                              const Shape& k_shape, int stride, int pad);
Tensor conv2d_backward_bias(const Tensor& gy);

// Transposed convolution with kernel layout [Cin, Cout, k, k] (the adjoint
// of conv2d when handed the same kernel memory). Output extent is
// (H - 1)*stride - 2*pad + k per axis.
Tensor deconv2d(const Tensor& x, const Tensor& k, int stride, int pad);
Tensor deconv2d_backward_input(const Tensor& gy, const Tensor& k, int stride,
                               int pad);
Tensor deconv2d_backward_kernel(const Tensor& gy, const Tensor& x,
                                const Shape& k_shape, int stride, int pad);

// Adds a per-channel bias [1, C, 1, 1].
Tensor bias_add(const Tensor& x, const Tensor& bias);
Tensor bias_add_backward_bias(const Tensor& gy);

Tensor leaky_relu(const Tensor& x, float slope);
Tensor leaky_relu_backward(const Tensor& gy, const Tensor& x, float slope);

// Per-pixel L2 normalization of 3-channel tensors: y = v / max(||v||, eps).
inline constexpr float kNormalizeEps = 1e-12f;
Tensor l2_normalize_channels(const Tensor& x, float eps = kNormalizeEps);
Tensor l2_normalize_channels_backward(const Tensor& gy, const Tensor& x,
                                      float eps = kNormalizeEps);

// Elementwise maximum over a non-empty same-shape list. Ties keep the
// lowest input index. Signed zeros are canonicalized to +0 so the fused
// tensor is bit-identical under any permutation of the inputs. The index
// map records the winning input per element.
struct FuseResult {
  Tensor fused;
  std::vector<std::uint16_t> argmax;
};
FuseResult max_fuse(std::span<const Tensor> features);
std::vector<Tensor> max_fuse_backward(const Tensor& gy,
                                      std::span<const std::uint16_t> argmax,
                                      std::size_t count);

// Elementwise mean. Per element the inputs are sorted before being summed
// in double, so the result is bit-identical under permutation; the
// gradient splits equally.
Tensor avg_fuse(std::span<const Tensor> features);

// Channel concatenation in list order (order-sensitive by construction).
Tensor concat_channels(std::span<const Tensor> features);
// Extracts channels [c0, c0+count) for the concat backward pass.
Tensor slice_channels(const Tensor& x, int c0, int count);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, float s);
// Full reduction to a 1x1x1x1 tensor; accumulates in double.
Tensor sum_all(const Tensor& x);

// Mean of (1 - pred . gt) over mask-on pixels of N x 3 x H x W fields.
// mask has one byte per (n, y, x); accumulation is double.
Tensor masked_cosine_loss(const Tensor& pred, const Tensor& gt,
                          std::span<const std::uint8_t> mask);
Tensor masked_cosine_loss_backward(const Tensor& gy, const Tensor& gt,
                                   std::span<const std::uint8_t> mask);

}  // namespace psfcn::ops
