#include "psfcn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "psfcn/error.hpp"
#include "psfcn/parallel.hpp"

namespace psfcn::ops {

namespace {

// C (MxN, row-major) is pre-seeded by the caller (zeros or bias); rows
// accumulate A*B in ascending k so every cell sees one fixed reduction
// order regardless of thread count.
void gemm_acc(const float* A, const float* B, float* C, int M, int K, int N) {
  const std::int64_t work = std::int64_t(M) * K * N;
  auto row = [&](std::int64_t m) {
    const float* a = A + m * K;
    float* c = C + m * N;
    for (int k = 0; k < K; ++k) {
      const float av = a[k];
      const float* b = B + std::int64_t(k) * N;
      for (int n = 0; n < N; ++n) c[n] += av * b[n];
    }
  };
  if (work > (1 << 20) && max_threads() > 1) {
    parallel_for(0, M, row);
  } else {
    for (int m = 0; m < M; ++m) row(m);
  }
}

// C (MxN) += A (MxL) * B^T where B is NxL: plain dot products.
void gemm_abt_acc(const float* A, const float* B, float* C, int M, int L,
                  int N) {
  auto row = [&](std::int64_t m) {
    const float* a = A + m * L;
    float* c = C + m * N;
    for (int n = 0; n < N; ++n) {
      const float* b = B + std::int64_t(n) * L;
      float acc = 0.f;
      for (int l = 0; l < L; ++l) acc += a[l] * b[l];
      c[n] += acc;
    }
  };
  const std::int64_t work = std::int64_t(M) * L * N;
  if (work > (1 << 20) && max_threads() > 1) {
    parallel_for(0, M, row);
  } else {
    for (int m = 0; m < M; ++m) row(m);
  }
}

int conv_out_extent(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// Patch matrix [Cin*k*k, OH*OW] for one image, zero-filled at padding.
void im2col(const float* x, int C, int H, int W, int k, int stride, int pad,
            int OH, int OW, float* cols) {
  for (int c = 0; c < C; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        float* dst = cols + ((std::int64_t(c) * k + ky) * k + kx) * OH * OW;
        for (int oy = 0; oy < OH; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= H) {
            std::memset(dst + std::int64_t(oy) * OW, 0, sizeof(float) * OW);
            continue;
          }
          const float* src = x + (std::int64_t(c) * H + iy) * W;
          for (int ox = 0; ox < OW; ++ox) {
            const int ix = ox * stride - pad + kx;
            dst[std::int64_t(oy) * OW + ox] =
                (ix >= 0 && ix < W) ? src[ix] : 0.f;
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-adds patch rows back into the image. Rows of
// one channel only touch that channel, so channels parallelize safely.
void col2im_add(const float* cols, int C, int H, int W, int k, int stride,
                int pad, int OH, int OW, float* x) {
  auto channel = [&](std::int64_t c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const float* src = cols + ((c * k + ky) * k + kx) * OH * OW;
        for (int oy = 0; oy < OH; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= H) continue;
          float* dst = x + (c * H + iy) * W;
          for (int ox = 0; ox < OW; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < W) dst[ix] += src[std::int64_t(oy) * OW + ox];
          }
        }
      }
    }
  };
  if (std::int64_t(C) * k * k * OH * OW > (1 << 20) && max_threads() > 1) {
    parallel_for(0, C, channel);
  } else {
    for (int c = 0; c < C; ++c) channel(c);
  }
}

void check_conv_args(const Tensor& x, const Tensor& k, const Tensor* bias,
                     int stride, int pad, const char* op) {
  if (stride < 1) throw_value(op, ": stride must be >= 1, got ", stride);
  if (pad < 0) throw_value(op, ": pad must be >= 0, got ", pad);
  if (k.h() != k.w()) {
    throw_shape(op, ": kernel must be square, got ", k.shape().str());
  }
  if (bias && (bias->n() != 1 || bias->h() != 1 || bias->w() != 1)) {
    throw_shape(op, ": bias must be 1xCx1x1, got ", bias->shape().str());
  }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& k, const Tensor& bias,
              int stride, int pad) {
  check_conv_args(x, k, &bias, stride, pad, "conv2d");
  if (x.c() != k.c()) {
    throw_shape("conv2d: input channels ", x.c(),
                " do not match kernel input channels ", k.c(), " (input ",
                x.shape().str(), ", kernel ", k.shape().str(), ")");
  }
  const int cout = k.n();
  if (bias.c() != cout) {
    throw_shape("conv2d: bias channels ", bias.c(),
                " do not match kernel output channels ", cout);
  }
  const int ks = k.h();
  const int oh = conv_out_extent(x.h(), ks, stride, pad);
  const int ow = conv_out_extent(x.w(), ks, stride, pad);
  if (oh < 1 || ow < 1) {
    throw_shape("conv2d: kernel ", ks, "x", ks, " with stride ", stride,
                ", pad ", pad, " does not fit input ", x.shape().str());
  }
  Tensor y({x.n(), cout, oh, ow});
  const int kdim = x.c() * ks * ks;
  std::vector<float> cols(std::size_t(kdim) * oh * ow);
  for (int n = 0; n < x.n(); ++n) {
    im2col(x.data() + std::int64_t(n) * x.c() * x.h() * x.w(), x.c(), x.h(),
           x.w(), ks, stride, pad, oh, ow, cols.data());
    float* out = y.data() + std::int64_t(n) * cout * oh * ow;
    for (int co = 0; co < cout; ++co) {
      std::fill(out + std::int64_t(co) * oh * ow,
                out + std::int64_t(co + 1) * oh * ow, bias.data()[co]);
    }
    gemm_acc(k.data(), cols.data(), out, cout, kdim, oh * ow);
  }
  return y;
}

Tensor conv2d_direct(const Tensor& x, const Tensor& k, const Tensor& bias,
                     int stride, int pad) {
  check_conv_args(x, k, &bias, stride, pad, "conv2d");
  if (x.c() != k.c()) {
    throw_shape("conv2d: input channels ", x.c(),
                " do not match kernel input channels ", k.c());
  }
  const int cout = k.n();
  const int ks = k.h();
  const int oh = conv_out_extent(x.h(), ks, stride, pad);
  const int ow = conv_out_extent(x.w(), ks, stride, pad);
  if (oh < 1 || ow < 1) {
    throw_shape("conv2d: kernel does not fit input ", x.shape().str());
  }
  Tensor y({x.n(), cout, oh, ow});
  for (int n = 0; n < x.n(); ++n) {
    for (int co = 0; co < cout; ++co) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          float acc = bias.data()[co];
          for (int ci = 0; ci < x.c(); ++ci) {
            for (int ky = 0; ky < ks; ++ky) {
              const int iy = oy * stride - pad + ky;
              if (iy < 0 || iy >= x.h()) continue;
              for (int kx = 0; kx < ks; ++kx) {
                const int ix = ox * stride - pad + kx;
                if (ix < 0 || ix >= x.w()) continue;
                acc += x.at(n, ci, iy, ix) * k.at(co, ci, ky, kx);
              }
            }
          }
          y.at(n, co, oy, ox) = acc;
        }
      }
    }
  }
  return y;
}

Tensor conv2d_backward_input(const Tensor& gy, const Tensor& k, int stride,
                             int pad, const Shape& x_shape) {
  check_conv_args(gy, k, nullptr, stride, pad, "conv2d_backward_input");
  if (gy.c() != k.n()) {
    throw_shape("conv2d_backward_input: gradient channels ", gy.c(),
                " do not match kernel output channels ", k.n());
  }
  const int ks = k.h();
  const int kdim = k.c() * ks * ks;
  // Kernel transposed to [Cin*k*k, Cout] once.
  std::vector<float> kt(std::size_t(kdim) * k.n());
  for (int co = 0; co < k.n(); ++co) {
    for (int i = 0; i < kdim; ++i) {
      kt[std::size_t(i) * k.n() + co] = k.data()[std::int64_t(co) * kdim + i];
    }
  }
  Tensor dx(x_shape);
  std::vector<float> cols(std::size_t(kdim) * gy.h() * gy.w());
  for (int n = 0; n < gy.n(); ++n) {
    std::fill(cols.begin(), cols.end(), 0.f);
    gemm_acc(kt.data(), gy.data() + std::int64_t(n) * gy.c() * gy.h() * gy.w(),
             cols.data(), kdim, k.n(), gy.h() * gy.w());
    col2im_add(cols.data(), k.c(), x_shape.h, x_shape.w, ks, stride, pad,
               gy.h(), gy.w(),
               dx.data() + std::int64_t(n) * x_shape.c * x_shape.h * x_shape.w);
  }
  return dx;
}

Tensor conv2d_backward_kernel(const Tensor& gy, const Tensor& x,
                              const Shape& k_shape, int stride, int pad) {
  const int ks = k_shape.h;
  const int kdim = x.c() * ks * ks;
  Tensor dk(k_shape);
  std::vector<float> cols(std::size_t(kdim) * gy.h() * gy.w());
  for (int n = 0; n < x.n(); ++n) {
    im2col(x.data() + std::int64_t(n) * x.c() * x.h() * x.w(), x.c(), x.h(),
           x.w(), ks, stride, pad, gy.h(), gy.w(), cols.data());
    gemm_abt_acc(gy.data() + std::int64_t(n) * gy.c() * gy.h() * gy.w(),
                 cols.data(), dk.data(), gy.c(), gy.h() * gy.w(), kdim);
  }
  return dk;
}

Tensor conv2d_backward_bias(const Tensor& gy) {
  Tensor db({1, gy.c(), 1, 1});
  for (int c = 0; c < gy.c(); ++c) {
    double acc = 0.0;
    for (int n = 0; n < gy.n(); ++n) {
      const float* p = gy.data() + (std::int64_t(n) * gy.c() + c) * gy.h() * gy.w();
      for (int i = 0; i < gy.h() * gy.w(); ++i) acc += p[i];
    }
    db.data()[c] = float(acc);
  }
  return db;
}

Tensor deconv2d(const Tensor& x, const Tensor& k, int stride, int pad) {
  check_conv_args(x, k, nullptr, stride, pad, "deconv2d");
  if (x.c() != k.n()) {
    throw_shape("deconv2d: input channels ", x.c(),
                " do not match kernel input channels ", k.n(), " (input ",
                x.shape().str(), ", kernel ", k.shape().str(), ")");
  }
  const int ks = k.h();
  const int cout = k.c();
  const int oh = (x.h() - 1) * stride - 2 * pad + ks;
  const int ow = (x.w() - 1) * stride - 2 * pad + ks;
  if (oh < 1 || ow < 1) {
    throw_shape("deconv2d: output would be empty for input ", x.shape().str());
  }
  const int kdim = cout * ks * ks;
  // Kernel [Cin, Cout*k*k] transposed to [Cout*k*k, Cin] once.
  std::vector<float> kt(std::size_t(kdim) * x.c());
  for (int ci = 0; ci < x.c(); ++ci) {
    for (int i = 0; i < kdim; ++i) {
      kt[std::size_t(i) * x.c() + ci] = k.data()[std::int64_t(ci) * kdim + i];
    }
  }
  Tensor y({x.n(), cout, oh, ow});
  std::vector<float> cols(std::size_t(kdim) * x.h() * x.w());
  for (int n = 0; n < x.n(); ++n) {
    std::fill(cols.begin(), cols.end(), 0.f);
    gemm_acc(kt.data(), x.data() + std::int64_t(n) * x.c() * x.h() * x.w(),
             cols.data(), kdim, x.c(), x.h() * x.w());
    col2im_add(cols.data(), cout, oh, ow, ks, stride, pad, x.h(), x.w(),
               y.data() + std::int64_t(n) * cout * oh * ow);
  }
  return y;
}

Tensor deconv2d_backward_input(const Tensor& gy, const Tensor& k, int stride,
                               int pad) {
  // Gather pass: dx = cross-correlation of gy with the same kernel.
  const int ks = k.h();
  const int cin = k.n();
  const int kdim = k.c() * ks * ks;
  const int oh = conv_out_extent(gy.h(), ks, stride, pad);
  const int ow = conv_out_extent(gy.w(), ks, stride, pad);
  Tensor dx({gy.n(), cin, oh, ow});
  std::vector<float> cols(std::size_t(kdim) * oh * ow);
  for (int n = 0; n < gy.n(); ++n) {
    im2col(gy.data() + std::int64_t(n) * gy.c() * gy.h() * gy.w(), gy.c(),
           gy.h(), gy.w(), ks, stride, pad, oh, ow, cols.data());
    gemm_acc(k.data(), cols.data(),
             dx.data() + std::int64_t(n) * cin * oh * ow, cin, kdim, oh * ow);
  }
  return dx;
}

Tensor deconv2d_backward_kernel(const Tensor& gy, const Tensor& x,
                                const Shape& k_shape, int stride, int pad) {
  const int ks = k_shape.h;
  const int kdim = gy.c() * ks * ks;
  Tensor dk(k_shape);
  std::vector<float> cols(std::size_t(kdim) * x.h() * x.w());
  for (int n = 0; n < x.n(); ++n) {
    im2col(gy.data() + std::int64_t(n) * gy.c() * gy.h() * gy.w(), gy.c(),
           gy.h(), gy.w(), ks, stride, pad, x.h(), x.w(), cols.data());
    gemm_abt_acc(x.data() + std::int64_t(n) * x.c() * x.h() * x.w(),
                 cols.data(), dk.data(), x.c(), x.h() * x.w(), kdim);
  }
  return dk;
}

Tensor bias_add(const Tensor& x, const Tensor& bias) {
  if (bias.n() != 1 || bias.h() != 1 || bias.w() != 1 || bias.c() != x.c()) {
    throw_shape("bias_add: bias ", bias.shape().str(),
                " does not broadcast over ", x.shape().str());
  }
  Tensor y = x;
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const float b = bias.data()[c];
      float* p = y.data() + (std::int64_t(n) * x.c() + c) * x.h() * x.w();
      for (int i = 0; i < x.h() * x.w(); ++i) p[i] += b;
    }
  }
  return y;
}

Tensor bias_add_backward_bias(const Tensor& gy) { return conv2d_backward_bias(gy); }

Tensor leaky_relu(const Tensor& x, float slope) {
  if (slope < 0.f || slope >= 1.f) {
    throw_value("leaky_relu: slope must lie in [0, 1), got ", slope);
  }
  Tensor y = x;
  float* p = y.data();
  for (std::int64_t i = 0; i < y.numel(); ++i) {
    if (p[i] < 0.f) p[i] *= slope;
  }
  return y;
}

Tensor leaky_relu_backward(const Tensor& gy, const Tensor& x, float slope) {
  Tensor dx = gy;
  float* p = dx.data();
  const float* xv = x.data();
  for (std::int64_t i = 0; i < dx.numel(); ++i) {
    if (xv[i] < 0.f) p[i] *= slope;
  }
  return dx;
}

Tensor l2_normalize_channels(const Tensor& x, float eps) {
  if (x.c() != 3) {
    throw_shape("l2_normalize_channels: expected 3 channels, got ", x.c(),
                " (shape ", x.shape().str(), ")");
  }
  Tensor y(x.shape());
  const std::int64_t plane = std::int64_t(x.h()) * x.w();
  for (int n = 0; n < x.n(); ++n) {
    const float* px = x.data() + std::int64_t(n) * 3 * plane;
    float* py = y.data() + std::int64_t(n) * 3 * plane;
    for (std::int64_t i = 0; i < plane; ++i) {
      const double a = px[i], b = px[plane + i], c = px[2 * plane + i];
      const double norm = std::sqrt(a * a + b * b + c * c);
      const double d = std::max(norm, double(eps));
      py[i] = float(a / d);
      py[plane + i] = float(b / d);
      py[2 * plane + i] = float(c / d);
    }
  }
  return y;
}

Tensor l2_normalize_channels_backward(const Tensor& gy, const Tensor& x,
                                      float eps) {
  Tensor dx(x.shape());
  const std::int64_t plane = std::int64_t(x.h()) * x.w();
  for (int n = 0; n < x.n(); ++n) {
    const float* px = x.data() + std::int64_t(n) * 3 * plane;
    const float* pg = gy.data() + std::int64_t(n) * 3 * plane;
    float* pd = dx.data() + std::int64_t(n) * 3 * plane;
    for (std::int64_t i = 0; i < plane; ++i) {
      const double a = px[i], b = px[plane + i], c = px[2 * plane + i];
      const double ga = pg[i], gb = pg[plane + i], gc = pg[2 * plane + i];
      const double norm = std::sqrt(a * a + b * b + c * c);
      if (norm > eps) {
        const double ya = a / norm, yb = b / norm, yc = c / norm;
        const double dot = ya * ga + yb * gb + yc * gc;
        pd[i] = float((ga - ya * dot) / norm);
        pd[plane + i] = float((gb - yb * dot) / norm);
        pd[2 * plane + i] = float((gc - yc * dot) / norm);
      } else {
        pd[i] = float(ga / eps);
        pd[plane + i] = float(gb / eps);
        pd[2 * plane + i] = float(gc / eps);
      }
    }
  }
  return dx;
}

namespace {
void check_fuse_list(std::span<const Tensor> features, const char* op) {
  if (features.empty()) throw_value(op, ": fusion requires >= 1 feature map");
  if (features.size() > 65535) {
    throw_value(op, ": at most 65535 feature maps supported");
  }
  for (std::size_t i = 1; i < features.size(); ++i) {
    if (!(features[i].shape() == features[0].shape())) {
      throw_shape(op, ": feature ", i, " has shape ",
                  features[i].shape().str(), ", expected ",
                  features[0].shape().str());
    }
  }
}

inline float canonical_zero(float v) { return v == 0.f ? 0.f : v; }
}  // namespace

FuseResult max_fuse(std::span<const Tensor> features) {
  check_fuse_list(features, "max_fuse");
  const std::int64_t count = features[0].numel();
  FuseResult r{Tensor(features[0].shape()), std::vector<std::uint16_t>(count, 0)};
  float* out = r.fused.data();
  const float* first = features[0].data();
  for (std::int64_t i = 0; i < count; ++i) out[i] = canonical_zero(first[i]);
  for (std::size_t f = 1; f < features.size(); ++f) {
    const float* p = features[f].data();
    for (std::int64_t i = 0; i < count; ++i) {
      const float v = canonical_zero(p[i]);
      if (v > out[i]) {
        out[i] = v;
        r.argmax[i] = std::uint16_t(f);
      }
    }
  }
  return r;
}

std::vector<Tensor> max_fuse_backward(const Tensor& gy,
                                      std::span<const std::uint16_t> argmax,
                                      std::size_t count) {
  std::vector<Tensor> grads(count, Tensor(gy.shape()));
  const float* g = gy.data();
  for (std::int64_t i = 0; i < gy.numel(); ++i) {
    grads[argmax[i]].data()[i] = g[i];
  }
  return grads;
}

Tensor avg_fuse(std::span<const Tensor> features) {
  check_fuse_list(features, "avg_fuse");
  const std::size_t q = features.size();
  Tensor out(features[0].shape());
  std::vector<float> tmp(q);
  const double inv = 1.0 / double(q);
  for (std::int64_t i = 0; i < out.numel(); ++i) {
    for (std::size_t f = 0; f < q; ++f) tmp[f] = features[f].data()[i];
    std::sort(tmp.begin(), tmp.end());
    double acc = 0.0;
    for (std::size_t f = 0; f < q; ++f) acc += tmp[f];
    out.data()[i] = float(acc * inv);
  }
  return out;
}

Tensor concat_channels(std::span<const Tensor> features) {
  if (features.empty()) {
    throw_value("concat_channels: fusion requires >= 1 feature map");
  }
  int channels = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const Tensor& t = features[i];
    if (t.n() != features[0].n() || t.h() != features[0].h() ||
        t.w() != features[0].w()) {
      throw_shape("concat_channels: feature ", i, " has shape ",
                  t.shape().str(), ", expected spatial layout of ",
                  features[0].shape().str());
    }
    channels += t.c();
  }
  Tensor out({features[0].n(), channels, features[0].h(), features[0].w()});
  const std::int64_t plane = std::int64_t(out.h()) * out.w();
  for (int n = 0; n < out.n(); ++n) {
    std::int64_t c_off = 0;
    for (const Tensor& t : features) {
      std::memcpy(out.data() + (std::int64_t(n) * channels + c_off) * plane,
                  t.data() + std::int64_t(n) * t.c() * plane,
                  sizeof(float) * t.c() * plane);
      c_off += t.c();
    }
  }
  return out;
}

Tensor slice_channels(const Tensor& x, int c0, int count) {
  if (c0 < 0 || count < 1 || c0 + count > x.c()) {
    throw_shape("slice_channels: range [", c0, ", ", c0 + count,
                ") out of bounds for ", x.c(), " channels");
  }
  Tensor out({x.n(), count, x.h(), x.w()});
  const std::int64_t plane = std::int64_t(x.h()) * x.w();
  for (int n = 0; n < x.n(); ++n) {
    std::memcpy(out.data() + std::int64_t(n) * count * plane,
                x.data() + (std::int64_t(n) * x.c() + c0) * plane,
                sizeof(float) * count * plane);
  }
  return out;
}

namespace {
void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!(a.shape() == b.shape())) {
    throw_shape(op, ": shape mismatch ", a.shape().str(), " vs ",
                b.shape().str());
  }
}
}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  Tensor y = a;
  for (std::int64_t i = 0; i < y.numel(); ++i) y.data()[i] += b.data()[i];
  return y;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  Tensor y = a;
  for (std::int64_t i = 0; i < y.numel(); ++i) y.data()[i] *= b.data()[i];
  return y;
}

Tensor scale(const Tensor& x, float s) {
  Tensor y = x;
  for (std::int64_t i = 0; i < y.numel(); ++i) y.data()[i] *= s;
  return y;
}

Tensor sum_all(const Tensor& x) {
  double acc = 0.0;
  for (std::int64_t i = 0; i < x.numel(); ++i) acc += x.data()[i];
  Tensor y({1, 1, 1, 1});
  y.data()[0] = float(acc);
  return y;
}

Tensor masked_cosine_loss(const Tensor& pred, const Tensor& gt,
                          std::span<const std::uint8_t> mask) {
  check_same_shape(pred, gt, "masked_cosine_loss");
  if (pred.c() != 3) {
    throw_shape("masked_cosine_loss: expected 3 channels, got ", pred.c());
  }
  const std::int64_t plane = std::int64_t(pred.h()) * pred.w();
  if (std::int64_t(mask.size()) != std::int64_t(pred.n()) * plane) {
    throw_shape("masked_cosine_loss: mask has ", mask.size(),
                " entries, expected ", pred.n() * plane);
  }
  double acc = 0.0;
  std::int64_t count = 0;
  for (int n = 0; n < pred.n(); ++n) {
    const float* pp = pred.data() + std::int64_t(n) * 3 * plane;
    const float* pg = gt.data() + std::int64_t(n) * 3 * plane;
    const std::uint8_t* pm = mask.data() + std::int64_t(n) * plane;
    for (std::int64_t i = 0; i < plane; ++i) {
      if (!pm[i]) continue;
      const double dot = double(pp[i]) * pg[i] +
                         double(pp[plane + i]) * pg[plane + i] +
                         double(pp[2 * plane + i]) * pg[2 * plane + i];
      acc += 1.0 - dot;
      ++count;
    }
  }
  if (count == 0) throw_value("masked_cosine_loss: no valid pixels");
  Tensor y({1, 1, 1, 1});
  y.data()[0] = float(acc / double(count));
  return y;
}

Tensor masked_cosine_loss_backward(const Tensor& gy, const Tensor& gt,
                                   std::span<const std::uint8_t> mask) {
  const std::int64_t plane = std::int64_t(gt.h()) * gt.w();
  std::int64_t count = 0;
  for (std::uint8_t m : mask) count += m ? 1 : 0;
  Tensor dx(gt.shape());
  const float g = gy.data()[0];
  const float scale = -g / float(count);
  for (int n = 0; n < gt.n(); ++n) {
    const float* pg = gt.data() + std::int64_t(n) * 3 * plane;
    const std::uint8_t* pm = mask.data() + std::int64_t(n) * plane;
    float* pd = dx.data() + std::int64_t(n) * 3 * plane;
    for (std::int64_t i = 0; i < plane; ++i) {
      if (!pm[i]) continue;
      pd[i] = scale * pg[i];
      pd[plane + i] = scale * pg[plane + i];
      pd[2 * plane + i] = scale * pg[2 * plane + i];
    }
  }
  return dx;
}

}  // namespace psfcn::ops
