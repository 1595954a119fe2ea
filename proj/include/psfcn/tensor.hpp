#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace psfcn {

/// NCHW extents. All components are >= 1.
struct Shape {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  std::int64_t numel() const {
    return std::int64_t(n) * c * std::int64_t(h) * w;
  }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// Dense float32 array in row-major NCHW order. Treated as an immutable
/// value once built: ops return fresh tensors and never alias inputs.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.f);
  static Tensor from_data(Shape shape, std::vector<float> data);

  const Shape& shape() const { return shape_; }
  int n() const { return shape_.n; }
  int c() const { return shape_.c; }
  int h() const { return shape_.h; }
  int w() const { return shape_.w; }
  std::int64_t numel() const { return shape_.numel(); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }

  float& at(int n, int c, int y, int x) {
    return data_[((std::int64_t(n) * shape_.c + c) * shape_.h + y) * shape_.w + x];
  }
  float at(int n, int c, int y, int x) const {
    return data_[((std::int64_t(n) * shape_.c + c) * shape_.h + y) * shape_.w + x];
  }

 private:
  Shape shape_{0, 0, 0, 0};
  std::vector<float> data_;
};

}  // namespace psfcn
