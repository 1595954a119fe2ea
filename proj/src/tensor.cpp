#include "psfcn/tensor.hpp"

#include "psfcn/error.hpp"

namespace psfcn {

std::string Shape::str() const {
  return strf(n, "x", c, "x", h, "x", w);
}

namespace {
void check_shape(const Shape& s) {
  if (s.n < 1 || s.c < 1 || s.h < 1 || s.w < 1) {
    throw_shape("invalid tensor shape ", s.str(), ": all extents must be >= 1");
  }
}
}  // namespace

Tensor::Tensor(Shape shape, float fill) : shape_(shape) {
  check_shape(shape);
  data_.assign(std::size_t(shape.numel()), fill);
}

Tensor Tensor::from_data(Shape shape, std::vector<float> data) {
  check_shape(shape);
  if (std::int64_t(data.size()) != shape.numel()) {
    throw_shape("data length ", data.size(), " does not match shape ",
                shape.str(), " (", shape.numel(), " elements)");
  }
  Tensor t;
  t.shape_ = shape;
  t.data_ = std::move(data);
  return t;
}

}  // namespace psfcn
