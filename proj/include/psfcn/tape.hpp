#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "psfcn/tensor.hpp"

namespace psfcn {

class Tape;

/// Handle to a tensor recorded on a Tape. Tagged so cross-tape misuse is
/// rejected instead of silently reading another graph.
struct Val {
  std::int32_t index = -1;
  std::uint32_t tag = 0;
};

/// Reverse-mode tape. Records operations in topological order as a side
/// effect of evaluation; backward() walks the list in reverse and
/// accumulates gradients for every gradient-tracking node reachable from
/// the loss. A tape is single-owner: record and backward on one thread.
class Tape {
 public:
  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  /// Gradient-tracking input (parameters, probed inputs).
  Val leaf(Tensor t);
  /// Non-differentiable input (images, targets).
  Val constant(Tensor t);

  Val conv2d(Val x, Val kernel, Val bias, int stride, int pad);
  Val deconv2d(Val x, Val kernel, int stride, int pad);
  Val bias_add(Val x, Val bias);
  Val leaky_relu(Val x, float slope);
  Val l2_normalize(Val x);
  Val max_fuse(std::span<const Val> features);
  Val avg_fuse(std::span<const Val> features);
  Val concat_channels(std::span<const Val> features);
  Val add(Val a, Val b);
  Val mul(Val a, Val b);
  Val scale(Val x, float s);
  Val sum(Val x);
  /// Mean of (1 - pred . gt) over mask-on pixels; gt enters as a constant.
  Val cosine_loss(Val pred, Val gt, std::vector<std::uint8_t> mask);

  const Tensor& value(Val v) const;

  /// Reverse-topological gradient accumulation seeded with d(loss)/d(loss)=1.
  void backward(Val loss);

  bool has_grad(Val v) const;
  const Tensor& grad(Val v) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op {
    leaf,
    constant,
    conv2d,
    deconv2d,
    bias_add,
    leaky_relu,
    l2_normalize,
    max_fuse,
    avg_fuse,
    concat,
    add,
    mul,
    scale,
    sum,
    cosine_loss,
  };

  struct Node {
    Op op;
    std::vector<std::int32_t> inputs;
    Tensor value;
    bool requires_grad = false;
    int stride = 1;
    int pad = 0;
    float scalar = 0.f;
    std::vector<std::uint16_t> argmax;
    std::vector<std::uint8_t> mask;
  };

  std::int32_t check(Val v) const;
  Val push(Node node);
  bool any_requires(std::span<const Val> vs) const;
  void accumulate(std::int32_t idx, Tensor g);

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  std::uint32_t tag_;
};

}  // namespace psfcn
