#include "psfcn/tape.hpp"

#include <atomic>

#include "psfcn/error.hpp"
#include "psfcn/ops.hpp"

namespace psfcn {

namespace {
std::uint32_t next_tape_tag() {
  static std::atomic<std::uint32_t> counter{1};
  return counter.fetch_add(1);
}
}  // namespace

Tape::Tape() : tag_(next_tape_tag()) {}

std::int32_t Tape::check(Val v) const {
  if (v.tag != tag_ || v.index < 0 ||
      std::size_t(v.index) >= nodes_.size()) {
    throw_value("tape: value does not belong to this tape");
  }
  return v.index;
}

Val Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Val{std::int32_t(nodes_.size() - 1), tag_};
}

bool Tape::any_requires(std::span<const Val> vs) const {
  for (Val v : vs) {
    if (nodes_[check(v)].requires_grad) return true;
  }
  return false;
}

Val Tape::leaf(Tensor t) {
  Node n{Op::leaf, {}, std::move(t), true};
  return push(std::move(n));
}

Val Tape::constant(Tensor t) {
  Node n{Op::constant, {}, std::move(t), false};
  return push(std::move(n));
}

Val Tape::conv2d(Val x, Val kernel, Val bias, int stride, int pad) {
  Node n;
  n.op = Op::conv2d;
  n.inputs = {check(x), check(kernel), check(bias)};
  n.requires_grad = any_requires(std::array{x, kernel, bias});
  n.stride = stride;
  n.pad = pad;
  n.value = ops::conv2d(nodes_[n.inputs[0]].value, nodes_[n.inputs[1]].value,
                        nodes_[n.inputs[2]].value, stride, pad);
  return push(std::move(n));
}

Val Tape::deconv2d(Val x, Val kernel, int stride, int pad) {
  Node n;
  n.op = Op::deconv2d;
  n.inputs = {check(x), check(kernel)};
  n.requires_grad = any_requires(std::array{x, kernel});
  n.stride = stride;
  n.pad = pad;
  n.value = ops::deconv2d(nodes_[n.inputs[0]].value, nodes_[n.inputs[1]].value,
                          stride, pad);
  return push(std::move(n));
}

Val Tape::bias_add(Val x, Val bias) {
  Node n;
  n.op = Op::bias_add;
  n.inputs = {check(x), check(bias)};
  n.requires_grad = any_requires(std::array{x, bias});
  n.value = ops::bias_add(nodes_[n.inputs[0]].value, nodes_[n.inputs[1]].value);
  return push(std::move(n));
}

Val Tape::leaky_relu(Val x, float slope) {
  Node n;
  n.op = Op::leaky_relu;
  n.inputs = {check(x)};
  n.requires_grad = nodes_[n.inputs[0]].requires_grad;
  n.scalar = slope;
  n.value = ops::leaky_relu(nodes_[n.inputs[0]].value, slope);
  return push(std::move(n));
}

Val Tape::l2_normalize(Val x) {
  Node n;
  n.op = Op::l2_normalize;
  n.inputs = {check(x)};
  n.requires_grad = nodes_[n.inputs[0]].requires_grad;
  n.value = ops::l2_normalize_channels(nodes_[n.inputs[0]].value);
  return push(std::move(n));
}

Val Tape::max_fuse(std::span<const Val> features) {
  Node n;
  n.op = Op::max_fuse;
  std::vector<Tensor> vals;
  vals.reserve(features.size());
  for (Val v : features) {
    n.inputs.push_back(check(v));
    vals.push_back(nodes_[n.inputs.back()].value);
  }
  n.requires_grad = any_requires(features);
  auto fused = ops::max_fuse(vals);
  n.value = std::move(fused.fused);
  n.argmax = std::move(fused.argmax);
  return push(std::move(n));
}

Val Tape::avg_fuse(std::span<const Val> features) {
  Node n;
  n.op = Op::avg_fuse;
  std::vector<Tensor> vals;
  vals.reserve(features.size());
  for (Val v : features) {
    n.inputs.push_back(check(v));
    vals.push_back(nodes_[n.inputs.back()].value);
  }
  n.requires_grad = any_requires(features);
  n.value = ops::avg_fuse(vals);
  return push(std::move(n));
}

Val Tape::concat_channels(std::span<const Val> features) {
  Node n;
  n.op = Op::concat;
  std::vector<Tensor> vals;
  vals.reserve(features.size());
  for (Val v : features) {
    n.inputs.push_back(check(v));
    vals.push_back(nodes_[n.inputs.back()].value);
  }
  n.requires_grad = any_requires(features);
  n.value = ops::concat_channels(vals);
  return push(std::move(n));
}

Val Tape::add(Val a, Val b) {
  Node n;
  n.op = Op::add;
  n.inputs = {check(a), check(b)};
  n.requires_grad = any_requires(std::array{a, b});
  n.value = ops::add(nodes_[n.inputs[0]].value, nodes_[n.inputs[1]].value);
  return push(std::move(n));
}

Val Tape::mul(Val a, Val b) {
  Node n;
  n.op = Op::mul;
  n.inputs = {check(a), check(b)};
  n.requires_grad = any_requires(std::array{a, b});
  n.value = ops::mul(nodes_[n.inputs[0]].value, nodes_[n.inputs[1]].value);
  return push(std::move(n));
}

Val Tape::scale(Val x, float s) {
  Node n;
  n.op = Op::scale;
  n.inputs = {check(x)};
  n.requires_grad = nodes_[n.inputs[0]].requires_grad;
  n.scalar = s;
  n.value = ops::scale(nodes_[n.inputs[0]].value, s);
  return push(std::move(n));
}

Val Tape::sum(Val x) {
  Node n;
  n.op = Op::sum;
  n.inputs = {check(x)};
  n.requires_grad = nodes_[n.inputs[0]].requires_grad;
  n.value = ops::sum_all(nodes_[n.inputs[0]].value);
  return push(std::move(n));
}

Val Tape::cosine_loss(Val pred, Val gt, std::vector<std::uint8_t> mask) {
  Node n;
  n.op = Op::cosine_loss;
  n.inputs = {check(pred), check(gt)};
  n.requires_grad = nodes_[n.inputs[0]].requires_grad;
  n.value = ops::masked_cosine_loss(nodes_[n.inputs[0]].value,
                                    nodes_[n.inputs[1]].value, mask);
  n.mask = std::move(mask);
  return push(std::move(n));
}

const Tensor& Tape::value(Val v) const { return nodes_[check(v)].value; }

void Tape::accumulate(std::int32_t idx, Tensor g) {
  if (!nodes_[idx].requires_grad) return;
  if (grads_[idx].empty()) {
    grads_[idx] = std::move(g);
  } else {
    grads_[idx] = ops::add(grads_[idx], g);
  }
}

void Tape::backward(Val loss) {
  const std::int32_t root = check(loss);
  if (nodes_[root].value.numel() != 1) {
    throw_value("tape: loss must be a 1-element tensor, got shape ",
                nodes_[root].value.shape().str());
  }
  grads_.assign(nodes_.size(), Tensor());
  grads_[root] = Tensor({1, 1, 1, 1}, 1.f);

  for (std::int32_t i = root; i >= 0; --i) {
    Node& node = nodes_[i];
    if (grads_[i].empty() || !node.requires_grad) continue;
    const Tensor& g = grads_[i];
    switch (node.op) {
      case Op::leaf:
      case Op::constant:
        break;
      case Op::conv2d: {
        const Node& x = nodes_[node.inputs[0]];
        const Node& k = nodes_[node.inputs[1]];
        const Node& b = nodes_[node.inputs[2]];
        if (x.requires_grad) {
          accumulate(node.inputs[0],
                     ops::conv2d_backward_input(g, k.value, node.stride,
                                                node.pad, x.value.shape()));
        }
        if (k.requires_grad) {
          accumulate(node.inputs[1],
                     ops::conv2d_backward_kernel(g, x.value, k.value.shape(),
                                                 node.stride, node.pad));
        }
        if (b.requires_grad) {
          accumulate(node.inputs[2], ops::conv2d_backward_bias(g));
        }
        break;
      }
      case Op::deconv2d: {
        const Node& x = nodes_[node.inputs[0]];
        const Node& k = nodes_[node.inputs[1]];
        if (x.requires_grad) {
          accumulate(node.inputs[0], ops::deconv2d_backward_input(
                                         g, k.value, node.stride, node.pad));
        }
        if (k.requires_grad) {
          accumulate(node.inputs[1],
                     ops::deconv2d_backward_kernel(g, x.value, k.value.shape(),
                                                   node.stride, node.pad));
        }
        break;
      }
      case Op::bias_add: {
        if (nodes_[node.inputs[0]].requires_grad) accumulate(node.inputs[0], g);
        if (nodes_[node.inputs[1]].requires_grad) {
          accumulate(node.inputs[1], ops::bias_add_backward_bias(g));
        }
        break;
      }
      case Op::leaky_relu:
        accumulate(node.inputs[0],
                   ops::leaky_relu_backward(g, nodes_[node.inputs[0]].value,
                                            node.scalar));
        break;
      case Op::l2_normalize:
        accumulate(node.inputs[0], ops::l2_normalize_channels_backward(
                                       g, nodes_[node.inputs[0]].value));
        break;
      case Op::max_fuse: {
        auto input_grads =
            ops::max_fuse_backward(g, node.argmax, node.inputs.size());
        for (std::size_t f = 0; f < node.inputs.size(); ++f) {
          if (nodes_[node.inputs[f]].requires_grad) {
            accumulate(node.inputs[f], std::move(input_grads[f]));
          }
        }
        break;
      }
      case Op::avg_fuse: {
        const Tensor shared = ops::scale(g, 1.f / float(node.inputs.size()));
        for (std::int32_t in : node.inputs) {
          if (nodes_[in].requires_grad) accumulate(in, shared);
        }
        break;
      }
      case Op::concat: {
        int c0 = 0;
        for (std::int32_t in : node.inputs) {
          const int count = nodes_[in].value.c();
          if (nodes_[in].requires_grad) {
            accumulate(in, ops::slice_channels(g, c0, count));
          }
          c0 += count;
        }
        break;
      }
      case Op::add:
        if (nodes_[node.inputs[0]].requires_grad) accumulate(node.inputs[0], g);
        if (nodes_[node.inputs[1]].requires_grad) accumulate(node.inputs[1], g);
        break;
      case Op::mul:
        if (nodes_[node.inputs[0]].requires_grad) {
          accumulate(node.inputs[0], ops::mul(g, nodes_[node.inputs[1]].value));
        }
        if (nodes_[node.inputs[1]].requires_grad) {
          accumulate(node.inputs[1], ops::mul(g, nodes_[node.inputs[0]].value));
        }
        break;
      case Op::scale:
        accumulate(node.inputs[0], ops::scale(g, node.scalar));
        break;
      case Op::sum: {
        accumulate(node.inputs[0],
                   Tensor(nodes_[node.inputs[0]].value.shape(), g.data()[0]));
        break;
      }
      case Op::cosine_loss:
        accumulate(node.inputs[0],
                   ops::masked_cosine_loss_backward(
                       g, nodes_[node.inputs[1]].value, node.mask));
        break;
    }
  }
}

bool Tape::has_grad(Val v) const {
  const std::int32_t idx = check(v);
  return !grads_.empty() && !grads_[idx].empty();
}

const Tensor& Tape::grad(Val v) const {
  const std::int32_t idx = check(v);
  if (grads_.empty() || grads_[idx].empty()) {
    throw_value("tape: no gradient recorded for this value");
  }
  return grads_[idx];
}

}  // namespace psfcn
