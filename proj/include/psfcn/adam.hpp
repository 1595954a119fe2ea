#pragma once

#include <cstdint>
#include <span>

#include "psfcn/tensor.hpp"

namespace psfcn {

/// Per-parameter Adam moments plus the shared hyperparameters.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t step = 0;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
  float learning_rate = 1e-3f;

  static AdamState init(std::span<const Tensor> params, float learning_rate,
                        float beta1 = 0.9f, float beta2 = 0.999f,
                        float epsilon = 1e-8f);
};

/// One bias-corrected Adam update, in place. Increments state.step.
void adam_step(std::span<Tensor> params, std::span<const Tensor> grads,
               AdamState& state);

}  // namespace psfcn
