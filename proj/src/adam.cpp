#include "psfcn/adam.hpp"

#include <cmath>

#include "psfcn/error.hpp"

namespace psfcn {

AdamState AdamState::init(std::span<const Tensor> params, float learning_rate,
                          float beta1, float beta2, float epsilon) {
  if (!(beta1 > 0.f && beta1 < 1.f) || !(beta2 > 0.f && beta2 < 1.f)) {
    throw_value("adam: betas must lie in (0, 1), got ", beta1, ", ", beta2);
  }
  if (!(epsilon > 0.f)) throw_value("adam: epsilon must be > 0");
  AdamState s;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.epsilon = epsilon;
  s.learning_rate = learning_rate;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const Tensor& p : params) {
    s.m.emplace_back(p.shape());
    s.v.emplace_back(p.shape());
  }
  return s;
}

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads,
               AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw_shape("adam_step: got ", params.size(), " params, ", grads.size(),
                " grads, state for ", state.m.size());
  }
  if (state.step < 0) throw_value("adam_step: step counter must be >= 0");
  state.step += 1;
  const double t = double(state.step);
  const float corr1 = float(1.0 / (1.0 - std::pow(double(state.beta1), t)));
  const float corr2 = float(1.0 / (1.0 - std::pow(double(state.beta2), t)));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    const Tensor& g = grads[i];
    if (!(g.shape() == p.shape()) || !(state.m[i].shape() == p.shape())) {
      throw_shape("adam_step: parameter ", i, " shape ", p.shape().str(),
                  " does not match gradient ", g.shape().str());
    }
    float* pm = state.m[i].data();
    float* pv = state.v[i].data();
    float* pp = p.data();
    const float* pg = g.data();
    for (std::int64_t j = 0; j < p.numel(); ++j) {
      pm[j] = state.beta1 * pm[j] + (1.f - state.beta1) * pg[j];
      pv[j] = state.beta2 * pv[j] + (1.f - state.beta2) * pg[j] * pg[j];
      const float mhat = pm[j] * corr1;
      const float vhat = pv[j] * corr2;
      pp[j] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

}  // namespace psfcn
