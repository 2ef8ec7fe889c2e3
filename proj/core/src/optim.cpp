// core/src/optim.cpp

// Copyright 2026  The tspl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "tspl/optim.hpp"

#include <cmath>

#include "tspl/error.hpp"

namespace tspl {

OptimizerState OptimizerState::for_model(const ClassifierModel& model, AdamWConfig config) {
  OptimizerState s;
  s.config = config;
  for (const NamedTensor& p : model.params) {
    s.first_moment.emplace_back(p.value.shape);
    s.second_moment.emplace_back(p.value.shape);
  }
  return s;
}

void adamw_step(ClassifierModel& model, const Gradients& grads, OptimizerState& state) {
  if (grads.size() != model.params.size() || state.first_moment.size() != model.params.size())
    throw ValidationError("adamw_step: gradient/state count does not match the model");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].value.shape != model.params[i].value.shape)
      throw ValidationError("adamw_step: gradient shape mismatch for " + model.params[i].name);
    if (!grads[i].value.all_finite())
      throw ValidationError("adamw_step: non-finite gradient for " + model.params[i].name);
  }

  const AdamWConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  const double decay = 1.0 - c.lr * c.weight_decay;

  for (std::size_t i = 0; i < grads.size(); ++i) {
    std::vector<double>& p = model.params[i].value.data;
    const std::vector<double>& g = grads[i].value.data;
    std::vector<double>& m = state.first_moment[i].data;
    std::vector<double>& v = state.second_moment[i].data;
    for (std::size_t j = 0; j < p.size(); ++j) {
      p[j] *= decay;
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      p[j] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
  ++model.version;
}

void scheduler_step(LrSchedulerState& state, double val_accuracy) {
  if (val_accuracy > state.best) {
    state.best = val_accuracy;
    state.epochs_since_improvement = 0;
    return;
  }
  if (++state.epochs_since_improvement >= state.patience) {
    state.epochs_since_improvement = 0;
    if (state.lr * state.factor < state.min_lr) return;
    state.lr *= state.factor;
    ++state.reductions;
  }
}

}  // namespace tspl
