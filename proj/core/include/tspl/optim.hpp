// core/include/tspl/optim.hpp

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

#ifndef TSPL_OPTIM_HPP_
#define TSPL_OPTIM_HPP_

#include <cstdint>
#include <vector>

#include "tspl/model.hpp"

namespace tspl {

struct AdamWConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct OptimizerState {
  AdamWConfig config;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;

  static OptimizerState for_model(const ClassifierModel& model, AdamWConfig config);
};

/// Decoupled weight decay followed by the bias-corrected Adam update:
///   p <- p - lr * wd * p
///   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
/// Throws ValidationError naming the parameter if a gradient is not finite.
void adamw_step(ClassifierModel& model, const Gradients& grads, OptimizerState& state);

/// Reduce-on-plateau driven by validation accuracy (higher is better).
struct LrSchedulerState {
  double lr = 1e-4;
  double factor = 0.5;
  int patience = 2;
  /// A reduction that would take lr below this is skipped. 0 disables it.
  double min_lr = 0.0;
  double best = -1.0;
  int epochs_since_improvement = 0;
  int reductions = 0;
};

/// Strict improvement resets the counter; otherwise it grows, and when it
/// reaches `patience` the rate is multiplied by `factor` and the counter
/// restarts.
void scheduler_step(LrSchedulerState& state, double val_accuracy);

}  // namespace tspl

#endif  // TSPL_OPTIM_HPP_
