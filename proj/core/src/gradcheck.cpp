// core/src/gradcheck.cpp

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

#include "tspl/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tspl/error.hpp"
#include "tspl/loss.hpp"
#include "tspl/rng.hpp"

namespace tspl {

namespace {

std::vector<bool> relu_pattern(const ForwardCache& cache) {
  std::vector<bool> bits;
  for (const auto& out : cache.stage_out)
    for (double v : out) bits.push_back(v > 0.0);
  for (double v : cache.hidden_pre) bits.push_back(v > 0.0);
  return bits;
}

}  // namespace

ModelDescriptor gradcheck_descriptor() {
  ModelDescriptor d;
  d.input_length = 64;
  d.stages = {{4, 5, 2}, {8, 5, 2}};
  d.hidden = 16;
  return d;
}

GradCheckReport grad_check(const ModelDescriptor& descriptor, std::uint64_t seed,
                           const GradCheckOptions& options) {
  if (descriptor.parameter_count() > 5000)
    throw ValidationError("grad_check: descriptor has " +
                          std::to_string(descriptor.parameter_count()) +
                          " parameters, limit is 5000");
  ClassifierModel model = init_model(descriptor, derive_seed(seed, "gradcheck-init", 0));
  Rng rng(derive_seed(seed, "gradcheck-data", 0));
  // Non-zero biases.
  for (NamedTensor& p : model.params)
    if (p.name.ends_with(".bias"))
      for (double& v : p.value.data) v = rng.uniform(-0.1, 0.1);

  const std::size_t batch = options.batch;
  std::vector<double> inputs(batch * descriptor.input_length);
  for (double& v : inputs) v = rng.uniform();
  std::vector<int> labels(batch);
  for (int& y : labels) y = static_cast<int>(rng.below(descriptor.num_classes));

  ForwardCache cache;
  auto logits = forward(model, inputs, batch, cache);
  LossResult base = cross_entropy(logits, labels, descriptor.num_classes);
  Gradients grads = zero_gradients(model);
  backward(model, cache, base.grad, grads);
  if (options.corrupt) options.corrupt(grads);
  const std::vector<bool> base_pattern = relu_pattern(cache);

  GradCheckReport report;
  ForwardCache probe;
  auto loss_at = [&](std::vector<bool>& pattern) {
    auto z = forward(model, inputs, batch, probe);
    pattern = relu_pattern(probe);
    return cross_entropy(z, labels, descriptor.num_classes).loss;
  };

  std::vector<bool> plus_pattern, minus_pattern;
  for (std::size_t p = 0; p < model.params.size(); ++p) {
    std::vector<double>& values = model.params[p].value.data;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + options.step;
      const double lp = loss_at(plus_pattern);
      values[i] = saved - options.step;
      const double lm = loss_at(minus_pattern);
      values[i] = saved;
      if (plus_pattern != base_pattern || minus_pattern != base_pattern) {
        ++report.skipped_at_kinks;
        continue;
      }
      const double numeric = (lp - lm) / (2.0 * options.step);
      const double analytic = grads[p].value.data[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      const double rel = std::abs(analytic - numeric) / denom;
      ++report.checked;
      if (rel > report.max_relative_error || report.worst_parameter.empty()) {
        report.max_relative_error = rel;
        report.worst_parameter = model.params[p].name;
        report.worst_index = i;
      }
    }
  }
  report.passed = report.max_relative_error <= options.tolerance;
  return report;
}

}  // namespace tspl
