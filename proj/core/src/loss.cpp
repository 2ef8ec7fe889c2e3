// core/src/loss.cpp

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

#include "tspl/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tspl/error.hpp"

namespace tspl {

std::vector<double> softmax(std::span<const double> logits, std::size_t classes) {
  if (classes == 0 || logits.size() % classes != 0)
    throw ValidationError("softmax: logits size is not a multiple of the class count");
  std::vector<double> out(logits.size());
  for (std::size_t r = 0; r < logits.size() / classes; ++r) {
    const double* z = logits.data() + r * classes;
    double* p = out.data() + r * classes;
    const double m = *std::max_element(z, z + classes);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += p[c] = std::exp(z[c] - m);
    for (std::size_t c = 0; c < classes; ++c) p[c] /= sum;
  }
  return out;
}

LossResult cross_entropy(std::span<const double> logits, std::span<const int> labels,
                         std::size_t classes) {
  const std::size_t batch = labels.size();
  if (batch == 0 || logits.size() != batch * classes)
    throw ValidationError("cross_entropy: logits/labels shape mismatch");
  LossResult r;
  r.grad = softmax(logits, classes);
  const double inv_b = 1.0 / static_cast<double>(batch);
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const int y = labels[b];
    if (y < 0 || static_cast<std::size_t>(y) >= classes)
      throw ValidationError("cross_entropy: label " + std::to_string(y) + " out of range");
    const double* z = logits.data() + b * classes;
    const double m = *std::max_element(z, z + classes);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += std::exp(z[c] - m);
    total += std::log(sum) + m - z[y];
    double* g = r.grad.data() + b * classes;
    g[y] -= 1.0;
    for (std::size_t c = 0; c < classes; ++c) g[c] *= inv_b;
  }
  r.loss = total * inv_b;
  return r;
}

}  // namespace tspl
