// core/include/tspl/loss.hpp

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

#ifndef TSPL_LOSS_HPP_
#define TSPL_LOSS_HPP_

#include <span>
#include <vector>

namespace tspl {

struct LossResult {
  double loss = 0.0;
  /// dLoss/dlogits, [B, classes].
  std::vector<double> grad;
};

/// Row-wise softmax with max subtraction.
std::vector<double> softmax(std::span<const double> logits, std::size_t classes);

/// Mean over the batch of -log softmax(logits)[label].
LossResult cross_entropy(std::span<const double> logits, std::span<const int> labels,
                         std::size_t classes = 10);

}  // namespace tspl

#endif  // TSPL_LOSS_HPP_
