// core/include/tspl/gradcheck.hpp

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

#ifndef TSPL_GRADCHECK_HPP_
#define TSPL_GRADCHECK_HPP_

#include <cstdint>
#include <functional>
#include <string>

#include "tspl/model.hpp"

namespace tspl {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  /// Coordinates whose +/- step flipped a ReLU; central differences are not
  /// valid across a kink so they are left out.
  std::size_t skipped_at_kinks = 0;
  bool passed = false;
};

struct GradCheckOptions {
  double tolerance = 1e-3;
  double step = 1e-4;
  std::size_t batch = 4;
  /// Test hook applied to the analytic gradients before comparison.
  std::function<void(Gradients&)> corrupt;
};

/// Small descriptor (506 parameters) used by the CLI and the acceptance suite.
ModelDescriptor gradcheck_descriptor();

/// Compares every analytic gradient coordinate with a central difference of
/// the mean cross-entropy on a random batch (inputs U[0,1), labels uniform),
/// all drawn from `seed`. Relative error is |a - n| / max(|a|, |n|, 1e-6).
GradCheckReport grad_check(const ModelDescriptor& descriptor, std::uint64_t seed,
                           const GradCheckOptions& options = {});

}  // namespace tspl

#endif  // TSPL_GRADCHECK_HPP_
