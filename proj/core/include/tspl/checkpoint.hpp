// core/include/tspl/checkpoint.hpp

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

#ifndef TSPL_CHECKPOINT_HPP_
#define TSPL_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>

#include "tspl/model.hpp"

namespace tspl {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointMeta {
  std::uint64_t split_seed = 0;
  std::uint64_t shuffle_seed = 0;
  int epoch = -1;
  double val_accuracy = 0.0;

  bool operator==(const CheckpointMeta&) const = default;
};

struct Checkpoint {
  ClassifierModel model;
  CheckpointMeta meta;
};

/// One JSON header line (descriptor, seeds, epoch, val accuracy and a
/// name/shape/offset index per tensor) followed by the parameters as raw
/// little-endian doubles. Reading restores the model bit for bit.
void write_checkpoint(const std::filesystem::path& path, const ClassifierModel& model,
                      const CheckpointMeta& meta);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace tspl

#endif  // TSPL_CHECKPOINT_HPP_
