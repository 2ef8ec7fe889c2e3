// core/include/tspl/model.hpp

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

#ifndef TSPL_MODEL_HPP_
#define TSPL_MODEL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tspl/tensor.hpp"

namespace tspl {

struct ConvStage {
  std::size_t channels = 16;
  std::size_t kernel = 7;
  std::size_t stride = 2;

  bool operator==(const ConvStage&) const = default;
};

/// Student classifier layout:
///
///   input [B, L]
///   -> for each stage: conv1d (zero padding kernel/2) + ReLU
///   -> mean over time
///   -> affine H + ReLU            (the embedding)
///   -> affine num_classes         (logits)
///
/// Conv weights are stored [out_channels, kernel, in_channels].
struct ModelDescriptor {
  std::size_t input_length = 256;
  std::vector<ConvStage> stages{{16, 9, 4}, {32, 9, 4}};
  std::size_t hidden = 64;
  std::size_t num_classes = 10;

  void validate() const;
  /// Output length of stage `i` (time axis).
  std::size_t stage_length(std::size_t i) const;
  std::size_t parameter_count() const;

  bool operator==(const ModelDescriptor&) const = default;
};

struct ClassifierModel {
  ModelDescriptor descriptor;
  std::uint64_t init_seed = 0;
  /// conv{i}.weight, conv{i}.bias, ..., fc1.weight, fc1.bias, fc2.weight,
  /// fc2.bias, in that order.
  std::vector<NamedTensor> params;
  /// Incremented by every optimizer update; forward caches remember it so a
  /// backward pass against changed parameters is refused.
  std::uint64_t version = 0;

  std::size_t parameter_count() const;
  const Tensor& param(const std::string& name) const;
  Tensor& param(const std::string& name);

  bool operator==(const ClassifierModel& other) const {
    return descriptor == other.descriptor && init_seed == other.init_seed &&
           params == other.params;
  }
};

/// One gradient tensor per model parameter, same order and shapes.
using Gradients = std::vector<NamedTensor>;

Gradients zero_gradients(const ClassifierModel& model);

/// Weights ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)) drawn in parameter order from
/// Rng(seed); biases start at zero.
ClassifierModel init_model(const ModelDescriptor& descriptor, std::uint64_t seed);

/// Activations kept by forward() for backward().
struct ForwardCache {
  std::size_t batch = 0;
  const ClassifierModel* model = nullptr;
  std::uint64_t model_version = 0;
  std::vector<double> input;                    // [B, L]
  std::vector<std::vector<double>> stage_cols;  // im2col per stage
  std::vector<std::vector<double>> stage_out;   // post-ReLU [B, T_i, C_i]
  std::vector<double> pooled;                   // [B, C_last]
  std::vector<double> hidden_pre;               // [B, H]
  std::vector<double> hidden;                   // [B, H] post-ReLU
  std::vector<double> logits;                   // [B, classes]
};

/// Runs the network on `batch` (B rows of length L, row-major). Returns
/// logits [B, classes]; the cache holds everything backward() needs.
std::span<const double> forward(const ClassifierModel& model,
                                std::span<const double> batch,
                                std::size_t batch_size, ForwardCache& cache);

/// Reverse-mode pass. `logit_grad` is dLoss/dlogits [B, classes]. Gradients
/// are written (not accumulated) into `grads`.
void backward(const ClassifierModel& model, const ForwardCache& cache,
              std::span<const double> logit_grad, Gradients& grads);

/// Embedding rows [B, H] from the most recent forward().
std::span<const double> embeddings(const ForwardCache& cache);

}  // namespace tspl

#endif  // TSPL_MODEL_HPP_
