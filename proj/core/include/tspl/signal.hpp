// core/include/tspl/signal.hpp

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

#ifndef TSPL_SIGNAL_HPP_
#define TSPL_SIGNAL_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tspl/rng.hpp"

namespace tspl {

inline constexpr int kNumClasses = 10;

enum class SignalClass : int {
  kConstant = 0,
  kLinearIncrease = 1,
  kLinearDecrease = 2,
  kConcave = 3,
  kConvex = 4,
  kExponentialGrowth = 5,
  kExponentialDecay = 6,
  kSigmoid = 7,
  kCubicFunction = 8,
  kGaussian = 9,
};

inline constexpr int class_id(SignalClass c) { return static_cast<int>(c); }
/// Throws ValidationError outside 0..9.
SignalClass class_from_id(int id);
/// Lower-case option string, e.g. "linear increase".
std::string_view class_name(SignalClass c);
std::optional<SignalClass> class_from_name(std::string_view name);
std::array<SignalClass, kNumClasses> all_classes();

/// Generator parameters. Every non-constant curve is scaled so that its
/// noiseless value range on t in [0, 1] is `amplitude` (sigmoid: at most).
/// Fields that do not apply to the class stay zero.
struct SignalParams {
  SignalClass cls = SignalClass::kConstant;
  double amplitude = 1.0;
  double offset = 0.0;
  double noise_sigma = 0.0;

  double slope = 0.0;      // linear: value change over t in [0, 1]
  double curvature = 0.0;  // concave (< 0) / convex (> 0) quadratic coefficient
  double vertex = 0.0;     // concave / convex
  double rate = 0.0;       // exponential
  double steepness = 0.0;  // sigmoid
  double midpoint = 0.0;   // sigmoid
  std::array<double, 3> roots{};  // cubic, ascending
  double cubic_scale = 0.0;       // cubic leading coefficient
  double center = 0.0;     // gaussian
  double width = 0.0;      // gaussian

  bool operator==(const SignalParams&) const = default;
};

// Sampling ranges (uniform).
struct ParamRanges {
  static constexpr double kAmplitudeMin = 0.5, kAmplitudeMax = 2.0;
  static constexpr double kOffsetMin = -1.0, kOffsetMax = 1.0;
  static constexpr double kNoiseFracMax = 0.05;  // sigma <= 0.05 * amplitude
  static constexpr double kVertexMin = 0.3, kVertexMax = 0.7;
  static constexpr double kRateMin = 1.0, kRateMax = 4.0;
  static constexpr double kMidpointMin = 0.2, kMidpointMax = 0.8;
  static constexpr double kSteepnessMin = 5.0, kSteepnessMax = 30.0;
  static constexpr double kCenterMin = 0.2, kCenterMax = 0.8;
  static constexpr double kWidthMin = 0.05, kWidthMax = 0.2;
  static constexpr double kRootMin = 0.0, kRootMax = 1.0;
  static constexpr double kRootMinGap = 0.15;
};

/// True when every coefficient lies inside ParamRanges for its class.
bool params_in_range(const SignalParams& p);

enum class Split : int { kTrain = 0, kVal = 1, kTest = 2, kUnassigned = 3 };
std::string_view split_name(Split s);
Split split_from_name(std::string_view name);

struct TimeSeries {
  std::uint64_t id = 0;
  std::vector<double> values;
  SignalClass gt_class = SignalClass::kConstant;
  SignalParams params;
  Split split = Split::kUnassigned;

  std::size_t length() const { return values.size(); }
  bool operator==(const TimeSeries&) const = default;
};

SignalParams sample_params(SignalClass cls, Rng& rng);

/// Noiseless curve evaluated at t_i = i / (L - 1), i = 0..L-1 (t = 0 when L = 1).
std::vector<double> base_curve(const SignalParams& params, std::size_t length);

/// base_curve plus i.i.d. N(0, noise_sigma^2) noise, in raw units. Throws
/// ValidationError naming the first non-finite field.
TimeSeries generate(const SignalParams& params, std::size_t length, Rng& rng);

/// Min-max rescale to [0, 1]; a flat series becomes all 0.5.
void normalize_minmax(std::span<double> values);

/// Rounds to 9 significant digits, i.e. the value a dataset file stores.
double quantize9(double v);

struct DatasetSpec {
  std::size_t n_per_class = 1000;
  std::array<double, 3> ratios{0.90, 0.05, 0.05};  // train, val, test
  std::size_t length = 256;
  std::uint64_t seed = 1;

  void validate() const;
  /// Per-class counts {train, val, test}: val and test are floor(n * ratio),
  /// train takes the remainder.
  std::array<std::size_t, 3> per_class_counts() const;
  /// Hex SHA-256 prefix of the canonical spec text.
  std::string hash() const;

  bool operator==(const DatasetSpec&) const = default;
};

struct Dataset {
  DatasetSpec spec;
  /// Ordered by id; id = class_id * n_per_class + index within class.
  std::vector<TimeSeries> samples;

  std::vector<std::size_t> indices(Split s) const;
  std::size_t count(Split s) const;
  const TimeSeries* find(std::uint64_t id) const;
};

/// All n_per_class * 10 signals, min-max normalized and quantized, with no
/// split assigned. Sample `id` uses Rng(derive_seed(seed, "sample", id)).
Dataset generate_pool(const DatasetSpec& spec);

/// Stratified split: per class, shuffle that class's ids with
/// Rng(split_seed) (classes in id order, one shared stream) and take
/// val, then test, then train from the front.
Dataset assign_splits(Dataset pool, std::uint64_t split_seed);

/// generate_pool + assign_splits(derive_seed(seed, "split", 0)).
Dataset make_dataset(const DatasetSpec& spec);

/// Keeps n_train / 10 random train samples per class; the rest of the train
/// split becomes kUnassigned. Val and test are untouched.
Dataset subsample_train(const Dataset& dataset, std::size_t n_train, Rng& rng);

}  // namespace tspl

#endif  // TSPL_SIGNAL_HPP_
