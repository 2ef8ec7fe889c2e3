// core/src/signal.cpp

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

#include "tspl/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "tspl/error.hpp"
#include "tspl/hash.hpp"

namespace tspl {

namespace {

constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "constant",          "linear increase",   "linear decrease", "concave",
    "convex",            "exponential growth", "exponential decay", "sigmoid",
    "cubic function",    "gaussian"};

double cubic_value(const std::array<double, 3>& r, double t) {
  return (t - r[0]) * (t - r[1]) * (t - r[2]);
}

// Value range of the monic cubic with roots r on [0, 1]: endpoints plus the
// stationary points (s1 +- sqrt(s1^2 - 3 s2)) / 3 that fall inside.
double cubic_span(const std::array<double, 3>& r) {
  const double s1 = r[0] + r[1] + r[2];
  const double s2 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
  double lo = std::min(cubic_value(r, 0.0), cubic_value(r, 1.0));
  double hi = std::max(cubic_value(r, 0.0), cubic_value(r, 1.0));
  const double disc = s1 * s1 - 3.0 * s2;
  if (disc >= 0.0) {
    for (double sign : {-1.0, 1.0}) {
      const double t = (s1 + sign * std::sqrt(disc)) / 3.0;
      if (t > 0.0 && t < 1.0) {
        lo = std::min(lo, cubic_value(r, t));
        hi = std::max(hi, cubic_value(r, t));
      }
    }
  }
  return hi - lo;
}

bool in(double v, double lo, double hi) { return v >= lo && v <= hi; }

void require_finite(double v, const char* field) {
  if (!std::isfinite(v))
    throw ValidationError(std::string("generate: parameter '") + field + "' is not finite");
}

void require_positive(double v, const char* field) {
  if (!(v > 0.0))
    throw ValidationError(std::string("generate: parameter '") + field + "' must be positive");
}

}  // namespace

SignalClass class_from_id(int id) {
  if (id < 0 || id >= kNumClasses)
    throw ValidationError("class id " + std::to_string(id) + " outside 0..9");
  return static_cast<SignalClass>(id);
}

std::string_view class_name(SignalClass c) { return kClassNames.at(static_cast<std::size_t>(c)); }

std::optional<SignalClass> class_from_name(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i)
    if (kClassNames[static_cast<std::size_t>(i)] == name) return static_cast<SignalClass>(i);
  return std::nullopt;
}

std::array<SignalClass, kNumClasses> all_classes() {
  std::array<SignalClass, kNumClasses> out{};
  for (int i = 0; i < kNumClasses; ++i) out[static_cast<std::size_t>(i)] = static_cast<SignalClass>(i);
  return out;
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
    case Split::kUnassigned: return "unassigned";
  }
  return "unassigned";
}

Split split_from_name(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  if (name == "unassigned") return Split::kUnassigned;
  throw ValidationError("unknown split '" + std::string(name) + "'");
}

bool params_in_range(const SignalParams& p) {
  using R = ParamRanges;
  if (!in(p.amplitude, R::kAmplitudeMin, R::kAmplitudeMax)) return false;
  if (!in(p.offset, R::kOffsetMin, R::kOffsetMax)) return false;
  if (!in(p.noise_sigma, 0.0, R::kNoiseFracMax * p.amplitude)) return false;
  switch (p.cls) {
    case SignalClass::kConstant:
      return true;
    case SignalClass::kLinearIncrease:
    case SignalClass::kLinearDecrease:
      return p.slope > 0.0;
    case SignalClass::kConcave:
      return p.curvature < 0.0 && in(p.vertex, R::kVertexMin, R::kVertexMax);
    case SignalClass::kConvex:
      return p.curvature > 0.0 && in(p.vertex, R::kVertexMin, R::kVertexMax);
    case SignalClass::kExponentialGrowth:
    case SignalClass::kExponentialDecay:
      return in(p.rate, R::kRateMin, R::kRateMax);
    case SignalClass::kSigmoid:
      return in(p.midpoint, R::kMidpointMin, R::kMidpointMax) &&
             in(p.steepness, R::kSteepnessMin, R::kSteepnessMax);
    case SignalClass::kCubicFunction: {
      const auto& r = p.roots;
      if (!(r[0] <= r[1] && r[1] <= r[2])) return false;
      if (!in(r[0], R::kRootMin, R::kRootMax) || !in(r[2], R::kRootMin, R::kRootMax)) return false;
      // Tiny slack so values read back from 9-digit files still qualify.
      return r[1] - r[0] >= R::kRootMinGap - 1e-9 && r[2] - r[1] >= R::kRootMinGap - 1e-9 &&
             p.cubic_scale > 0.0;
    }
    case SignalClass::kGaussian:
      return in(p.center, R::kCenterMin, R::kCenterMax) && in(p.width, R::kWidthMin, R::kWidthMax);
  }
  return false;
}

SignalParams sample_params(SignalClass cls, Rng& rng) {
  using R = ParamRanges;
  SignalParams p;
  p.cls = cls;
  p.amplitude = rng.uniform(R::kAmplitudeMin, R::kAmplitudeMax);
  p.offset = rng.uniform(R::kOffsetMin, R::kOffsetMax);
  p.noise_sigma = rng.uniform(0.0, R::kNoiseFracMax) * p.amplitude;
  switch (cls) {
    case SignalClass::kConstant:
      break;
    case SignalClass::kLinearIncrease:
    case SignalClass::kLinearDecrease:
      p.slope = p.amplitude;
      break;
    case SignalClass::kConcave:
    case SignalClass::kConvex: {
      p.vertex = rng.uniform(R::kVertexMin, R::kVertexMax);
      const double reach = std::max(p.vertex * p.vertex, (1.0 - p.vertex) * (1.0 - p.vertex));
      p.curvature = (cls == SignalClass::kConcave ? -1.0 : 1.0) * p.amplitude / reach;
      break;
    }
    case SignalClass::kExponentialGrowth:
    case SignalClass::kExponentialDecay:
      p.rate = rng.uniform(R::kRateMin, R::kRateMax);
      break;
    case SignalClass::kSigmoid:
      p.midpoint = rng.uniform(R::kMidpointMin, R::kMidpointMax);
      p.steepness = rng.uniform(R::kSteepnessMin, R::kSteepnessMax);
      break;
    case SignalClass::kCubicFunction: {
      std::array<double, 3> r{};
      do {
        for (double& x : r) x = rng.uniform(R::kRootMin, R::kRootMax);
        std::sort(r.begin(), r.end());
      } while (r[1] - r[0] < R::kRootMinGap || r[2] - r[1] < R::kRootMinGap);
      p.roots = r;
      p.cubic_scale = p.amplitude / cubic_span(r);
      break;
    }
    case SignalClass::kGaussian:
      p.center = rng.uniform(R::kCenterMin, R::kCenterMax);
      p.width = rng.uniform(R::kWidthMin, R::kWidthMax);
      break;
  }
  return p;
}

std::vector<double> base_curve(const SignalParams& p, std::size_t length) {
  std::vector<double> out(length);
  const double dt = length > 1 ? 1.0 / static_cast<double>(length - 1) : 0.0;
  const double a = p.amplitude;
  const double b = p.offset;
  for (std::size_t i = 0; i < length; ++i) {
    const double t = static_cast<double>(i) * dt;
    double v = b;
    switch (p.cls) {
      case SignalClass::kConstant:
        break;
      case SignalClass::kLinearIncrease:
        v = p.slope * t + b;
        break;
      case SignalClass::kLinearDecrease:
        v = -p.slope * t + b;
        break;
      case SignalClass::kConcave:
      case SignalClass::kConvex:
        v = p.curvature * (t - p.vertex) * (t - p.vertex) + b;
        break;
      case SignalClass::kExponentialGrowth: {
        const double c = a / std::expm1(p.rate);
        v = c * std::exp(p.rate * t) + (b - c);
        break;
      }
      case SignalClass::kExponentialDecay: {
        const double c = a / -std::expm1(-p.rate);
        v = c * std::exp(-p.rate * t) + (b - c * std::exp(-p.rate));
        break;
      }
      case SignalClass::kSigmoid:
        v = a / (1.0 + std::exp(-p.steepness * (t - p.midpoint))) + b;
        break;
      case SignalClass::kCubicFunction:
        v = p.cubic_scale * cubic_value(p.roots, t) + b;
        break;
      case SignalClass::kGaussian: {
        const double z = t - p.center;
        v = a * std::exp(-z * z / (2.0 * p.width * p.width)) + b;
        break;
      }
    }
    out[i] = v;
  }
  return out;
}

TimeSeries generate(const SignalParams& p, std::size_t length, Rng& rng) {
  if (length == 0) throw ValidationError("generate: length must be positive");
  require_finite(p.amplitude, "amplitude");
  require_finite(p.offset, "offset");
  require_finite(p.noise_sigma, "noise_sigma");
  if (p.noise_sigma < 0.0) throw ValidationError("generate: parameter 'noise_sigma' is negative");
  switch (p.cls) {
    case SignalClass::kLinearIncrease:
    case SignalClass::kLinearDecrease:
      require_finite(p.slope, "slope");
      break;
    case SignalClass::kConcave:
    case SignalClass::kConvex:
      require_finite(p.curvature, "curvature");
      require_finite(p.vertex, "vertex");
      break;
    case SignalClass::kExponentialGrowth:
    case SignalClass::kExponentialDecay:
      require_finite(p.rate, "rate");
      require_positive(p.rate, "rate");
      break;
    case SignalClass::kSigmoid:
      require_finite(p.steepness, "steepness");
      require_finite(p.midpoint, "midpoint");
      require_positive(p.steepness, "steepness");
      break;
    case SignalClass::kCubicFunction:
      for (double r : p.roots) require_finite(r, "roots");
      require_finite(p.cubic_scale, "cubic_scale");
      break;
    case SignalClass::kGaussian:
      require_finite(p.center, "center");
      require_finite(p.width, "width");
      require_positive(p.width, "width");
      break;
    case SignalClass::kConstant:
      break;
  }

  TimeSeries ts;
  ts.gt_class = p.cls;
  ts.params = p;
  ts.values = base_curve(p, length);
  if (p.noise_sigma > 0.0)
    for (double& v : ts.values) v += p.noise_sigma * rng.normal();
  return ts;
}

void normalize_minmax(std::span<double> values) {
  if (values.empty()) return;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) {
    std::fill(values.begin(), values.end(), 0.5);
    return;
  }
  for (double& v : values) v = (v - lo) / range;
}

double quantize9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

void DatasetSpec::validate() const {
  if (n_per_class == 0) throw ValidationError("dataset: n_per_class must be positive");
  if (length == 0) throw ValidationError("dataset: length must be positive");
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ValidationError("dataset: split ratios must be nonnegative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("dataset: split ratios sum to " + std::to_string(sum) + ", not 1");
  const auto counts = per_class_counts();
  static constexpr std::array<const char*, 3> kNames = {"train", "val", "test"};
  for (std::size_t s = 0; s < 3; ++s)
    if (ratios[s] > 0.0 && counts[s] == 0)
      throw ValidationError(std::string("dataset: n_per_class=") + std::to_string(n_per_class) +
                            " leaves the " + kNames[s] + " split without samples of some class");
}

std::array<std::size_t, 3> DatasetSpec::per_class_counts() const {
  // The 1e-9 guard keeps products such as 0.05 * 20 from flooring to 0.
  const auto part = [&](double r) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n_per_class) * r + 1e-9));
  };
  const std::size_t val = part(ratios[1]);
  const std::size_t test = part(ratios[2]);
  const std::size_t train = n_per_class >= val + test ? n_per_class - val - test : 0;
  return {train, val, test};
}

std::string DatasetSpec::hash() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "tspl-dataset-spec/1 n_per_class=%zu ratios=%.17g,%.17g,%.17g length=%zu seed=%llu",
                n_per_class, ratios[0], ratios[1], ratios[2], length,
                static_cast<unsigned long long>(seed));
  return sha256_hex(std::string_view(buf)).substr(0, 16);
}

std::vector<std::size_t> Dataset::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (samples[i].split == s) out.push_back(i);
  return out;
}

std::size_t Dataset::count(Split s) const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [s](const TimeSeries& t) { return t.split == s; }));
}

const TimeSeries* Dataset::find(std::uint64_t id) const {
  auto it = std::lower_bound(samples.begin(), samples.end(), id,
                             [](const TimeSeries& t, std::uint64_t v) { return t.id < v; });
  if (it != samples.end() && it->id == id) return &*it;
  for (const TimeSeries& t : samples)
    if (t.id == id) return &t;
  return nullptr;
}

Dataset generate_pool(const DatasetSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.spec = spec;
  ds.samples.reserve(spec.n_per_class * kNumClasses);
  for (SignalClass cls : all_classes()) {
    for (std::size_t j = 0; j < spec.n_per_class; ++j) {
      const std::uint64_t id = static_cast<std::uint64_t>(class_id(cls)) * spec.n_per_class + j;
      Rng rng(derive_seed(spec.seed, "sample", id));
      TimeSeries ts = generate(sample_params(cls, rng), spec.length, rng);
      ts.id = id;
      normalize_minmax(ts.values);
      for (double& v : ts.values) v = quantize9(v);
      ds.samples.push_back(std::move(ts));
    }
  }
  return ds;
}

Dataset assign_splits(Dataset pool, std::uint64_t split_seed) {
  const DatasetSpec& spec = pool.spec;
  spec.validate();
  const auto counts = spec.per_class_counts();
  Rng rng(split_seed);
  for (SignalClass cls : all_classes()) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < pool.samples.size(); ++i)
      if (pool.samples[i].gt_class == cls) members.push_back(i);
    if (members.size() != spec.n_per_class)
      throw ValidationError("assign_splits: class '" + std::string(class_name(cls)) + "' has " +
                            std::to_string(members.size()) + " samples, expected " +
                            std::to_string(spec.n_per_class));
    rng.shuffle(std::span<std::size_t>(members));
    std::size_t k = 0;
    for (std::size_t n = 0; n < counts[1]; ++n) pool.samples[members[k++]].split = Split::kVal;
    for (std::size_t n = 0; n < counts[2]; ++n) pool.samples[members[k++]].split = Split::kTest;
    while (k < members.size()) pool.samples[members[k++]].split = Split::kTrain;
  }
  return pool;
}

Dataset make_dataset(const DatasetSpec& spec) {
  return assign_splits(generate_pool(spec), derive_seed(spec.seed, "split", 0));
}

Dataset subsample_train(const Dataset& dataset, std::size_t n_train, Rng& rng) {
  if (n_train == 0 || n_train % kNumClasses != 0)
    throw ValidationError("subsample_train: n_train=" + std::to_string(n_train) +
                          " is not a positive multiple of 10");
  const std::size_t per_class = n_train / kNumClasses;
  Dataset out = dataset;
  for (SignalClass cls : all_classes()) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < out.samples.size(); ++i)
      if (out.samples[i].split == Split::kTrain && out.samples[i].gt_class == cls)
        members.push_back(i);
    if (members.size() < per_class)
      throw ValidationError("subsample_train: class '" + std::string(class_name(cls)) +
                            "' has only " + std::to_string(members.size()) +
                            " training samples, need " + std::to_string(per_class));
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t k = per_class; k < members.size(); ++k)
      out.samples[members[k]].split = Split::kUnassigned;
  }
  return out;
}

}  // namespace tspl
