// tests/unit/signal_test.cpp

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

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tspl/dataset_io.hpp"
#include "tspl/error.hpp"
#include "tspl/rng.hpp"
#include "tspl/signal.hpp"

namespace tspl {
namespace {

using testing::small_spec;

SignalParams noiseless(SignalClass cls, std::uint64_t seed) {
  Rng rng(seed);
  SignalParams p = sample_params(cls, rng);
  p.noise_sigma = 0.0;
  return p;
}

// Rng

TEST(Rng, SplitmixAndFnvReferenceValues) {
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Rng, EngineIsStandardMt19937_64) {
  Rng rng(5489);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = rng.next_u64();
  EXPECT_EQ(x, 9981545732273789042ULL);
}

TEST(Rng, UniformFromTopBits) {
  Rng a(11), b(11);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, static_cast<double>(b.next_u64() >> 11) * 0x1.0p-53);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Rng, BelowStaysInRangeAndCoversIt) {
  Rng rng(3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Rng, NormalMoments) {
  Rng rng(9);
  double s = 0, s2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.03);
  EXPECT_NEAR(s2 / n, 1.0, 0.04);
}

TEST(Rng, DerivedStreamsDifferByPurposeAndIndex) {
  const auto a = derive_seed(1, "split", 0);
  EXPECT_EQ(a, derive_seed(1, "split", 0));
  EXPECT_NE(a, derive_seed(1, "split", 1));
  EXPECT_NE(a, derive_seed(1, "init", 0));
  EXPECT_NE(a, derive_seed(2, "split", 0));
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(4);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  rng.shuffle(std::span<int>(v));
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_NE(v, sorted);
}

// Classes

TEST(SignalClass, TenIdsAreABijection) {
  std::set<int> ids;
  for (SignalClass c : all_classes()) {
    ids.insert(class_id(c));
    EXPECT_EQ(class_from_id(class_id(c)), c);
    EXPECT_EQ(class_from_name(class_name(c)), c);
  }
  EXPECT_EQ(ids.size(), 10u);
  EXPECT_EQ(*ids.begin(), 0);
  EXPECT_EQ(*ids.rbegin(), 9);
  EXPECT_THROW(class_from_id(10), ValidationError);
  EXPECT_THROW(class_from_id(-1), ValidationError);
}

TEST(SignalClass, DisplayNames) {
  EXPECT_EQ(class_name(SignalClass::kConstant), "constant");
  EXPECT_EQ(class_name(SignalClass::kLinearIncrease), "linear increase");
  EXPECT_EQ(class_name(SignalClass::kGaussian), "gaussian");
  EXPECT_FALSE(class_from_name("square wave").has_value());
}

// sample_params

TEST(SampleParams, ConstantSeed42) {
  Rng rng(42);
  const SignalParams p = sample_params(SignalClass::kConstant, rng);
  EXPECT_EQ(p.cls, SignalClass::kConstant);
  EXPECT_GE(p.offset, ParamRanges::kOffsetMin);
  EXPECT_LE(p.offset, ParamRanges::kOffsetMax);
  EXPECT_EQ(p.slope, 0.0);
  EXPECT_EQ(p.curvature, 0.0);
}

TEST(SampleParams, SigmoidSeed7) {
  Rng rng(7);
  const SignalParams p = sample_params(SignalClass::kSigmoid, rng);
  EXPECT_GT(p.steepness, 0.0);
  EXPECT_GE(p.midpoint, 0.2);
  EXPECT_LE(p.midpoint, 0.8);
}

TEST(SampleParams, CubicSeed3) {
  Rng rng(3);
  const SignalParams p = sample_params(SignalClass::kCubicFunction, rng);
  const auto& r = p.roots;
  EXPECT_TRUE(r[0] != r[1] || r[1] != r[2]);
  for (double x : r) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
  EXPECT_GE(r[1] - r[0], ParamRanges::kRootMinGap);
  EXPECT_GE(r[2] - r[1], ParamRanges::kRootMinGap);
  EXPECT_TRUE(params_in_range(p));
}

TEST(SampleParams, AlwaysInRangeAndDeterministic) {
  for (SignalClass c : all_classes()) {
    for (std::uint64_t s = 0; s < 200; ++s) {
      Rng a(s), b(s);
      const SignalParams p = sample_params(c, a);
      EXPECT_EQ(p, sample_params(c, b));
      EXPECT_EQ(p.cls, c);
      ASSERT_TRUE(params_in_range(p)) << class_name(c) << " seed " << s;
      EXPECT_GE(p.noise_sigma, 0.0);
    }
  }
}

// generate

TEST(Generate, ConstantIsFlat) {
  SignalParams p = noiseless(SignalClass::kConstant, 1);
  Rng rng(0);
  const TimeSeries ts = generate(p, 256, rng);
  ASSERT_EQ(ts.values.size(), 256u);
  for (double v : ts.values) EXPECT_EQ(v, ts.values[0]);
  EXPECT_EQ(ts.gt_class, p.cls);
}

TEST(Generate, LinearIncreaseEndpoints) {
  SignalParams p = noiseless(SignalClass::kLinearIncrease, 2);
  Rng rng(0);
  const std::size_t L = 256;
  const TimeSeries ts = generate(p, L, rng);
  for (std::size_t i = 1; i < L; ++i) EXPECT_GT(ts.values[i], ts.values[i - 1]);
  const double dt = 1.0 / static_cast<double>(L - 1);
  EXPECT_NEAR(ts.values.back() - ts.values.front(), p.slope * static_cast<double>(L - 1) * dt, 1e-12);
}

TEST(Generate, GaussianAtMidpointIsSymmetric) {
  SignalParams p = noiseless(SignalClass::kGaussian, 5);
  p.center = 0.5;
  const std::size_t L = 257;
  Rng rng(0);
  const TimeSeries ts = generate(p, L, rng);
  const auto peak = std::max_element(ts.values.begin(), ts.values.end()) - ts.values.begin();
  EXPECT_NEAR(static_cast<double>(peak), static_cast<double>(L / 2), 1.0);
  for (std::size_t i = 0; i < L; ++i) {
    EXPECT_NEAR(ts.values[i], ts.values[L - 1 - i], 1e-9);
    const double t = static_cast<double>(i) / static_cast<double>(L - 1);
    const double z = t - 0.5;
    EXPECT_NEAR(ts.values[i], p.amplitude * std::exp(-z * z / (2 * p.width * p.width)) + p.offset, 1e-12);
  }
}

TEST(Generate, CubicMatchesClosedForm) {
  SignalParams p = noiseless(SignalClass::kCubicFunction, 8);
  Rng rng(0);
  const TimeSeries ts = generate(p, 200, rng);
  for (std::size_t i = 0; i < 200; ++i) {
    const double t = static_cast<double>(i) / 199.0;
    const auto& r = p.roots;
    EXPECT_NEAR(ts.values[i], p.cubic_scale * (t - r[0]) * (t - r[1]) * (t - r[2]) + p.offset, 1e-9);
  }
}

TEST(Generate, NoiselessShapePredicates) {
  const std::size_t L = 128;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(0);
    {
      const auto v = generate(noiseless(SignalClass::kLinearDecrease, s), L, rng).values;
      for (std::size_t i = 2; i < L; ++i)
        EXPECT_NEAR(v[i] - v[i - 1], v[1] - v[0], 1e-12);
      EXPECT_LT(v[1] - v[0], 0.0);
    }
    {
      const auto v = generate(noiseless(SignalClass::kConcave, s), L, rng).values;
      for (std::size_t i = 2; i < L; ++i) EXPECT_LT(v[i] - 2 * v[i - 1] + v[i - 2], 0.0);
    }
    {
      const auto v = generate(noiseless(SignalClass::kConvex, s), L, rng).values;
      for (std::size_t i = 2; i < L; ++i) EXPECT_GT(v[i] - 2 * v[i - 1] + v[i - 2], 0.0);
    }
    {
      const SignalParams p = noiseless(SignalClass::kExponentialGrowth, s);
      const auto v = generate(p, L, rng).values;
      const double c = p.amplitude / std::expm1(p.rate);
      const double base = p.offset - c;
      const double ratio = (v[1] - base) / (v[0] - base);
      for (std::size_t i = 1; i < L; ++i) EXPECT_NEAR((v[i] - base) / (v[i - 1] - base), ratio, 1e-9);
      EXPECT_NEAR(ratio, std::exp(p.rate / static_cast<double>(L - 1)), 1e-12);
    }
    {
      const auto v = generate(noiseless(SignalClass::kSigmoid, s), L, rng).values;
      int inflections = 0;
      for (std::size_t i = 1; i < L; ++i) EXPECT_GT(v[i], v[i - 1]);
      for (std::size_t i = 3; i < L; ++i) {
        const double d2a = v[i - 1] - 2 * v[i - 2] + v[i - 3];
        const double d2b = v[i] - 2 * v[i - 1] + v[i - 2];
        if ((d2a > 0) != (d2b > 0)) ++inflections;
      }
      EXPECT_EQ(inflections, 1);
    }
    {
      const auto v = generate(noiseless(SignalClass::kGaussian, s), L, rng).values;
      const auto peak = std::max_element(v.begin(), v.end()) - v.begin();
      for (std::ptrdiff_t i = 1; i <= peak; ++i) EXPECT_GE(v[i], v[i - 1]);
      for (std::size_t i = static_cast<std::size_t>(peak) + 1; i < L; ++i) EXPECT_LE(v[i], v[i - 1]);
    }
  }
}

TEST(Generate, NonFiniteParameterIsNamed) {
  SignalParams p = noiseless(SignalClass::kSigmoid, 1);
  p.steepness = std::nan("");
  Rng rng(0);
  try {
    generate(p, 16, rng);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("steepness"), std::string::npos);
  }
  SignalParams q = noiseless(SignalClass::kGaussian, 1);
  q.width = 0.0;
  EXPECT_THROW(generate(q, 16, rng), ValidationError);
}

TEST(Generate, NoiseHasRequestedSpread) {
  SignalParams p = noiseless(SignalClass::kConstant, 1);
  p.noise_sigma = 0.05;
  Rng rng(12);
  const auto v = generate(p, 2048, rng).values;
  double s = 0, s2 = 0;
  for (double x : v) {
    s += x - p.offset;
    s2 += (x - p.offset) * (x - p.offset);
  }
  EXPECT_NEAR(s / 2048, 0.0, 0.005);
  EXPECT_NEAR(std::sqrt(s2 / 2048), 0.05, 0.004);
}

TEST(Normalize, MinMaxAndFlat) {
  std::vector<double> v{2, 4, 3};
  normalize_minmax(v);
  EXPECT_EQ(v, (std::vector<double>{0, 1, 0.5}));
  std::vector<double> flat{3, 3, 3};
  normalize_minmax(flat);
  EXPECT_EQ(flat, (std::vector<double>{0.5, 0.5, 0.5}));
}

// make_dataset

TEST(MakeDataset, DefaultCounts) {
  DatasetSpec spec;
  spec.n_per_class = 1000;
  spec.length = 8;
  const Dataset ds = make_dataset(spec);
  EXPECT_EQ(ds.count(Split::kTrain), 9000u);
  EXPECT_EQ(ds.count(Split::kVal), 500u);
  EXPECT_EQ(ds.count(Split::kTest), 500u);
  std::map<std::pair<int, int>, int> per;
  std::set<std::uint64_t> ids;
  for (const TimeSeries& ts : ds.samples) {
    ++per[{class_id(ts.gt_class), static_cast<int>(ts.split)}];
    ids.insert(ts.id);
  }
  EXPECT_EQ(ids.size(), 10000u);
  for (int c = 0; c < 10; ++c) {
    EXPECT_EQ((per[{c, 0}]), 900);
    EXPECT_EQ((per[{c, 1}]), 50);
    EXPECT_EQ((per[{c, 2}]), 50);
  }
}

TEST(MakeDataset, DeterministicBitForBit) {
  const DatasetSpec spec = small_spec(20);
  EXPECT_EQ(make_dataset(spec).samples, make_dataset(spec).samples);
  DatasetSpec other = spec;
  other.seed = spec.seed + 1;
  EXPECT_NE(make_dataset(spec).samples, make_dataset(other).samples);
}

TEST(MakeDataset, RoundingRule) {
  DatasetSpec spec = small_spec(20);
  EXPECT_EQ(spec.per_class_counts(), (std::array<std::size_t, 3>{18, 1, 1}));
  EXPECT_NO_THROW(make_dataset(spec));
  spec.n_per_class = 10;
  EXPECT_THROW(spec.validate(), ValidationError);
  EXPECT_THROW(make_dataset(spec), ValidationError);
  spec.n_per_class = 33;
  EXPECT_EQ(spec.per_class_counts(), (std::array<std::size_t, 3>{31, 1, 1}));
}

TEST(MakeDataset, RejectsBadRatios) {
  DatasetSpec spec = small_spec();
  spec.ratios = {0.9, 0.05, 0.1};
  EXPECT_THROW(make_dataset(spec), ValidationError);
  spec.ratios = {1.1, -0.05, -0.05};
  EXPECT_THROW(make_dataset(spec), ValidationError);
  spec.ratios = {0.9, 0.05, 0.05};
  spec.n_per_class = 0;
  EXPECT_THROW(make_dataset(spec), ValidationError);
}

TEST(MakeDataset, ValuesNormalizedAndFinite) {
  const Dataset ds = make_dataset(small_spec(20));
  for (const TimeSeries& ts : ds.samples) {
    ASSERT_EQ(ts.values.size(), 64u);
    EXPECT_EQ(ts.gt_class, ts.params.cls);
    const auto [lo, hi] = std::minmax_element(ts.values.begin(), ts.values.end());
    EXPECT_TRUE(std::isfinite(*lo) && std::isfinite(*hi));
    EXPECT_GE(*lo, 0.0);
    EXPECT_LE(*hi, 1.0);
  }
}

TEST(MakeDataset, IdsEncodeClass) {
  const DatasetSpec spec = small_spec(20);
  const Dataset ds = make_dataset(spec);
  for (const TimeSeries& ts : ds.samples)
    EXPECT_EQ(static_cast<int>(ts.id / spec.n_per_class), class_id(ts.gt_class));
}

TEST(MakeDataset, SplitDependsOnlyOnSplitSeed) {
  const DatasetSpec spec = small_spec(20);
  const Dataset pool = generate_pool(spec);
  const Dataset a = assign_splits(pool, 5);
  const Dataset b = assign_splits(pool, 6);
  EXPECT_EQ(a.samples, assign_splits(pool, 5).samples);
  EXPECT_NE(a.indices(Split::kTrain), b.indices(Split::kTrain));
  EXPECT_EQ(make_dataset(spec).samples, assign_splits(pool, derive_seed(spec.seed, "split", 0)).samples);
}

// Shape descriptor of a normalized curve: direction and curvature
// fractions, their sign-change counts, and the levels at both ends and the
// middle.
std::vector<double> shape_features(const std::vector<double>& v) {
  const auto sign = [](double x) { return x > 1e-12 ? 1 : (x < -1e-12 ? -1 : 0); };
  const auto stats = [&](const std::vector<double>& d) {
    double pos = 0;
    int changes = 0, last = 0;
    for (double x : d) {
      const int s = sign(x);
      pos += s > 0;
      if (s != 0 && last != 0 && s != last) ++changes;
      if (s != 0) last = s;
    }
    return std::pair<double, double>{pos / static_cast<double>(d.size()), changes};
  };
  std::vector<double> d1, d2;
  for (std::size_t i = 1; i < v.size(); ++i) d1.push_back(v[i] - v[i - 1]);
  for (std::size_t i = 1; i < d1.size(); ++i) d2.push_back(d1[i] - d1[i - 1]);
  const auto [up, turns] = stats(d1);
  const auto [convex, inflections] = stats(d2);
  return {up, turns, convex, inflections, v.front(), v[v.size() / 2], v.back()};
}

TEST(MakeDataset, NearestCentroidSeparatesNoiselessClasses) {
  const std::size_t L = 64, n = 30;
  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  std::array<std::vector<double>, 10> centroid;
  for (SignalClass cls : all_classes()) {
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng(1000 * class_id(cls) + i);
      SignalParams p = sample_params(cls, rng);
      p.noise_sigma = 0.0;
      auto v = base_curve(p, L);
      normalize_minmax(v);
      auto f = shape_features(v);
      auto& c = centroid[class_id(cls)];
      c.resize(f.size(), 0.0);
      for (std::size_t k = 0; k < f.size(); ++k) c[k] += f[k] / n;
      xs.push_back(std::move(f));
      ys.push_back(class_id(cls));
    }
  }
  std::size_t correct = 0;
  for (std::size_t s = 0; s < xs.size(); ++s) {
    int best = -1;
    double best_d = 1e300;
    for (int c = 0; c < 10; ++c) {
      double d = 0;
      for (std::size_t k = 0; k < xs[s].size(); ++k)
        d += (xs[s][k] - centroid[c][k]) * (xs[s][k] - centroid[c][k]);
      if (d < best_d) best_d = d, best = c;
    }
    correct += best == ys[s];
    EXPECT_EQ(best, ys[s]) << "sample " << s;
  }
  EXPECT_EQ(correct, xs.size());
}

// subsample_train

TEST(SubsampleTrain, NinetyGivesNinePerClass) {
  const Dataset ds = make_dataset(small_spec(40));
  Rng rng(1);
  const Dataset sub = subsample_train(ds, 90, rng);
  EXPECT_EQ(sub.count(Split::kTrain), 90u);
  std::array<int, 10> per{};
  for (std::size_t i : sub.indices(Split::kTrain)) ++per[class_id(sub.samples[i].gt_class)];
  for (int c : per) EXPECT_EQ(c, 9);
  EXPECT_EQ(sub.indices(Split::kVal), ds.indices(Split::kVal));
  EXPECT_EQ(sub.indices(Split::kTest), ds.indices(Split::kTest));
}

TEST(SubsampleTrain, FullSizeIsIdentity) {
  const Dataset ds = make_dataset(small_spec(40));
  Rng rng(1);
  const Dataset sub = subsample_train(ds, ds.count(Split::kTrain), rng);
  EXPECT_EQ(sub.samples, ds.samples);
}

TEST(SubsampleTrain, SubsetOfTrainWithDistinctIds) {
  const Dataset ds = make_dataset(small_spec(100));
  Rng rng(2);
  const Dataset sub = subsample_train(ds, 300, rng);
  std::set<std::uint64_t> train_ids;
  for (std::size_t i : ds.indices(Split::kTrain)) train_ids.insert(ds.samples[i].id);
  std::set<std::uint64_t> picked;
  for (std::size_t i : sub.indices(Split::kTrain)) {
    EXPECT_TRUE(train_ids.count(sub.samples[i].id));
    picked.insert(sub.samples[i].id);
  }
  EXPECT_EQ(picked.size(), 300u);
}

TEST(SubsampleTrain, Errors) {
  const Dataset ds = make_dataset(small_spec(40));
  Rng rng(1);
  EXPECT_THROW(subsample_train(ds, 95, rng), ValidationError);
  EXPECT_THROW(subsample_train(ds, 10000, rng), ValidationError);
}

// Dataset files

TEST(DatasetIo, RoundTripExact) {
  testing::TempDir dir;
  const Dataset ds = make_dataset(small_spec(20));
  write_dataset(dir.path(), ds);
  const Dataset back = read_dataset(dir.path());
  EXPECT_EQ(back.spec, ds.spec);
  EXPECT_EQ(back.samples, ds.samples);
}

TEST(DatasetIo, ByteIdenticalRewrite) {
  testing::TempDir a, b;
  write_dataset(a.path(), make_dataset(small_spec(20)));
  write_dataset(b.path(), make_dataset(small_spec(20)));
  for (const auto& name : dataset_file_names())
    EXPECT_EQ(testing::slurp(a.path() / name), testing::slurp(b.path() / name));
}

TEST(DatasetIo, HeaderFields) {
  testing::TempDir dir;
  const Dataset ds = make_dataset(small_spec(20));
  write_dataset(dir.path(), ds);
  std::ifstream in(dir.path() / "train.jsonl");
  std::string header;
  std::getline(in, header);
  EXPECT_NE(header.find("\"format\":\"tspl-dataset\""), std::string::npos);
  EXPECT_NE(header.find("\"spec_hash\":\"" + ds.spec.hash() + "\""), std::string::npos);
  EXPECT_NE(header.find("\"length\":64"), std::string::npos);
}

TEST(DatasetIo, DetectsCorruption) {
  testing::TempDir dir;
  write_dataset(dir.path(), make_dataset(small_spec(20)));
  EXPECT_THROW(read_dataset(dir.path() / "missing"), IoError);
  {
    std::ofstream out(dir.path() / "val.jsonl", std::ios::app);
    out << "{not json\n";
  }
  EXPECT_THROW(read_dataset(dir.path()), IoError);
}

TEST(DatasetIo, ParamsJsonRoundTrip) {
  for (SignalClass c : all_classes()) {
    Rng rng(static_cast<std::uint64_t>(class_id(c)));
    const SignalParams p = sample_params(c, rng);
    EXPECT_EQ(params_from_json(params_to_json(p)), p);
  }
}

}  // namespace
}  // namespace tspl
