// tests/unit/nncore_test.cpp

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

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tspl/checkpoint.hpp"
#include "tspl/error.hpp"
#include "tspl/gradcheck.hpp"
#include "tspl/loss.hpp"
#include "tspl/model.hpp"
#include "tspl/optim.hpp"
#include "tspl/rng.hpp"

namespace tspl {
namespace {

ModelDescriptor tiny() {
  ModelDescriptor d;
  d.input_length = 32;
  d.stages = {{3, 5, 2}, {4, 3, 2}};
  d.hidden = 8;
  return d;
}

std::vector<double> random_batch(std::size_t rows, std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(rows * length);
  for (double& v : x) v = rng.uniform();
  return x;
}

std::vector<int> random_labels(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> y(rows);
  for (int& v : y) v = static_cast<int>(rng.below(10));
  return y;
}

double mean_loss(const ClassifierModel& m, const std::vector<double>& x, const std::vector<int>& y) {
  ForwardCache cache;
  const auto logits = forward(m, x, y.size(), cache);
  return cross_entropy(logits, y).loss;
}

Gradients gradients(const ClassifierModel& m, const std::vector<double>& x, const std::vector<int>& y) {
  ForwardCache cache;
  const auto logits = forward(m, x, y.size(), cache);
  const LossResult l = cross_entropy(logits, y);
  Gradients g = zero_gradients(m);
  backward(m, cache, l.grad, g);
  return g;
}

// Parameter count oracle: conv C_out*K*C_in + C_out per stage, then two
// affine layers.
std::size_t closed_form_count(const ModelDescriptor& d) {
  std::size_t n = 0, in = 1;
  for (const ConvStage& s : d.stages) {
    n += s.channels * s.kernel * in + s.channels;
    in = s.channels;
  }
  return n + d.hidden * in + d.hidden + d.num_classes * d.hidden + d.num_classes;
}

// init_model

TEST(InitModel, SameSeedSameParameters) {
  EXPECT_EQ(init_model(ModelDescriptor{}, 3), init_model(ModelDescriptor{}, 3));
  EXPECT_NE(init_model(ModelDescriptor{}, 3).params, init_model(ModelDescriptor{}, 4).params);
}

TEST(InitModel, DefaultParameterCount) {
  const ModelDescriptor d;
  EXPECT_EQ(d.input_length, 256u);
  EXPECT_EQ(d.parameter_count(), closed_form_count(d));
  EXPECT_EQ(init_model(d, 1).parameter_count(), closed_form_count(d));
  EXPECT_EQ(d.parameter_count(), 7562u);
  EXPECT_EQ(closed_form_count(tiny()), init_model(tiny(), 1).parameter_count());
}

TEST(InitModel, FanInUniformAndZeroBias) {
  const ClassifierModel m = init_model(ModelDescriptor{}, 5);
  ASSERT_EQ(m.params.front().name, "conv0.weight");
  ASSERT_EQ(m.params.back().name, "fc2.bias");
  for (const NamedTensor& p : m.params) {
    EXPECT_TRUE(p.value.all_finite());
    EXPECT_EQ(p.value.size(), Tensor::element_count(p.value.shape));
    if (p.name.ends_with(".bias")) {
      for (double v : p.value.data) EXPECT_EQ(v, 0.0);
      continue;
    }
    std::size_t fan_in = 1;
    for (std::size_t k = 1; k < p.value.shape.size(); ++k) fan_in *= p.value.shape[k];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (double v : p.value.data) EXPECT_LE(std::abs(v), bound);
  }
  EXPECT_EQ(m.param("conv0.weight").shape, (std::vector<std::size_t>{16, 9, 1}));
}

TEST(InitModel, InvalidDescriptors) {
  ModelDescriptor d = tiny();
  d.num_classes = 5;
  EXPECT_THROW(init_model(d, 1), ValidationError);
  d = tiny();
  d.stages.clear();
  EXPECT_THROW(init_model(d, 1), ValidationError);
  d = tiny();
  d.stages[0].stride = 0;
  EXPECT_THROW(init_model(d, 1), ValidationError);
  d = tiny();
  d.input_length = 0;
  EXPECT_THROW(init_model(d, 1), ValidationError);
  EXPECT_THROW(init_model(tiny(), 1).param("nope"), ValidationError);
}

// forward

TEST(Forward, ZeroHeadGivesBias) {
  ClassifierModel m = init_model(ModelDescriptor{}, 2);
  m.param("fc2.weight").fill(0.0);
  for (int k = 0; k < 10; ++k) m.param("fc2.bias").data[k] = 0.1 * k - 0.3;
  ForwardCache cache;
  const std::vector<double> x(256, 0.0);
  const auto logits = forward(m, x, 1, cache);
  ASSERT_EQ(logits.size(), 10u);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(logits[k], m.param("fc2.bias").data[k]);
}

TEST(Forward, DuplicateAndPermutedRows) {
  const ClassifierModel m = init_model(tiny(), 3);
  const auto x = random_batch(3, 32, 1);
  ForwardCache c1;
  const auto first = forward(m, x, 3, c1);
  const std::vector<double> out(first.begin(), first.end());
  std::vector<double> swapped(x.begin() + 64, x.end());
  swapped.insert(swapped.end(), x.begin() + 32, x.begin() + 64);
  swapped.insert(swapped.end(), x.begin(), x.begin() + 32);
  std::vector<double> dup(x.begin(), x.begin() + 32);
  dup.insert(dup.end(), x.begin(), x.begin() + 32);
  ForwardCache c2, c3;
  const auto rev = forward(m, swapped, 3, c2);
  for (int k = 0; k < 10; ++k) {
    EXPECT_EQ(rev[k], out[20 + k]);
    EXPECT_EQ(rev[10 + k], out[10 + k]);
    EXPECT_EQ(rev[20 + k], out[k]);
  }
  const auto twice = forward(m, dup, 2, c3);
  for (int k = 0; k < 10; ++k) {
    EXPECT_EQ(twice[k], out[k]);
    EXPECT_EQ(twice[10 + k], out[k]);
  }
}

TEST(Forward, ShapeMismatch) {
  const ClassifierModel m = init_model(tiny(), 3);
  ForwardCache cache;
  const std::vector<double> x(31, 0.0);
  EXPECT_THROW(forward(m, x, 1, cache), ValidationError);
}

TEST(Forward, EmbeddingsHaveHiddenWidth) {
  const ClassifierModel m = init_model(tiny(), 3);
  ForwardCache cache;
  forward(m, random_batch(4, 32, 2), 4, cache);
  const auto e = embeddings(cache);
  EXPECT_EQ(e.size(), 4u * 8u);
  for (double v : e) EXPECT_GE(v, 0.0);
}

// loss

TEST(CrossEntropy, UniformLogitsGiveLog10) {
  const std::vector<double> logits(20, 0.3);
  EXPECT_NEAR(cross_entropy(logits, std::vector<int>{1, 7}).loss, std::log(10.0), 1e-15);
  EXPECT_NEAR(std::log(10.0), 2.302585, 1e-6);
}

TEST(CrossEntropy, DecreasesWithMargin) {
  double last = 1e9;
  for (double margin = 0; margin <= 10; margin += 0.5) {
    std::vector<double> logits(10, 0.0);
    logits[4] = margin;
    const double l = cross_entropy(logits, std::vector<int>{4}).loss;
    EXPECT_LT(l, last);
    last = l;
  }
}

TEST(CrossEntropy, MatchesExtendedPrecisionReference) {
  Rng rng(8);
  std::vector<double> logits(40);
  for (double& v : logits) v = rng.uniform(-5, 5);
  const std::vector<int> y{0, 3, 9, 5};
  long double ref = 0;
  for (int b = 0; b < 4; ++b) {
    long double z = 0;
    for (int k = 0; k < 10; ++k) z += std::exp(static_cast<long double>(logits[b * 10 + k]));
    ref += std::log(z) - static_cast<long double>(logits[b * 10 + y[b]]);
  }
  ref /= 4;
  EXPECT_NEAR(cross_entropy(logits, y).loss, static_cast<double>(ref), 1e-10);
}

TEST(CrossEntropy, GradientIsSoftmaxMinusOneHotOverB) {
  Rng rng(2);
  std::vector<double> logits(30);
  for (double& v : logits) v = rng.uniform(-3, 3);
  const std::vector<int> y{2, 0, 9};
  const LossResult r = cross_entropy(logits, y);
  const auto p = softmax(logits, 10);
  for (int b = 0; b < 3; ++b)
    for (int k = 0; k < 10; ++k)
      EXPECT_NEAR(r.grad[b * 10 + k], (p[b * 10 + k] - (k == y[b] ? 1.0 : 0.0)) / 3.0, 1e-15);
}

TEST(CrossEntropy, InvariantsAndErrors) {
  Rng rng(3);
  std::vector<double> logits(50);
  for (double& v : logits) v = rng.uniform(-50, 50);
  const auto p = softmax(logits, 10);
  for (int b = 0; b < 5; ++b) {
    double s = 0;
    for (int k = 0; k < 10; ++k) s += p[b * 10 + k];
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  const std::vector<int> y{1, 2, 3, 4, 5};
  const double base = cross_entropy(logits, y).loss;
  auto shifted = logits;
  for (int k = 0; k < 10; ++k) shifted[20 + k] += 1e3;
  EXPECT_NEAR(cross_entropy(shifted, y).loss, base, 1e-12);
  std::vector<double> rotated(logits.begin() + 10, logits.end());
  rotated.insert(rotated.end(), logits.begin(), logits.begin() + 10);
  EXPECT_NEAR(cross_entropy(rotated, std::vector<int>{2, 3, 4, 5, 1}).loss, base, 1e-12);
  EXPECT_THROW(cross_entropy(logits, std::vector<int>{1, 2, 3, 4, 10}), ValidationError);
  EXPECT_THROW(cross_entropy(logits, std::vector<int>{1, 2}), ValidationError);
}

TEST(CrossEntropy, HugeLogitsStayFinite) {
  std::vector<double> logits(10, 0.0);
  logits[0] = 1e6;
  const LossResult r = cross_entropy(logits, std::vector<int>{3});
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_NEAR(r.loss, 1e6, 1e-6);
}

// backward

TEST(Backward, ZeroLossGradientGivesZeroGradients) {
  const ClassifierModel m = init_model(tiny(), 1);
  ForwardCache cache;
  forward(m, random_batch(2, 32, 1), 2, cache);
  Gradients g = zero_gradients(m);
  for (auto& t : g) t.value.fill(1.0);
  backward(m, cache, std::vector<double>(20, 0.0), g);
  for (const auto& t : g)
    for (double v : t.value.data) EXPECT_EQ(v, 0.0);
}

TEST(Backward, MatchesCentralDifferencesOnShippedArchitecture) {
  ModelDescriptor d;
  d.input_length = 64;
  ClassifierModel m = init_model(d, 4);
  Rng brng(9);
  for (NamedTensor& p : m.params)
    if (p.name.ends_with(".bias"))
      for (double& v : p.value.data) v = brng.uniform(-0.1, 0.1);
  const auto x = random_batch(3, 64, 5);
  const auto y = random_labels(3, 6);
  const Gradients g = gradients(m, x, y);
  Rng pick(10);
  const double h = 1e-4;
  double worst = 0;
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t t = pick.below(m.params.size());
    const std::size_t i = pick.below(m.params[t].value.size());
    ClassifierModel plus = m, minus = m;
    plus.params[t].value.data[i] += h;
    minus.params[t].value.data[i] -= h;
    const double num = (mean_loss(plus, x, y) - mean_loss(minus, x, y)) / (2 * h);
    // Skip coordinates whose step crosses a ReLU kink: the one-sided
    // derivatives then differ by more than the curvature of smooth terms.
    const double fwd = (mean_loss(plus, x, y) - mean_loss(m, x, y)) / h;
    const double bwd = (mean_loss(m, x, y) - mean_loss(minus, x, y)) / h;
    if (std::abs(fwd - bwd) > 1e-3 * std::max(1.0, std::abs(num))) continue;
    const double ana = g[t].value.data[i];
    const double rel = std::abs(ana - num) / std::max({std::abs(ana), std::abs(num), 1e-6});
    worst = std::max(worst, rel);
    ++checked;
  }
  EXPECT_GT(checked, 300);
  EXPECT_LT(worst, 1e-3);
}

TEST(Backward, DuplicatedBatchKeepsMeanGradient) {
  const ClassifierModel m = init_model(tiny(), 2);
  const auto x = random_batch(3, 32, 3);
  const auto y = random_labels(3, 4);
  auto x2 = x;
  x2.insert(x2.end(), x.begin(), x.end());
  auto y2 = y;
  y2.insert(y2.end(), y.begin(), y.end());
  const Gradients a = gradients(m, x, y), b = gradients(m, x2, y2);
  for (std::size_t t = 0; t < a.size(); ++t)
    for (std::size_t i = 0; i < a[t].value.size(); ++i)
      EXPECT_NEAR(a[t].value.data[i], b[t].value.data[i], 1e-10);
}

TEST(Backward, StaleCacheRefused) {
  ClassifierModel m = init_model(tiny(), 2);
  ForwardCache cache;
  const auto logits = forward(m, random_batch(1, 32, 1), 1, cache);
  const LossResult l = cross_entropy(logits, std::vector<int>{3});
  Gradients g = zero_gradients(m);
  OptimizerState opt = OptimizerState::for_model(m, {});
  adamw_step(m, g, opt);
  EXPECT_THROW(backward(m, cache, l.grad, g), ValidationError);
}

// AdamW

TEST(AdamW, ZeroGradientZeroDecayIsIdentity) {
  ClassifierModel m = init_model(tiny(), 1);
  const ClassifierModel before = m;
  AdamWConfig c;
  c.weight_decay = 0.0;
  OptimizerState s = OptimizerState::for_model(m, c);
  for (int i = 0; i < 3; ++i) adamw_step(m, zero_gradients(m), s);
  EXPECT_EQ(m, before);
  EXPECT_EQ(s.step, 3u);
}

TEST(AdamW, FirstStepClosedForm) {
  ClassifierModel m = init_model(tiny(), 1);
  AdamWConfig c;
  c.weight_decay = 0.0;
  c.lr = 1e-3;
  OptimizerState s = OptimizerState::for_model(m, c);
  Gradients g = zero_gradients(m);
  g[0].value.data[0] = 0.37;
  g[0].value.data[1] = -2.5;
  const double p0 = m.params[0].value.data[0], p1 = m.params[0].value.data[1];
  adamw_step(m, g, s);
  EXPECT_NEAR(m.params[0].value.data[0], p0 - c.lr * 0.37 / (0.37 + c.eps), 1e-15);
  EXPECT_NEAR(m.params[0].value.data[1], p1 + c.lr * 2.5 / (2.5 + c.eps), 1e-15);
  EXPECT_NEAR(m.params[0].value.data[0] - p0, -c.lr, 1e-10);
}

TEST(AdamW, DecoupledDecayShrinks) {
  ClassifierModel m = init_model(tiny(), 1);
  const ClassifierModel before = m;
  AdamWConfig c;
  c.lr = 0.1;
  c.weight_decay = 0.01;
  OptimizerState s = OptimizerState::for_model(m, c);
  adamw_step(m, zero_gradients(m), s);
  for (std::size_t t = 0; t < m.params.size(); ++t)
    for (std::size_t i = 0; i < m.params[t].value.size(); ++i)
      EXPECT_DOUBLE_EQ(m.params[t].value.data[i], before.params[t].value.data[i] * (1 - 0.1 * 0.01));
}

TEST(AdamW, ZeroLearningRateIsIdentity) {
  ClassifierModel m = init_model(tiny(), 1);
  const ClassifierModel before = m;
  AdamWConfig c;
  c.lr = 0.0;
  OptimizerState s = OptimizerState::for_model(m, c);
  adamw_step(m, gradients(m, random_batch(2, 32, 1), random_labels(2, 1)), s);
  EXPECT_EQ(m, before);
}

TEST(AdamW, Defaults) {
  const AdamWConfig c;
  EXPECT_EQ(c.lr, 1e-4);
  EXPECT_EQ(c.beta1, 0.9);
  EXPECT_EQ(c.beta2, 0.999);
  EXPECT_EQ(c.eps, 1e-8);
  EXPECT_EQ(c.weight_decay, 0.01);
}

TEST(AdamW, NonFiniteGradientNamed) {
  ClassifierModel m = init_model(tiny(), 1);
  OptimizerState s = OptimizerState::for_model(m, {});
  Gradients g = zero_gradients(m);
  g[3].value.data[0] = std::numeric_limits<double>::infinity();
  try {
    adamw_step(m, g, s);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(m.params[3].name), std::string::npos);
  }
}

TEST(AdamW, TrainingStepsAreBitReproducible) {
  const auto run = [] {
    ClassifierModel m = init_model(tiny(), 7);
    OptimizerState s = OptimizerState::for_model(m, {1e-2, 0.9, 0.999, 1e-8, 0.01});
    for (int step = 0; step < 10; ++step)
      adamw_step(m, gradients(m, random_batch(4, 32, step), random_labels(4, step)), s);
    return m;
  };
  const ClassifierModel a = run(), b = run();
  EXPECT_EQ(a, b);
  EXPECT_NE(a, init_model(tiny(), 7));
}

// scheduler

LrSchedulerState run_scheduler(std::initializer_list<double> accs) {
  LrSchedulerState s;
  s.lr = 1.0;
  for (double a : accs) scheduler_step(s, a);
  return s;
}

TEST(Scheduler, ImprovingKeepsRate) { EXPECT_EQ(run_scheduler({0.5, 0.6, 0.7}).lr, 1.0); }

TEST(Scheduler, PlateauHalvesAfterThirdEpoch) {
  EXPECT_EQ(run_scheduler({0.7, 0.7}).lr, 1.0);
  EXPECT_EQ(run_scheduler({0.7, 0.7, 0.7}).lr, 0.5);
}

TEST(Scheduler, ExactlyOneHalving) {
  const auto s = run_scheduler({0.7, 0.7, 0.71, 0.71, 0.71});
  EXPECT_EQ(s.lr, 0.5);
  EXPECT_EQ(s.reductions, 1);
}

TEST(Scheduler, MinLrSkipsReductionWithoutClamping) {
  LrSchedulerState s;
  s.lr = 1.0;
  s.min_lr = 0.3;
  for (int i = 0; i < 20; ++i) scheduler_step(s, 0.5);
  EXPECT_EQ(s.lr, 0.5);
  EXPECT_EQ(s.reductions, 1);
}

TEST(Scheduler, RateOnlyChangesByFactor) {
  LrSchedulerState s;
  s.lr = 1.0;
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const double before = s.lr;
    scheduler_step(s, rng.uniform());
    EXPECT_TRUE(s.lr == before || s.lr == before * s.factor);
    EXPECT_GT(s.lr, 0.0);
  }
}

// grad_check

TEST(GradCheck, HealthyPasses) {
  const GradCheckReport r = grad_check(gradcheck_descriptor(), 1);
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.max_relative_error, 1e-3);
  EXPECT_LE(gradcheck_descriptor().parameter_count(), 5000u);
  EXPECT_EQ(r.checked + r.skipped_at_kinks, gradcheck_descriptor().parameter_count());
}

TEST(GradCheck, Deterministic) {
  const GradCheckReport a = grad_check(tiny(), 3), b = grad_check(tiny(), 3);
  EXPECT_EQ(a.max_relative_error, b.max_relative_error);
  EXPECT_EQ(a.worst_parameter, b.worst_parameter);
  EXPECT_TRUE(a.passed);
}

TEST(GradCheck, CorruptedBiasNamed) {
  GradCheckOptions o;
  o.corrupt = [](Gradients& g) {
    for (auto& t : g)
      if (t.name == "fc1.bias") t.value.data[2] += 0.5;
  };
  const GradCheckReport r = grad_check(gradcheck_descriptor(), 1, o);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.worst_parameter, "fc1.bias");
  EXPECT_EQ(r.worst_index, 2u);
}

TEST(GradCheck, InfiniteToleranceAlwaysPasses) {
  GradCheckOptions o;
  o.tolerance = std::numeric_limits<double>::infinity();
  o.corrupt = [](Gradients& g) { g[0].value.data[0] += 100.0; };
  EXPECT_TRUE(grad_check(gradcheck_descriptor(), 1, o).passed);
}

TEST(GradCheck, RefusesLargeModels) {
  EXPECT_THROW(grad_check(ModelDescriptor{}, 1), ValidationError);
}

// checkpoints

TEST(Checkpoint, BitExactRoundTrip) {
  testing::TempDir dir;
  ClassifierModel m = init_model(ModelDescriptor{}, 9);
  m.params[0].value.data[0] = 0.1 + 0.2;
  m.params[1].value.data[0] = -0.0;
  m.params[2].value.data[0] = 5e-324;
  const CheckpointMeta meta{11, 12, 42, 0.987};
  write_checkpoint(dir.path() / "m.ckpt", m, meta);
  const Checkpoint c = read_checkpoint(dir.path() / "m.ckpt");
  EXPECT_EQ(c.model, m);
  EXPECT_EQ(c.meta, meta);
  EXPECT_TRUE(std::signbit(c.model.params[1].value.data[0]));
  write_checkpoint(dir.path() / "n.ckpt", c.model, c.meta);
  EXPECT_EQ(testing::slurp(dir.path() / "m.ckpt"), testing::slurp(dir.path() / "n.ckpt"));
}

TEST(Checkpoint, DetectsDamage) {
  testing::TempDir dir;
  write_checkpoint(dir.path() / "m.ckpt", init_model(tiny(), 1), {});
  const std::string bytes = testing::slurp(dir.path() / "m.ckpt");
  {
    std::ofstream out(dir.path() / "short.ckpt", std::ios::binary);
    out << bytes.substr(0, bytes.size() - 8);
  }
  {
    std::ofstream out(dir.path() / "long.ckpt", std::ios::binary);
    out << bytes << "x";
  }
  {
    std::ofstream out(dir.path() / "junk.ckpt", std::ios::binary);
    out << "hello\n";
  }
  EXPECT_THROW(read_checkpoint(dir.path() / "short.ckpt"), IoError);
  EXPECT_THROW(read_checkpoint(dir.path() / "long.ckpt"), IoError);
  EXPECT_THROW(read_checkpoint(dir.path() / "junk.ckpt"), IoError);
  EXPECT_THROW(read_checkpoint(dir.path() / "none.ckpt"), IoError);
}

}  // namespace
}  // namespace tspl
