// core/src/trainer.cpp

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

#include "tspl/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <numeric>
#include <thread>

#include "tspl/error.hpp"
#include "tspl/hash.hpp"
#include "tspl/loss.hpp"
#include "tspl/optim.hpp"

namespace tspl {

namespace {

constexpr std::size_t kEvalChunk = 256;

void gather_rows(std::span<const TimeSeries* const> samples, std::size_t length,
                 std::vector<double>& out) {
  out.resize(samples.size() * length);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i]->values.size() != length)
      throw ValidationError("sample " + std::to_string(samples[i]->id) + " has length " +
                            std::to_string(samples[i]->values.size()) + ", model expects " +
                            std::to_string(length));
    std::copy(samples[i]->values.begin(), samples[i]->values.end(), out.begin() + i * length);
  }
}

int argmax_row(std::span<const double> row) {
  return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
}

double accuracy_of(const ClassifierModel& model, std::span<const TimeSeries* const> samples,
                   std::span<const int> targets) {
  const std::vector<SignalClass> pred = predict(model, samples);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (class_id(pred[i]) == targets[i]) ++hit;
  return samples.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(samples.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("train: epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("train: batch size must be >= 1");
  if (trials < 1) throw ValidationError("train: trials must be >= 1");
  if (!(lr > 0.0)) throw ValidationError("train: learning rate must be positive");
  if (weight_decay < 0.0) throw ValidationError("train: weight decay must be nonnegative");
  if (!(lr_factor > 0.0 && lr_factor <= 1.0))
    throw ValidationError("train: lr factor must lie in (0, 1]");
  if (lr_patience < 1) throw ValidationError("train: lr patience must be >= 1");
  if (!(min_lr >= 0.0)) throw ValidationError("train: min lr must be nonnegative");
  if (jobs < 1) throw ValidationError("train: jobs must be >= 1");
  model.validate();
}

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.lr = 3e-3;
  c.min_lr = 1e-3;
  return c;
}

std::string TrainConfig::hash() const {
  std::string text = "tspl-train-config/1";
  char buf[256];
  std::snprintf(buf, sizeof buf,
                " epochs=%d batch=%zu lr=%.17g min_lr=%.17g wd=%.17g factor=%.17g patience=%d trials=%d "
                "seed=%llu shuffle=%d pseudo_val=%d L=%zu hidden=%zu",
                epochs, batch_size, lr, min_lr, weight_decay, lr_factor, lr_patience, trials,
                static_cast<unsigned long long>(base_seed), shuffle ? 1 : 0,
                validate_on_pseudo ? 1 : 0, model.input_length, model.hidden);
  text += buf;
  for (const ConvStage& s : model.stages) {
    std::snprintf(buf, sizeof buf, " stage=%zu/%zu/%zu", s.channels, s.kernel, s.stride);
    text += buf;
  }
  return sha256_hex(text).substr(0, 16);
}

TrainOutcome train(const Dataset& dataset, const LabelSet& labels, const TrainConfig& config,
                   const TrainSeeds& seeds) {
  config.validate();
  if (dataset.spec.length != config.model.input_length)
    throw ValidationError("train: dataset length " + std::to_string(dataset.spec.length) +
                          " does not match model input length " +
                          std::to_string(config.model.input_length));

  for (const LabelRecord& r : labels.records)
    if (!dataset.find(r.sample_id))
      throw ValidationError("train: label references unknown sample id " +
                            std::to_string(r.sample_id));
  std::map<std::uint64_t, bool> failed;
  for (const LabelFailure& f : labels.failures) failed[f.sample_id] = true;

  std::vector<const TimeSeries*> train_samples;
  std::vector<int> train_targets;
  std::size_t excluded = 0;
  for (const TimeSeries& ts : dataset.samples) {
    if (ts.split != Split::kTrain) continue;
    const LabelRecord* r = labels.find(ts.id);
    if (!r) {
      if (failed.count(ts.id)) {
        ++excluded;
        continue;
      }
      throw ValidationError("train: training sample " + std::to_string(ts.id) +
                            " has no pseudo label");
    }
    train_samples.push_back(&ts);
    train_targets.push_back(class_id(r->label));
  }
  if (train_samples.empty()) throw ValidationError("train: empty training set");

  std::vector<const TimeSeries*> val_samples;
  std::vector<int> val_targets;
  for (const TimeSeries& ts : dataset.samples) {
    if (ts.split != Split::kVal) continue;
    if (config.validate_on_pseudo) {
      const LabelRecord* r = labels.find(ts.id);
      if (!r) continue;
      val_targets.push_back(class_id(r->label));
    } else {
      val_targets.push_back(class_id(ts.gt_class));
    }
    val_samples.push_back(&ts);
  }
  if (val_samples.empty()) throw ValidationError("train: empty validation split");

  const std::size_t length = config.model.input_length;
  std::vector<double> train_rows;
  gather_rows(train_samples, length, train_rows);

  TrainOutcome out;
  out.excluded = excluded;
  ClassifierModel model = init_model(config.model, seeds.init);
  AdamWConfig adam;
  adam.lr = config.lr;
  adam.weight_decay = config.weight_decay;
  OptimizerState opt = OptimizerState::for_model(model, adam);
  LrSchedulerState sched;
  sched.lr = config.lr;
  sched.factor = config.lr_factor;
  sched.min_lr = config.min_lr;
  sched.patience = config.lr_patience;

  Rng shuffle_rng(seeds.shuffle);
  std::vector<std::size_t> order(train_samples.size());
  std::iota(order.begin(), order.end(), 0);
  ForwardCache cache;
  Gradients grads = zero_gradients(model);
  std::vector<double> batch_rows;
  std::vector<int> batch_targets;

  out.model = model;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) shuffle_rng.shuffle(std::span<std::size_t>(order));
    opt.config.lr = sched.lr;
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      batch_rows.resize(n * length);
      batch_targets.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t idx = order[start + k];
        std::copy_n(train_rows.begin() + static_cast<std::ptrdiff_t>(idx * length), length,
                    batch_rows.begin() + static_cast<std::ptrdiff_t>(k * length));
        batch_targets[k] = train_targets[idx];
      }
      auto logits = forward(model, batch_rows, n, cache);
      LossResult loss = cross_entropy(logits, batch_targets, config.model.num_classes);
      backward(model, cache, loss.grad, grads);
      adamw_step(model, grads, opt);
      loss_sum += loss.loss * static_cast<double>(n);
    }

    EpochRecord rec;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.val_accuracy = accuracy_of(model, val_samples, val_targets);
    rec.lr = sched.lr;
    out.history.epochs.push_back(rec);
    if (out.history.best_epoch < 0 || rec.val_accuracy > out.history.best_val_accuracy) {
      out.history.best_epoch = epoch;
      out.history.best_val_accuracy = rec.val_accuracy;
      out.model = model;
    }
    scheduler_step(sched, rec.val_accuracy);
    if (config.verbose)
      std::fprintf(stderr, "  epoch %3d  loss %.5f  val %.4f  lr %.3g\n", epoch + 1,
                   rec.train_loss, rec.val_accuracy, rec.lr);
  }
  out.model.version = 0;
  return out;
}

EvalResult tally(std::span<const SignalClass> truth, std::span<const SignalClass> predicted) {
  if (truth.size() != predicted.size())
    throw ValidationError("tally: truth and prediction counts differ");
  EvalResult r;
  r.total = truth.size();
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++r.confusion[static_cast<std::size_t>(class_id(truth[i]))]
                 [static_cast<std::size_t>(class_id(predicted[i]))];
    if (truth[i] == predicted[i]) ++hit;
  }
  r.accuracy = r.total ? static_cast<double>(hit) / static_cast<double>(r.total) : 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const std::size_t row = std::accumulate(r.confusion[c].begin(), r.confusion[c].end(),
                                            std::size_t{0});
    r.recall[c] = row ? static_cast<double>(r.confusion[c][c]) / static_cast<double>(row) : 0.0;
  }
  return r;
}

std::vector<SignalClass> predict(const ClassifierModel& model,
                                 std::span<const TimeSeries* const> samples) {
  std::vector<SignalClass> out;
  out.reserve(samples.size());
  ForwardCache cache;
  std::vector<double> rows;
  const std::size_t classes = model.descriptor.num_classes;
  for (std::size_t start = 0; start < samples.size(); start += kEvalChunk) {
    const std::size_t n = std::min(kEvalChunk, samples.size() - start);
    gather_rows(samples.subspan(start, n), model.descriptor.input_length, rows);
    auto logits = forward(model, rows, n, cache);
    for (std::size_t b = 0; b < n; ++b)
      out.push_back(static_cast<SignalClass>(argmax_row(logits.subspan(b * classes, classes))));
  }
  return out;
}

EvalResult evaluate(const ClassifierModel& model, const Dataset& dataset, Split split) {
  std::vector<const TimeSeries*> samples;
  std::vector<SignalClass> truth;
  for (const TimeSeries& ts : dataset.samples)
    if (ts.split == split) {
      samples.push_back(&ts);
      truth.push_back(ts.gt_class);
    }
  if (samples.empty())
    throw ValidationError("evaluate: split '" + std::string(split_name(split)) + "' is empty");
  return tally(truth, predict(model, samples));
}

TrialSummary TrialSummary::of(std::vector<double> values) {
  TrialSummary s;
  s.accuracies = std::move(values);
  const auto n = static_cast<double>(s.accuracies.size());
  if (s.accuracies.empty()) return s;
  s.mean = std::accumulate(s.accuracies.begin(), s.accuracies.end(), 0.0) / n;
  if (s.accuracies.size() > 1) {
    double ss = 0.0;
    for (double v : s.accuracies) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

TrialSeeds TrialSeeds::for_trial(std::uint64_t base, int trial) {
  const auto t = static_cast<std::uint64_t>(trial);
  return {derive_seed(base, "split", t), derive_seed(base, "init", t),
          derive_seed(base, "shuffle", t), derive_seed(base, "label", t),
          derive_seed(base, "subsample", t)};
}

TrialsResult run_trials(const Dataset& pool, const LabelProvider& labels,
                        const TrainConfig& config, const TrialOptions& options) {
  config.validate();
  struct Prepared {
    Dataset dataset;
    LabelSet labels;
  };
  std::vector<Prepared> prepared;
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(config.trials));
  for (int t = 0; t < config.trials; ++t) {
    const TrialSeeds seeds = TrialSeeds::for_trial(config.base_seed, t);
    Dataset ds = assign_splits(pool, seeds.split);
    if (options.n_train) {
      Rng rng(seeds.subsample);
      ds = subsample_train(ds, *options.n_train, rng);
    }
    LabelSet ls = labels(ds, t, seeds);
    outcomes[static_cast<std::size_t>(t)].trial = t;
    outcomes[static_cast<std::size_t>(t)].seeds = seeds;
    prepared.push_back({std::move(ds), std::move(ls)});
  }

  auto run_one = [&](std::size_t t) {
    const Prepared& p = prepared[t];
    TrialOutcome& o = outcomes[t];
    if (config.verbose) std::fprintf(stderr, "trial %zu (%s)\n", t + 1, p.labels.teacher.c_str());
    TrainOutcome trained = train(p.dataset, p.labels, config, {o.seeds.init, o.seeds.shuffle});
    o.history = std::move(trained.history);
    o.model = std::move(trained.model);
    o.test = evaluate(o.model, p.dataset, Split::kTest);
    o.train = evaluate(o.model, p.dataset, Split::kTrain);
    o.teacher_train = teacher_quality(p.labels, p.dataset, Split::kTrain);
    o.teacher_test = teacher_quality(p.labels, p.dataset, Split::kTest);
  };

  const std::size_t jobs = std::min<std::size_t>(static_cast<std::size_t>(config.jobs),
                                                 outcomes.size());
  if (jobs <= 1) {
    for (std::size_t t = 0; t < outcomes.size(); ++t) run_one(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(outcomes.size());
    {
      std::vector<std::jthread> workers;
      for (std::size_t w = 0; w < jobs; ++w)
        workers.emplace_back([&] {
          for (std::size_t t = next++; t < outcomes.size(); t = next++) {
            try {
              run_one(t);
            } catch (...) {
              errors[t] = std::current_exception();
            }
          }
        });
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  TrialsResult r;
  r.teacher = prepared.front().labels.teacher;
  std::vector<double> test, trn, tq_train, tq_test;
  for (const TrialOutcome& o : outcomes) {
    test.push_back(o.test.accuracy);
    trn.push_back(o.train.accuracy);
    tq_train.push_back(o.teacher_train.accuracy);
    tq_test.push_back(o.teacher_test.accuracy);
  }
  r.trials = std::move(outcomes);
  r.test = TrialSummary::of(std::move(test));
  r.train = TrialSummary::of(std::move(trn));
  r.teacher_train = TrialSummary::of(std::move(tq_train));
  r.teacher_test = TrialSummary::of(std::move(tq_test));
  return r;
}

TrialsResult run_trials(const Dataset& pool, Teacher& teacher, const TrainConfig& config,
                        const TrialOptions& options) {
  const std::uint64_t fixed_seed = TrialSeeds::for_trial(config.base_seed, 0).label;
  LabelProvider provider = [&](const Dataset& ds, int, const TrialSeeds& seeds) {
    return teacher.label_all(ds.samples, teacher.stochastic() ? seeds.label : fixed_seed);
  };
  return run_trials(pool, provider, config, options);
}

}  // namespace tspl
