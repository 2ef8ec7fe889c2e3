// core/include/tspl/trainer.hpp

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

#ifndef TSPL_TRAINER_HPP_
#define TSPL_TRAINER_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tspl/labeler.hpp"
#include "tspl/model.hpp"
#include "tspl/signal.hpp"

namespace tspl {

struct TrainConfig {
  int epochs = 100;
  std::size_t batch_size = 32;
  double lr = 1e-4;
  double weight_decay = 0.01;
  double lr_factor = 0.5;
  int lr_patience = 2;
  /// Plateau reductions stop at this rate (0: never stop).
  double min_lr = 0.0;
  int trials = 5;
  std::uint64_t base_seed = 1;
  bool shuffle = true;
  /// Score validation against pseudo labels instead of ground truth.
  bool validate_on_pseudo = false;
  ModelDescriptor model;
  /// Trials trained concurrently by run_trials.
  int jobs = 1;
  /// Progress lines on stderr.
  bool verbose = false;

  void validate() const;
  /// Digest of every field that influences results (not jobs/verbose).
  std::string hash() const;

  /// Settings used by the experiment drivers: lr 3e-3, min_lr 1e-3, the
  /// rest default.
  static TrainConfig desk();
};

struct EpochRecord {
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double lr = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;  // 0-based, first epoch reaching the maximum
  double best_val_accuracy = 0.0;

  bool operator==(const TrainHistory&) const = default;
};

struct TrainSeeds {
  std::uint64_t init = 0;
  std::uint64_t shuffle = 0;
};

struct TrainOutcome {
  ClassifierModel model;  // parameters from the best validation epoch
  TrainHistory history;
  std::size_t excluded = 0;  // training samples without a pseudo label
};

/// Mini-batch AdamW on the pseudo labels of the train split, with the
/// learning rate reduced on validation plateaus. Every epoch visits each
/// labeled training sample once (last partial batch kept).
TrainOutcome train(const Dataset& dataset, const LabelSet& labels, const TrainConfig& config,
                   const TrainSeeds& seeds);

struct EvalResult {
  double accuracy = 0.0;
  std::size_t total = 0;
  ConfusionCounts confusion{};  // rows: true class, columns: predicted
  std::array<double, kNumClasses> recall{};

  bool operator==(const EvalResult&) const = default;
};

/// Builds an EvalResult from (truth, prediction) pairs.
EvalResult tally(std::span<const SignalClass> truth, std::span<const SignalClass> predicted);

std::vector<SignalClass> predict(const ClassifierModel& model,
                                 std::span<const TimeSeries* const> samples);

/// Accuracy of `model` against ground truth on one split. Throws on an empty
/// split.
EvalResult evaluate(const ClassifierModel& model, const Dataset& dataset, Split split);

struct TrialSummary {
  std::vector<double> accuracies;
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1); 0 for a single trial

  static TrialSummary of(std::vector<double> values);
  bool operator==(const TrialSummary&) const = default;
};

struct TrialSeeds {
  std::uint64_t split = 0;
  std::uint64_t init = 0;
  std::uint64_t shuffle = 0;
  std::uint64_t label = 0;
  std::uint64_t subsample = 0;

  /// derive_seed(base, purpose, trial) for each purpose.
  static TrialSeeds for_trial(std::uint64_t base, int trial);
};

struct TrialOutcome {
  int trial = 0;
  TrialSeeds seeds;
  TrainHistory history;
  EvalResult test;
  EvalResult train;
  TeacherQuality teacher_train;
  TeacherQuality teacher_test;
  ClassifierModel model;
};

struct TrialsResult {
  std::string teacher;
  std::vector<TrialOutcome> trials;
  TrialSummary test;
  TrialSummary train;
  TrialSummary teacher_train;
  TrialSummary teacher_test;
};

/// Produces the pseudo labels for one trial's dataset.
using LabelProvider = std::function<LabelSet(const Dataset& trial_dataset, int trial,
                                             const TrialSeeds& seeds)>;

struct TrialOptions {
  /// Class-balanced training subset size (sample-size sweeps).
  std::optional<std::size_t> n_train;
};

/// Trial t re-splits `pool` with seeds.split, optionally subsamples the
/// train split, labels it and trains from seeds.init. Trials may run
/// concurrently (config.jobs); results are in trial order.
TrialsResult run_trials(const Dataset& pool, const LabelProvider& labels,
                        const TrainConfig& config, const TrialOptions& options = {});

/// Labels are regenerated per trial when the teacher is stochastic.
TrialsResult run_trials(const Dataset& pool, Teacher& teacher, const TrainConfig& config,
                        const TrialOptions& options = {});

}  // namespace tspl

#endif  // TSPL_TRAINER_HPP_
