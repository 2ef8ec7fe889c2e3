// core/include/tspl/experiments.hpp

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

#ifndef TSPL_EXPERIMENTS_HPP_
#define TSPL_EXPERIMENTS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "tspl/labeler.hpp"
#include "tspl/trainer.hpp"

namespace tspl {

/// Shares finished multi-trial runs between experiments in one process, so
/// e.g. the clean-label baseline is trained once. Keyed on the pool, the
/// training config, the label source and the training subset size.
class RunCache {
 public:
  TrialsResult run(const Dataset& pool, Teacher& teacher, const TrainConfig& config,
                   const TrialOptions& options = {});
  std::size_t size() const;
  std::size_t hits() const { return hits_; }

 private:
  mutable std::mutex mu_;
  std::map<std::string, TrialsResult> runs_;
  std::size_t hits_ = 0;
};

/// Runs through `cache` when given, directly otherwise.
TrialsResult run_or_reuse(RunCache* cache, const Dataset& pool, Teacher& teacher,
                          const TrainConfig& config, const TrialOptions& options = {});

struct Table1 {
  double chance = 0.1;
  std::string teacher;
  TrialsResult pseudo;  // student trained on the teacher's labels
  TrialsResult truth;   // student trained on ground truth
};

/// Both students see identical splits and initializations per trial.
Table1 compare_table1(const Dataset& pool, Teacher& teacher, const TrainConfig& config,
                      RunCache* cache = nullptr);

/// Plain-text table: chance, teacher, student on pseudo labels, student on
/// ground truth; train and test columns as "mean (std)" in percent.
std::string format_table1(const Table1& table);

struct SweepResult {
  std::string variable;  // "correct_ratio" or "n_train"
  std::vector<double> grid;
  std::vector<TrialSummary> summaries;
  std::vector<TrialsResult> runs;

  /// Per-trial raw test accuracies of grid point i.
  const std::vector<double>& raw(std::size_t i) const { return summaries.at(i).accuracies; }
};

/// Uniform-noise teacher at each correct-label ratio. Ratio 1 uses the oracle.
SweepResult noise_ratio_sweep(const Dataset& pool, const std::vector<double>& ratios,
                              const TrainConfig& config, RunCache* cache = nullptr);

inline const std::vector<std::size_t> kDefaultSizeGrid = {90, 300, 900, 3000, 9000};

/// Oracle labels on a class-balanced training subset of each size.
SweepResult sample_size_sweep(const Dataset& pool, const std::vector<std::size_t>& sizes,
                              const TrainConfig& config, RunCache* cache = nullptr);

/// Number of adjacent decreases in the mean, and whether each of them is no
/// larger than the larger of the two standard deviations.
struct MonotonicityCheck {
  std::size_t inversions = 0;
  bool inversions_within_std = true;
  bool holds(std::size_t allowed = 1) const { return inversions <= allowed && inversions_within_std; }
};
MonotonicityCheck check_monotone(const SweepResult& sweep);

struct EmbeddingProjection {
  std::vector<std::uint64_t> ids;
  std::vector<std::array<double, 2>> coords;
  std::vector<SignalClass> labels;  // pseudo or predicted, as supplied
  std::vector<SignalClass> gt;
  std::array<double, 2> variance{};  // along PC1 and PC2
};

/// Hidden-layer embeddings, centered and projected on the top two principal
/// components (Eigen's self-adjoint solver; each component's largest
/// magnitude loading is made positive). Throws ValidationError for fewer
/// than 3 samples or when labels and samples differ in length.
EmbeddingProjection embed_and_project(const ClassifierModel& model,
                                      std::span<const TimeSeries* const> samples,
                                      std::span<const SignalClass> labels);

/// `count` cubic signals inside `region`, drawn from Rng(seed) and
/// normalized like the dataset. Ids start at `first_id`.
std::vector<TimeSeries> region_probe_set(const SystematicRegion& region, std::size_t count,
                                         std::size_t length, std::uint64_t seed,
                                         std::uint64_t first_id);

struct InheritanceOptions {
  SystematicRegion region;
  std::size_t probe_count = 300;
  /// Select each arm's epoch against its own teacher's validation labels,
  /// as a pipeline without ground truth would.
  bool validate_on_pseudo = true;
};

struct InheritanceReport {
  std::size_t treatment_errors = 0;  // train labels the systematic teacher got wrong
  std::size_t control_errors = 0;    // same number, spread uniformly
  std::size_t region_train = 0;
  std::size_t probe_count = 0;
  std::size_t region_test = 0;

  /// Held-out region cubics the treatment student calls Sigmoid.
  double inheritance_rate = 0.0;
  /// Held-out region cubics the control student gets wrong.
  double control_error_rate = 0.0;
  /// The same two rates on the region cubics of the test split.
  double test_inheritance_rate = 0.0;
  double test_control_error_rate = 0.0;

  double treatment_test_accuracy = 0.0;
  double control_test_accuracy = 0.0;
  /// Region cubics in the train split carrying a Sigmoid pseudo label.
  double region_label_purity = 0.0;

  EmbeddingProjection projection;  // treatment model, train split, pseudo labels
  std::vector<TimeSeries> misclassified;  // probe cubics the treatment student calls Sigmoid
  ClassifierModel treatment_model;
  ClassifierModel control_model;
};

/// One student per arm, trained on trial 0's split and seeds. The control
/// arm flips the same number of training labels uniformly at random; its
/// validation labels are correct.
InheritanceReport inheritance_study(const Dataset& pool, const TrainConfig& config,
                                    const InheritanceOptions& options = {});

// Result files (results/*.json) and the report built from them.

void write_trials_result(const std::filesystem::path& path, const TrialsResult& result,
                         const Dataset& pool, const TrainConfig& config);
void write_table1(const std::filesystem::path& path, const Table1& table, const Dataset& pool,
                  const TrainConfig& config);
void write_sweep(const std::filesystem::path& path, const SweepResult& sweep, const Dataset& pool,
                 const TrainConfig& config);
void write_inheritance(const std::filesystem::path& path, const InheritanceReport& report,
                       const Dataset& pool, const TrainConfig& config,
                       const InheritanceOptions& options);

/// Files report() looks for under results/.
std::vector<std::string> expected_result_files();

/// Reads results/ under run_dir and writes report/: summary.txt, one
/// sweep_<name>.csv per sweep, confusion_<name>.csv per result, projection
/// and misclassified-signal CSVs for the inheritance study. Returns the
/// written paths relative to run_dir. Throws IoError naming the expected
/// files when none is present.
std::vector<std::string> report(const std::filesystem::path& run_dir);

/// Rows "value,trial,accuracy,std": one per trial (std empty) and one
/// summary row per grid value with trial "mean".
std::string sweep_csv(const SweepResult& sweep);

std::string confusion_csv(const ConfusionCounts& counts);

}  // namespace tspl

#endif  // TSPL_EXPERIMENTS_HPP_
