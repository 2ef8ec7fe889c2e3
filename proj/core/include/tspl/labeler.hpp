// core/include/tspl/labeler.hpp

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

#ifndef TSPL_LABELER_HPP_
#define TSPL_LABELER_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tspl/rng.hpp"
#include "tspl/signal.hpp"

namespace tspl {

/// A pseudo label for one sample.
struct LabelRecord {
  std::uint64_t sample_id = 0;
  SignalClass label = SignalClass::kConstant;
  std::string teacher;
  /// Position k of the prompt lists class option_permutation[k]. Empty for
  /// teachers that do not use a prompt.
  std::vector<int> option_permutation;
  std::optional<std::string> raw_response;
  std::optional<bool> correct;

  bool operator==(const LabelRecord&) const = default;
};

/// A sample the teacher could not label; it is left out of training.
struct LabelFailure {
  std::uint64_t sample_id = 0;
  std::string reason;
  std::string raw_response;

  bool operator==(const LabelFailure&) const = default;
};

struct LabelSet {
  std::string teacher;
  std::string config_hash;
  std::vector<LabelRecord> records;  // ascending sample id
  std::vector<LabelFailure> failures;

  const LabelRecord* find(std::uint64_t sample_id) const;
  std::size_t total() const { return records.size() + failures.size(); }
};

struct LabelOutcome {
  std::optional<LabelRecord> record;
  std::optional<LabelFailure> failure;
};

/// Interchangeable pseudo-label source.
class Teacher {
 public:
  virtual ~Teacher() = default;
  virtual std::string id() const = 0;
  /// Stable digest of the teacher configuration.
  virtual std::string config_hash() const;
  /// False when the teacher gives the same labels for every seed.
  virtual bool stochastic() const = 0;
  virtual LabelOutcome label(const TimeSeries& ts, Rng& rng) = 0;

  /// Labels every sample with its own stream Rng(derive_seed(seed, "label",
  /// id)), so a sample's label does not depend on which others are labeled.
  virtual LabelSet label_all(std::span<const TimeSeries> samples, std::uint64_t seed);
};

// Individual teachers.

LabelRecord oracle_label(const TimeSeries& ts);

struct NoiseSpec {
  double correct_ratio = 1.0;  // rho

  void validate() const;
};

/// Keeps the true class with probability rho, otherwise picks uniformly among
/// the other nine classes.
LabelRecord uniform_noise_label(const TimeSeries& ts, const NoiseSpec& spec, Rng& rng);

/// Row-stochastic class-conditional label distribution: entry (i, j) is the
/// probability that a class-i sample is labeled j.
struct ConfusionModel {
  std::array<std::array<double, kNumClasses>, kNumClasses> matrix{};

  void validate() const;
  /// Mean of the diagonal, i.e. expected accuracy on a class-balanced set.
  double expected_accuracy() const;
  static ConfusionModel identity();
  /// Approximation of a zero-shot vision-language teacher: mean diagonal
  /// 0.8171, errors concentrated on cubic -> sigmoid and the
  /// concave / convex / gaussian neighbourhood.
  static ConfusionModel default_teacher();
  /// JSON file {"matrix": [[...] x 10] x 10}.
  static ConfusionModel load(const std::filesystem::path& path);
};

LabelRecord confusion_label(const TimeSeries& ts, const ConfusionModel& model, Rng& rng);

/// Feature region a systematic teacher mislabels: cubic functions that are
/// nearly monotone on [0,1] (cubic_wiggle <= max_wiggle) and so read as a
/// single S. The root bounds narrow it further; by default they are open.
struct SystematicRegion {
  double mid_lo = 0.0;
  double mid_hi = 1.0;
  double max_root_spread = 1.0;
  double max_wiggle = 0.1;

  bool contains(const SignalParams& p) const;
};

/// Depth of the cubic's local bump on [0,1] relative to its value range there.
/// 0 for a monotone curve.
double cubic_wiggle(const std::array<double, 3>& roots);

/// Sigmoid for cubics inside the region, the true class otherwise. Pure.
LabelRecord systematic_label(const TimeSeries& ts, const SystematicRegion& region = {});

class OracleTeacher final : public Teacher {
 public:
  std::string id() const override { return "oracle"; }
  bool stochastic() const override { return false; }
  LabelOutcome label(const TimeSeries& ts, Rng& rng) override;
};

class UniformNoiseTeacher final : public Teacher {
 public:
  explicit UniformNoiseTeacher(NoiseSpec spec);
  std::string id() const override;
  bool stochastic() const override { return spec_.correct_ratio < 1.0; }
  LabelOutcome label(const TimeSeries& ts, Rng& rng) override;

 private:
  NoiseSpec spec_;
};

class ConfusionTeacher final : public Teacher {
 public:
  explicit ConfusionTeacher(ConfusionModel model, std::string name = "confusion");
  std::string id() const override { return name_; }
  std::string config_hash() const override;
  bool stochastic() const override { return true; }
  LabelOutcome label(const TimeSeries& ts, Rng& rng) override;

 private:
  ConfusionModel model_;
  std::string name_;
};

class SystematicTeacher final : public Teacher {
 public:
  explicit SystematicTeacher(SystematicRegion region = {}) : region_(region) {}
  std::string id() const override { return "systematic"; }
  bool stochastic() const override { return false; }
  LabelOutcome label(const TimeSeries& ts, Rng& rng) override;

 private:
  SystematicRegion region_;
};

/// Relabels exactly `errors` training samples (chosen uniformly without
/// replacement among `samples`) to a uniformly drawn wrong class; the rest
/// keep the truth. Used as the random-noise control with a fixed error mass.
LabelSet matched_uniform_noise(std::span<const TimeSeries> samples, std::size_t errors,
                               std::span<const std::uint64_t> eligible_ids, std::uint64_t seed);

/// Fraction of labeled samples (restricted to `split`) whose label matches
/// the ground truth. Samples without a label are counted in `excluded`.
using ConfusionCounts = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;

struct TeacherQuality {
  double accuracy = 0.0;
  std::size_t labeled = 0;
  std::size_t correct = 0;
  std::size_t excluded = 0;
  ConfusionCounts confusion{};  // rows: true class, columns: pseudo label
};
TeacherQuality teacher_quality(const LabelSet& labels, const Dataset& dataset, Split split);

// Prompting.

/// Canonical multiple-choice prompt with options listed in permutation order.
std::string build_prompt(std::span<const int> option_permutation);

/// Uniformly random permutation of 0..9.
std::vector<int> random_permutation(Rng& rng);
bool is_permutation_of_classes(std::span<const int> perm);

struct ParseFailure {
  enum class Kind { kNoNumber, kOutOfRange };
  Kind kind = Kind::kNoNumber;
  std::string detail;
};

using AnswerParse = std::variant<SignalClass, ParseFailure>;

/// Takes the first "(k)" with a decimal k and maps position k through the
/// permutation. "(12)" is kOutOfRange; text without a parenthesized number
/// is kNoNumber.
AnswerParse parse_answer(std::string_view raw, std::span<const int> option_permutation);

// Files.

void write_labels(const std::filesystem::path& path, const LabelSet& labels);
LabelSet read_labels(const std::filesystem::path& path);

}  // namespace tspl

#endif  // TSPL_LABELER_HPP_
