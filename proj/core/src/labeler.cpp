// core/src/labeler.cpp

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

#include "tspl/labeler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <regex>

#include <nlohmann/json.hpp>

#include "tspl/error.hpp"
#include "tspl/hash.hpp"

namespace tspl {

using nlohmann::json;

const LabelRecord* LabelSet::find(std::uint64_t sample_id) const {
  auto it = std::lower_bound(records.begin(), records.end(), sample_id,
                             [](const LabelRecord& r, std::uint64_t v) { return r.sample_id < v; });
  if (it != records.end() && it->sample_id == sample_id) return &*it;
  return nullptr;
}

std::string Teacher::config_hash() const { return sha256_hex(id()).substr(0, 16); }

LabelSet Teacher::label_all(std::span<const TimeSeries> samples, std::uint64_t seed) {
  LabelSet out;
  out.teacher = id();
  out.config_hash = config_hash();
  for (const TimeSeries& ts : samples) {
    Rng rng(derive_seed(seed, "label", ts.id));
    LabelOutcome o = label(ts, rng);
    if (o.record) {
      o.record->correct = o.record->label == ts.gt_class;
      out.records.push_back(std::move(*o.record));
    } else if (o.failure) {
      out.failures.push_back(std::move(*o.failure));
    }
  }
  auto by_id = [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; };
  std::sort(out.records.begin(), out.records.end(), by_id);
  std::sort(out.failures.begin(), out.failures.end(), by_id);
  return out;
}

LabelRecord oracle_label(const TimeSeries& ts) {
  LabelRecord r;
  r.sample_id = ts.id;
  r.label = ts.gt_class;
  r.teacher = "oracle";
  r.correct = true;
  return r;
}

void NoiseSpec::validate() const {
  if (!(correct_ratio >= 0.0 && correct_ratio <= 1.0))
    throw ValidationError("noise: correct ratio must lie in [0, 1]");
}

LabelRecord uniform_noise_label(const TimeSeries& ts, const NoiseSpec& spec, Rng& rng) {
  spec.validate();
  LabelRecord r;
  r.sample_id = ts.id;
  r.teacher = "uniform";
  if (rng.uniform() < spec.correct_ratio) {
    r.label = ts.gt_class;
  } else {
    const int k = static_cast<int>(rng.below(kNumClasses - 1));
    const int truth = class_id(ts.gt_class);
    r.label = static_cast<SignalClass>(k < truth ? k : k + 1);
  }
  r.correct = r.label == ts.gt_class;
  return r;
}

void ConfusionModel::validate() const {
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    double sum = 0.0;
    for (double v : matrix[i]) {
      if (!std::isfinite(v) || v < 0.0)
        throw ValidationError("confusion model: row " + std::to_string(i) +
                              " has a negative or non-finite entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ValidationError("confusion model: row " + std::to_string(i) + " sums to " +
                            std::to_string(sum));
  }
}

double ConfusionModel::expected_accuracy() const {
  double d = 0.0;
  for (std::size_t i = 0; i < matrix.size(); ++i) d += matrix[i][i];
  return d / static_cast<double>(matrix.size());
}

ConfusionModel ConfusionModel::identity() {
  ConfusionModel m;
  for (std::size_t i = 0; i < m.matrix.size(); ++i) m.matrix[i][i] = 1.0;
  return m;
}

ConfusionModel ConfusionModel::default_teacher() {
  ConfusionModel m;
  // Columns: const, lin.inc, lin.dec, concave, convex, exp.growth, exp.decay,
  // sigmoid, cubic, gauss.
  m.matrix = {{
      {0.95, 0.02, 0.02, 0.00, 0.00, 0.00, 0.00, 0.01, 0.00, 0.00},
      {0.00, 0.92, 0.00, 0.02, 0.01, 0.03, 0.00, 0.02, 0.00, 0.00},
      {0.00, 0.00, 0.93, 0.01, 0.02, 0.00, 0.04, 0.00, 0.00, 0.00},
      {0.00, 0.03, 0.00, 0.80, 0.03, 0.00, 0.00, 0.00, 0.04, 0.10},
      {0.00, 0.00, 0.00, 0.03, 0.80, 0.07, 0.07, 0.00, 0.03, 0.00},
      {0.00, 0.06, 0.00, 0.00, 0.12, 0.78, 0.00, 0.04, 0.00, 0.00},
      {0.00, 0.00, 0.06, 0.02, 0.12, 0.00, 0.80, 0.00, 0.00, 0.00},
      {0.00, 0.05, 0.00, 0.02, 0.00, 0.04, 0.00, 0.85, 0.04, 0.00},
      {0.00, 0.00, 0.00, 0.07, 0.07, 0.03, 0.00, 0.33, 0.45, 0.05},
      {0.00, 0.00, 0.00, 0.08, 0.00, 0.00, 0.00, 0.00, 0.029, 0.891},
  }};
  return m;
}

ConfusionModel ConfusionModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read confusion model " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("confusion model " + path.string() + ": " + e.what());
  }
  ConfusionModel m;
  const json& rows = j.contains("matrix") ? j["matrix"] : j;
  if (!rows.is_array() || rows.size() != kNumClasses)
    throw ValidationError("confusion model: expected 10 rows");
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (!rows[i].is_array() || rows[i].size() != kNumClasses)
      throw ValidationError("confusion model: row " + std::to_string(i) + " needs 10 entries");
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      if (!rows[i][k].is_number())
        throw ValidationError("confusion model: non-numeric entry in row " + std::to_string(i));
      m.matrix[i][k] = rows[i][k].get<double>();
    }
  }
  m.validate();
  return m;
}

LabelRecord confusion_label(const TimeSeries& ts, const ConfusionModel& model, Rng& rng) {
  const auto& row = model.matrix[static_cast<std::size_t>(class_id(ts.gt_class))];
  const double u = rng.uniform();
  double cum = 0.0;
  int pick = -1;
  for (int j = 0; j < kNumClasses; ++j) {
    cum += row[static_cast<std::size_t>(j)];
    if (u < cum) {
      pick = j;
      break;
    }
  }
  if (pick < 0) {
    // Rounding left u above the final cumulative sum: take the last class
    // with mass.
    for (int j = kNumClasses - 1; j >= 0; --j)
      if (row[static_cast<std::size_t>(j)] > 0.0) {
        pick = j;
        break;
      }
  }
  LabelRecord r;
  r.sample_id = ts.id;
  r.label = static_cast<SignalClass>(pick);
  r.teacher = "confusion";
  r.correct = r.label == ts.gt_class;
  return r;
}

double cubic_wiggle(const std::array<double, 3>& r) {
  auto f = [&](double t) { return (t - r[0]) * (t - r[1]) * (t - r[2]); };
  const double s1 = r[0] + r[1] + r[2];
  const double s2 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
  const double disc = s1 * s1 - 3.0 * s2;
  double lo = std::min(f(0.0), f(1.0));
  double hi = std::max(f(0.0), f(1.0));
  if (disc <= 0.0) return 0.0;
  const double a = (s1 - std::sqrt(disc)) / 3.0;
  const double b = (s1 + std::sqrt(disc)) / 3.0;
  double bump = 0.0;
  if (a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) bump = f(a) - f(b);
  for (double t : {a, b})
    if (t > 0.0 && t < 1.0) {
      lo = std::min(lo, f(t));
      hi = std::max(hi, f(t));
    }
  return hi > lo ? bump / (hi - lo) : 0.0;
}

bool SystematicRegion::contains(const SignalParams& p) const {
  if (p.cls != SignalClass::kCubicFunction) return false;
  const auto& r = p.roots;
  return r[1] >= mid_lo && r[1] <= mid_hi && r[2] - r[0] <= max_root_spread &&
         cubic_wiggle(r) <= max_wiggle;
}

LabelRecord systematic_label(const TimeSeries& ts, const SystematicRegion& region) {
  if (ts.params.cls != ts.gt_class)
    throw ValidationError("systematic_label: sample " + std::to_string(ts.id) +
                          " lacks generator parameters for its class");
  LabelRecord r;
  r.sample_id = ts.id;
  r.teacher = "systematic";
  r.label = region.contains(ts.params) ? SignalClass::kSigmoid : ts.gt_class;
  r.correct = r.label == ts.gt_class;
  return r;
}

LabelOutcome OracleTeacher::label(const TimeSeries& ts, Rng&) { return {oracle_label(ts), {}}; }

UniformNoiseTeacher::UniformNoiseTeacher(NoiseSpec spec) : spec_(spec) { spec_.validate(); }

std::string UniformNoiseTeacher::id() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "uniform:%.6g", spec_.correct_ratio);
  return buf;
}

LabelOutcome UniformNoiseTeacher::label(const TimeSeries& ts, Rng& rng) {
  LabelRecord r = uniform_noise_label(ts, spec_, rng);
  r.teacher = id();
  return {std::move(r), {}};
}

ConfusionTeacher::ConfusionTeacher(ConfusionModel model, std::string name)
    : model_(model), name_(std::move(name)) {
  model_.validate();
}

std::string ConfusionTeacher::config_hash() const {
  std::string text = name_;
  char buf[32];
  for (const auto& row : model_.matrix)
    for (double v : row) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      text += buf;
    }
  return sha256_hex(text).substr(0, 16);
}

LabelOutcome ConfusionTeacher::label(const TimeSeries& ts, Rng& rng) {
  LabelRecord r = confusion_label(ts, model_, rng);
  r.teacher = name_;
  return {std::move(r), {}};
}

LabelOutcome SystematicTeacher::label(const TimeSeries& ts, Rng&) {
  return {systematic_label(ts, region_), {}};
}

LabelSet matched_uniform_noise(std::span<const TimeSeries> samples, std::size_t errors,
                               std::span<const std::uint64_t> eligible_ids, std::uint64_t seed) {
  if (errors > eligible_ids.size())
    throw ValidationError("matched_uniform_noise: more errors than eligible samples");
  std::vector<std::uint64_t> pool(eligible_ids.begin(), eligible_ids.end());
  Rng rng(derive_seed(seed, "matched-noise", 0));
  rng.shuffle(std::span<std::uint64_t>(pool));
  std::map<std::uint64_t, int> flips;
  for (std::size_t k = 0; k < errors; ++k)
    flips[pool[k]] = static_cast<int>(rng.below(kNumClasses - 1));

  LabelSet out;
  out.teacher = "matched-uniform:" + std::to_string(errors);
  out.config_hash = sha256_hex(out.teacher).substr(0, 16);
  for (const TimeSeries& ts : samples) {
    LabelRecord r = oracle_label(ts);
    r.teacher = out.teacher;
    if (auto it = flips.find(ts.id); it != flips.end()) {
      const int truth = class_id(ts.gt_class);
      r.label = static_cast<SignalClass>(it->second < truth ? it->second : it->second + 1);
      r.correct = false;
    }
    out.records.push_back(std::move(r));
  }
  std::sort(out.records.begin(), out.records.end(),
            [](const LabelRecord& a, const LabelRecord& b) { return a.sample_id < b.sample_id; });
  return out;
}

TeacherQuality teacher_quality(const LabelSet& labels, const Dataset& dataset, Split split) {
  TeacherQuality q;
  for (const TimeSeries& ts : dataset.samples) {
    if (ts.split != split) continue;
    const LabelRecord* r = labels.find(ts.id);
    if (!r) {
      ++q.excluded;
      continue;
    }
    ++q.labeled;
    ++q.confusion[static_cast<std::size_t>(class_id(ts.gt_class))][static_cast<std::size_t>(class_id(r->label))];
    if (r->label == ts.gt_class) ++q.correct;
  }
  q.accuracy = q.labeled ? static_cast<double>(q.correct) / static_cast<double>(q.labeled) : 0.0;
  return q;
}

std::string build_prompt(std::span<const int> option_permutation) {
  if (!is_permutation_of_classes(option_permutation))
    throw ValidationError("build_prompt: option order is not a permutation of 0..9");
  std::string prompt =
      "Refer to the time series signal in the image. Please answer the following question. "
      "Your answer must be in the format \"(number)\", with the number enclosed in "
      "parentheses. No other text is necessary. Which pattern does this time series "
      "represent?";
  for (std::size_t k = 0; k < option_permutation.size(); ++k) {
    prompt += " (" + std::to_string(k) + ") ";
    prompt += class_name(static_cast<SignalClass>(option_permutation[k]));
  }
  return prompt;
}

std::vector<int> random_permutation(Rng& rng) {
  std::vector<int> perm(kNumClasses);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(std::span<int>(perm));
  return perm;
}

bool is_permutation_of_classes(std::span<const int> perm) {
  if (perm.size() != kNumClasses) return false;
  std::array<bool, kNumClasses> seen{};
  for (int v : perm) {
    if (v < 0 || v >= kNumClasses || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = true;
  }
  return true;
}

AnswerParse parse_answer(std::string_view raw, std::span<const int> option_permutation) {
  if (!is_permutation_of_classes(option_permutation))
    throw ValidationError("parse_answer: option order is not a permutation of 0..9");
  static const std::regex kPattern(R"(\(\s*(\d+)\s*\))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(raw.begin(), raw.end(), m, kPattern))
    return ParseFailure{ParseFailure::Kind::kNoNumber, "no parenthesized number in response"};
  const std::string digits = m[1].str();
  if (digits.size() > 2 || std::stoi(digits) >= kNumClasses)
    return ParseFailure{ParseFailure::Kind::kOutOfRange, "option (" + digits + ") out of range"};
  const int k = std::stoi(digits);
  return static_cast<SignalClass>(option_permutation[static_cast<std::size_t>(k)]);
}

namespace {

constexpr int kLabelsVersion = 1;

json record_to_json(const LabelRecord& r) {
  json j = {{"status", "labeled"},
            {"sample_id", r.sample_id},
            {"label", class_id(r.label)},
            {"label_name", std::string(class_name(r.label))},
            {"teacher", r.teacher},
            {"option_permutation", r.option_permutation}};
  if (r.raw_response) j["raw_response"] = *r.raw_response;
  if (r.correct) j["correct"] = *r.correct;
  return j;
}

}  // namespace

void write_labels(const std::filesystem::path& path, const LabelSet& labels) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  json header = {{"format", "tspl-labels"},
                 {"version", kLabelsVersion},
                 {"teacher", labels.teacher},
                 {"config_hash", labels.config_hash},
                 {"counts", {{"total", labels.total()}, {"failed", labels.failures.size()}}}};
  out << header.dump() << '\n';
  std::size_t i = 0, k = 0;
  while (i < labels.records.size() || k < labels.failures.size()) {
    const bool take_record =
        k >= labels.failures.size() ||
        (i < labels.records.size() && labels.records[i].sample_id < labels.failures[k].sample_id);
    if (take_record) {
      out << record_to_json(labels.records[i++]).dump() << '\n';
    } else {
      const LabelFailure& f = labels.failures[k++];
      out << json{{"status", "failed"},
                  {"sample_id", f.sample_id},
                  {"reason", f.reason},
                  {"raw_response", f.raw_response}}
                 .dump()
          << '\n';
    }
  }
  if (!out) throw IoError("error writing " + path.string());
}

LabelSet read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read labels " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("labels file " + path.string() + " is empty");
  LabelSet out;
  try {
    json header = json::parse(line);
    if (header.value("format", "") != "tspl-labels")
      throw IoError(path.string() + " is not a labels file");
    if (header.value("version", 0) != kLabelsVersion)
      throw IoError(path.string() + ": unsupported labels version");
    out.teacher = header.at("teacher").get<std::string>();
    out.config_hash = header.at("config_hash").get<std::string>();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line);
      if (j.at("status") == "failed") {
        out.failures.push_back({j.at("sample_id").get<std::uint64_t>(),
                                j.at("reason").get<std::string>(),
                                j.at("raw_response").get<std::string>()});
        continue;
      }
      LabelRecord r;
      r.sample_id = j.at("sample_id").get<std::uint64_t>();
      r.label = class_from_id(j.at("label").get<int>());
      r.teacher = j.at("teacher").get<std::string>();
      r.option_permutation = j.at("option_permutation").get<std::vector<int>>();
      if (!r.option_permutation.empty() && !is_permutation_of_classes(r.option_permutation))
        throw ValidationError("labels: invalid option permutation for sample " +
                              std::to_string(r.sample_id));
      if (j.contains("raw_response")) r.raw_response = j["raw_response"].get<std::string>();
      if (j.contains("correct")) r.correct = j["correct"].get<bool>();
      out.records.push_back(std::move(r));
    }
    const auto& counts = header.at("counts");
    if (counts.at("total").get<std::size_t>() != out.total() ||
        counts.at("failed").get<std::size_t>() != out.failures.size())
      throw IoError(path.string() + ": record counts do not match header");
  } catch (const json::exception& e) {
    throw IoError("labels file " + path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace tspl
