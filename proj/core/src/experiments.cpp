// core/src/experiments.cpp

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

#include "tspl/experiments.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "json_fields.hpp"
#include "tspl/dataset_io.hpp"
#include "tspl/error.hpp"
#include "tspl/hash.hpp"

namespace tspl {

using json = nlohmann::json;

// Run cache.

namespace {

std::string run_key(const Dataset& pool, const Teacher& teacher, const TrainConfig& config,
                    const TrialOptions& options) {
  std::string key = pool.spec.hash() + "|" + config.hash() + "|" + teacher.id() + "|" +
                    teacher.config_hash() + "|" + (teacher.stochastic() ? "s" : "d") + "|";
  key += options.n_train ? std::to_string(*options.n_train) : "all";
  return key;
}

}  // namespace

TrialsResult RunCache::run(const Dataset& pool, Teacher& teacher, const TrainConfig& config,
                           const TrialOptions& options) {
  const std::string key = run_key(pool, teacher, config, options);
  {
    std::lock_guard lock(mu_);
    if (auto it = runs_.find(key); it != runs_.end()) {
      ++hits_;
      return it->second;
    }
  }
  TrialsResult r = run_trials(pool, teacher, config, options);
  std::lock_guard lock(mu_);
  runs_.emplace(key, r);
  return r;
}

std::size_t RunCache::size() const {
  std::lock_guard lock(mu_);
  return runs_.size();
}

TrialsResult run_or_reuse(RunCache* cache, const Dataset& pool, Teacher& teacher,
                          const TrainConfig& config, const TrialOptions& options) {
  return cache ? cache->run(pool, teacher, config, options)
               : run_trials(pool, teacher, config, options);
}

// Table 1.

Table1 compare_table1(const Dataset& pool, Teacher& teacher, const TrainConfig& config,
                      RunCache* cache) {
  Table1 t;
  t.teacher = teacher.id();
  t.pseudo = run_or_reuse(cache, pool, teacher, config);
  OracleTeacher oracle;
  t.truth = run_or_reuse(cache, pool, oracle, config);
  return t;
}

namespace {

std::string pct(const TrialSummary& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%6.2f (%.2f)", 100.0 * s.mean, 100.0 * s.std);
  return buf;
}

std::string table1_text(double chance, const std::string& teacher, const TrialSummary& teacher_train,
                        const TrialSummary& teacher_test, const TrialSummary& pseudo_train,
                        const TrialSummary& pseudo_test, const TrialSummary& truth_train,
                        const TrialSummary& truth_test) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-34s %-16s %-16s\n", "Method", "Train", "Test");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-34s %6.2f           %6.2f\n", "Random (chance)", 100.0 * chance,
                100.0 * chance);
  out += buf;
  const auto row = [&](const std::string& name, const TrialSummary& a, const TrialSummary& b) {
    std::snprintf(buf, sizeof buf, "%-34s %-16s %-16s\n", name.c_str(), pct(a).c_str(), pct(b).c_str());
    out += buf;
  };
  row("Teacher (" + teacher + ")", teacher_train, teacher_test);
  row("Student on pseudo labels", pseudo_train, pseudo_test);
  row("Student on ground truth", truth_train, truth_test);
  return out;
}

}  // namespace

std::string format_table1(const Table1& t) {
  return table1_text(t.chance, t.teacher, t.pseudo.teacher_train, t.pseudo.teacher_test, t.pseudo.train,
                     t.pseudo.test, t.truth.train, t.truth.test);
}

// Sweeps.

SweepResult noise_ratio_sweep(const Dataset& pool, const std::vector<double>& ratios,
                              const TrainConfig& config, RunCache* cache) {
  if (ratios.empty()) throw ValidationError("noise sweep: no ratios given");
  SweepResult s;
  s.variable = "correct_ratio";
  for (double rho : ratios) {
    NoiseSpec spec{rho};
    spec.validate();
    if (config.verbose) std::fprintf(stderr, "noise sweep: rho=%g\n", rho);
    TrialsResult r;
    if (rho == 1.0) {
      OracleTeacher oracle;
      r = run_or_reuse(cache, pool, oracle, config);
    } else {
      UniformNoiseTeacher teacher(spec);
      r = run_or_reuse(cache, pool, teacher, config);
    }
    s.grid.push_back(rho);
    s.summaries.push_back(r.test);
    s.runs.push_back(std::move(r));
  }
  return s;
}

SweepResult sample_size_sweep(const Dataset& pool, const std::vector<std::size_t>& sizes,
                              const TrainConfig& config, RunCache* cache) {
  if (sizes.empty()) throw ValidationError("size sweep: no sizes given");
  const std::size_t full = pool.spec.per_class_counts()[0] * kNumClasses;
  for (std::size_t n : sizes) {
    if (n == 0 || n % kNumClasses != 0)
      throw ValidationError("size sweep: size " + std::to_string(n) + " is not a positive multiple of 10");
    if (n > full)
      throw ValidationError("size sweep: size " + std::to_string(n) + " exceeds the " +
                            std::to_string(full) + "-sample train split");
  }
  SweepResult s;
  s.variable = "n_train";
  OracleTeacher oracle;
  for (std::size_t n : sizes) {
    if (config.verbose) std::fprintf(stderr, "size sweep: n_train=%zu\n", n);
    TrialOptions opts;
    if (n < full) opts.n_train = n;
    TrialsResult r = run_or_reuse(cache, pool, oracle, config, opts);
    s.grid.push_back(static_cast<double>(n));
    s.summaries.push_back(r.test);
    s.runs.push_back(std::move(r));
  }
  return s;
}

MonotonicityCheck check_monotone(const SweepResult& sweep) {
  MonotonicityCheck c;
  for (std::size_t i = 1; i < sweep.summaries.size(); ++i) {
    const TrialSummary& a = sweep.summaries[i - 1];
    const TrialSummary& b = sweep.summaries[i];
    if (b.mean < a.mean) {
      ++c.inversions;
      if (a.mean - b.mean > std::max(a.std, b.std)) c.inversions_within_std = false;
    }
  }
  return c;
}

// Projection.

EmbeddingProjection embed_and_project(const ClassifierModel& model,
                                      std::span<const TimeSeries* const> samples,
                                      std::span<const SignalClass> labels) {
  if (samples.size() < 3) throw ValidationError("embed_and_project: need at least 3 samples");
  if (labels.size() != samples.size())
    throw ValidationError("embed_and_project: labels and samples differ in length");
  const std::size_t n = samples.size();
  const std::size_t L = model.descriptor.input_length;
  const std::size_t H = model.descriptor.hidden;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(H));
  ForwardCache cache;
  constexpr std::size_t kChunk = 256;
  std::vector<double> batch;
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t b = std::min(kChunk, n - start);
    batch.assign(b * L, 0.0);
    for (std::size_t i = 0; i < b; ++i) {
      const TimeSeries& ts = *samples[start + i];
      if (ts.values.size() != L)
        throw ValidationError("embed_and_project: sample " + std::to_string(ts.id) +
                              " does not match the model input length");
      std::copy(ts.values.begin(), ts.values.end(), batch.begin() + static_cast<std::ptrdiff_t>(i * L));
    }
    forward(model, batch, b, cache);
    const auto emb = embeddings(cache);
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t h = 0; h < H; ++h)
        X(static_cast<Eigen::Index>(start + i), static_cast<Eigen::Index>(h)) = emb[i * H + h];
  }
  const Eigen::RowVectorXd mean = X.colwise().mean();
  X.rowwise() -= mean;
  const Eigen::MatrixXd cov = (X.transpose() * X) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw ValidationError("embed_and_project: eigen solver failed");

  EmbeddingProjection p;
  Eigen::MatrixXd W(static_cast<Eigen::Index>(H), 2);
  for (int k = 0; k < 2; ++k) {
    const Eigen::Index col = static_cast<Eigen::Index>(H) - 1 - k;
    Eigen::VectorXd v = col >= 0 ? Eigen::VectorXd(solver.eigenvectors().col(col))
                                 : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(H));
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    W.col(k) = v;
    p.variance[static_cast<std::size_t>(k)] = col >= 0 ? std::max(0.0, solver.eigenvalues()(col)) : 0.0;
  }
  const Eigen::MatrixXd Y = X * W;
  for (std::size_t i = 0; i < n; ++i) {
    p.ids.push_back(samples[i]->id);
    p.coords.push_back({Y(static_cast<Eigen::Index>(i), 0), Y(static_cast<Eigen::Index>(i), 1)});
    p.labels.push_back(labels[i]);
    p.gt.push_back(samples[i]->gt_class);
  }
  return p;
}

// Inheritance.

std::vector<TimeSeries> region_probe_set(const SystematicRegion& region, std::size_t count,
                                         std::size_t length, std::uint64_t seed,
                                         std::uint64_t first_id) {
  std::vector<TimeSeries> out;
  Rng rng(seed);
  constexpr std::size_t kMaxDraws = 1000000;
  std::size_t draws = 0;
  while (out.size() < count) {
    if (++draws > kMaxDraws)
      throw ValidationError("region_probe_set: the region admits almost no cubic signals");
    const SignalParams p = sample_params(SignalClass::kCubicFunction, rng);
    if (!region.contains(p)) continue;
    TimeSeries ts = generate(p, length, rng);
    ts.id = first_id + out.size();
    normalize_minmax(ts.values);
    for (double& v : ts.values) v = quantize9(v);
    ts.split = Split::kTest;
    out.push_back(std::move(ts));
  }
  return out;
}

InheritanceReport inheritance_study(const Dataset& pool, const TrainConfig& base_config,
                                    const InheritanceOptions& options) {
  TrainConfig config = base_config;
  config.validate_on_pseudo = options.validate_on_pseudo;
  config.validate();
  const TrialSeeds seeds = TrialSeeds::for_trial(config.base_seed, 0);
  const Dataset ds = assign_splits(pool, seeds.split);
  InheritanceReport rep;

  SystematicTeacher systematic(options.region);
  const LabelSet treatment = systematic.label_all(ds.samples, seeds.label);
  std::vector<std::uint64_t> train_ids;
  for (const TimeSeries& ts : ds.samples) {
    if (ts.split != Split::kTrain) continue;
    train_ids.push_back(ts.id);
    if (treatment.find(ts.id)->label != ts.gt_class) ++rep.treatment_errors;
    if (options.region.contains(ts.params)) ++rep.region_train;
  }
  const LabelSet control = matched_uniform_noise(ds.samples, rep.treatment_errors, train_ids, seeds.label);
  for (std::uint64_t id : train_ids)
    if (control.find(id)->label != ds.find(id)->gt_class) ++rep.control_errors;
  if (rep.control_errors != rep.treatment_errors)
    throw ValidationError("inheritance: control arm error mass differs from the treatment arm");

  const TrainSeeds ts_seeds{seeds.init, seeds.shuffle};
  TrainOutcome treated, controlled;
  if (config.jobs > 1) {
    std::exception_ptr err;
    std::jthread other([&] {
      try {
        controlled = train(ds, control, config, ts_seeds);
      } catch (...) {
        err = std::current_exception();
      }
    });
    treated = train(ds, treatment, config, ts_seeds);
    other.join();
    if (err) std::rethrow_exception(err);
  } else {
    treated = train(ds, treatment, config, ts_seeds);
    controlled = train(ds, control, config, ts_seeds);
  }
  rep.treatment_model = std::move(treated.model);
  rep.control_model = std::move(controlled.model);
  rep.treatment_test_accuracy = evaluate(rep.treatment_model, ds, Split::kTest).accuracy;
  rep.control_test_accuracy = evaluate(rep.control_model, ds, Split::kTest).accuracy;

  const std::vector<TimeSeries> probe =
      region_probe_set(options.region, options.probe_count, ds.spec.length,
                       derive_seed(config.base_seed, "probe", 0), ds.samples.size());
  rep.probe_count = probe.size();
  std::vector<const TimeSeries*> probe_ptrs;
  for (const TimeSeries& t : probe) probe_ptrs.push_back(&t);
  std::vector<const TimeSeries*> region_test;
  for (const TimeSeries& t : ds.samples)
    if (t.split == Split::kTest && options.region.contains(t.params)) region_test.push_back(&t);
  rep.region_test = region_test.size();

  const auto rate = [](const std::vector<SignalClass>& pred, auto&& pick) {
    if (pred.empty()) return 0.0;
    const auto k = std::count_if(pred.begin(), pred.end(), pick);
    return static_cast<double>(k) / static_cast<double>(pred.size());
  };
  const auto is_sigmoid = [](SignalClass c) { return c == SignalClass::kSigmoid; };
  const auto is_wrong = [](SignalClass c) { return c != SignalClass::kCubicFunction; };

  const auto probe_treat = predict(rep.treatment_model, probe_ptrs);
  const auto probe_ctrl = predict(rep.control_model, probe_ptrs);
  rep.inheritance_rate = rate(probe_treat, is_sigmoid);
  rep.control_error_rate = rate(probe_ctrl, is_wrong);
  rep.test_inheritance_rate = rate(predict(rep.treatment_model, region_test), is_sigmoid);
  rep.test_control_error_rate = rate(predict(rep.control_model, region_test), is_wrong);
  for (std::size_t i = 0; i < probe.size(); ++i)
    if (probe_treat[i] == SignalClass::kSigmoid) rep.misclassified.push_back(probe[i]);

  std::vector<const TimeSeries*> train_ptrs;
  std::vector<SignalClass> pseudo;
  std::size_t region_sigmoid = 0;
  for (const TimeSeries& t : ds.samples) {
    if (t.split != Split::kTrain) continue;
    const SignalClass label = treatment.find(t.id)->label;
    train_ptrs.push_back(&t);
    pseudo.push_back(label);
    if (options.region.contains(t.params) && label == SignalClass::kSigmoid) ++region_sigmoid;
  }
  rep.region_label_purity =
      rep.region_train ? static_cast<double>(region_sigmoid) / static_cast<double>(rep.region_train) : 0.0;
  rep.projection = embed_and_project(rep.treatment_model, train_ptrs, pseudo);
  return rep;
}

// Result files.

namespace {

json summary_json(const TrialSummary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"accuracies", s.accuracies}};
}

TrialSummary summary_of(const json& j) {
  TrialSummary s = TrialSummary::of(j.at("accuracies").get<std::vector<double>>());
  return s;
}

json trials_json(const TrialsResult& r) {
  json trials = json::array();
  for (const TrialOutcome& o : r.trials) {
    json history = json::array();
    for (const EpochRecord& e : o.history.epochs) history.push_back({e.train_loss, e.val_accuracy, e.lr});
    trials.push_back({{"trial", o.trial},
                      {"seeds",
                       {{"split", o.seeds.split},
                        {"init", o.seeds.init},
                        {"shuffle", o.seeds.shuffle},
                        {"label", o.seeds.label},
                        {"subsample", o.seeds.subsample}}},
                      {"test_accuracy", o.test.accuracy},
                      {"train_accuracy", o.train.accuracy},
                      {"teacher_train_accuracy", o.teacher_train.accuracy},
                      {"teacher_test_accuracy", o.teacher_test.accuracy},
                      {"teacher_excluded", o.teacher_train.excluded},
                      {"best_epoch", o.history.best_epoch},
                      {"best_val_accuracy", o.history.best_val_accuracy},
                      {"history", history},
                      {"confusion_test", o.test.confusion},
                      {"confusion_train", o.train.confusion},
                      {"teacher_confusion_train", o.teacher_train.confusion}});
  }
  return {{"teacher", r.teacher},
          {"summary",
           {{"test", summary_json(r.test)},
            {"train", summary_json(r.train)},
            {"teacher_train", summary_json(r.teacher_train)},
            {"teacher_test", summary_json(r.teacher_test)}}},
          {"trials", trials}};
}

json envelope(const std::string& kind, const Dataset& pool, const TrainConfig& config) {
  return {{"format", "tspl-results"},
          {"version", 1},
          {"kind", kind},
          {"dataset", to_json(pool.spec)},
          {"config", to_json(config)}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw IoError("error writing " + path.string());
}

json projection_json(const EmbeddingProjection& p) {
  std::vector<double> x, y;
  std::vector<int> labels, gt;
  for (std::size_t i = 0; i < p.ids.size(); ++i) {
    x.push_back(p.coords[i][0]);
    y.push_back(p.coords[i][1]);
    labels.push_back(class_id(p.labels[i]));
    gt.push_back(class_id(p.gt[i]));
  }
  return {{"ids", p.ids}, {"x", x}, {"y", y}, {"labels", labels}, {"gt", gt}, {"variance", p.variance}};
}

}  // namespace

void write_trials_result(const std::filesystem::path& path, const TrialsResult& result,
                         const Dataset& pool, const TrainConfig& config) {
  json j = envelope("trials", pool, config);
  j["result"] = trials_json(result);
  write_json(path, j);
}

void write_table1(const std::filesystem::path& path, const Table1& table, const Dataset& pool,
                  const TrainConfig& config) {
  json j = envelope("table1", pool, config);
  j["chance"] = table.chance;
  j["teacher"] = table.teacher;
  j["pseudo"] = trials_json(table.pseudo);
  j["truth"] = trials_json(table.truth);
  write_json(path, j);
}

void write_sweep(const std::filesystem::path& path, const SweepResult& sweep, const Dataset& pool,
                 const TrainConfig& config) {
  json j = envelope("sweep", pool, config);
  j["variable"] = sweep.variable;
  j["grid"] = sweep.grid;
  json points = json::array();
  for (std::size_t i = 0; i < sweep.grid.size(); ++i) {
    json p = {{"value", sweep.grid[i]}, {"summary", summary_json(sweep.summaries[i])}};
    if (i < sweep.runs.size()) p["run"] = trials_json(sweep.runs[i]);
    points.push_back(p);
  }
  j["points"] = points;
  write_json(path, j);
}

void write_inheritance(const std::filesystem::path& path, const InheritanceReport& rep,
                       const Dataset& pool, const TrainConfig& config,
                       const InheritanceOptions& options) {
  json j = envelope("inheritance", pool, config);
  j["validate_on_pseudo"] = options.validate_on_pseudo;
  j["region"] = {{"mid_lo", options.region.mid_lo},
                 {"mid_hi", options.region.mid_hi},
                 {"max_root_spread", options.region.max_root_spread},
                 {"max_wiggle", options.region.max_wiggle}};
  j["treatment_errors"] = rep.treatment_errors;
  j["control_errors"] = rep.control_errors;
  j["region_train"] = rep.region_train;
  j["probe_count"] = rep.probe_count;
  j["region_test"] = rep.region_test;
  j["inheritance_rate"] = rep.inheritance_rate;
  j["control_error_rate"] = rep.control_error_rate;
  j["test_inheritance_rate"] = rep.test_inheritance_rate;
  j["test_control_error_rate"] = rep.test_control_error_rate;
  j["treatment_test_accuracy"] = rep.treatment_test_accuracy;
  j["control_test_accuracy"] = rep.control_test_accuracy;
  j["region_label_purity"] = rep.region_label_purity;
  j["projection"] = projection_json(rep.projection);
  json mis = json::array();
  for (const TimeSeries& ts : rep.misclassified)
    mis.push_back({{"id", ts.id}, {"roots", ts.params.roots}, {"values", ts.values}});
  j["misclassified"] = mis;
  write_json(path, j);
}

std::vector<std::string> expected_result_files() {
  return {"results/table1.json", "results/sweep_noise.json", "results/sweep_size.json",
          "results/inherit.json", "results/train_<teacher>.json"};
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string out = "value,trial,accuracy,std\n";
  char buf[128];
  for (std::size_t i = 0; i < sweep.grid.size(); ++i) {
    const TrialSummary& s = sweep.summaries[i];
    for (std::size_t t = 0; t < s.accuracies.size(); ++t) {
      std::snprintf(buf, sizeof buf, "%g,%zu,%.6f,\n", sweep.grid[i], t, s.accuracies[t]);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "%g,mean,%.6f,%.6f\n", sweep.grid[i], s.mean, s.std);
    out += buf;
  }
  return out;
}

std::string confusion_csv(const ConfusionCounts& counts) {
  std::string out = "true\\predicted";
  for (SignalClass c : all_classes()) out += "," + std::string(class_name(c));
  out += '\n';
  for (SignalClass r : all_classes()) {
    out += class_name(r);
    for (std::size_t k = 0; k < kNumClasses; ++k)
      out += "," + std::to_string(counts[static_cast<std::size_t>(class_id(r))][k]);
    out += '\n';
  }
  return out;
}

// Report.

namespace {

ConfusionCounts sum_confusion(const json& trials, const char* field) {
  ConfusionCounts total{};
  for (const auto& t : trials) {
    const auto m = t.at(field).get<ConfusionCounts>();
    for (std::size_t i = 0; i < kNumClasses; ++i)
      for (std::size_t k = 0; k < kNumClasses; ++k) total[i][k] += m[i][k];
  }
  return total;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("error writing " + path.string());
}

std::string trials_text(const json& r) {
  const auto s = r.at("summary");
  return "teacher " + r.at("teacher").get<std::string>() +
         ": student test " + pct(summary_of(s.at("test"))) +
         ", student train " + pct(summary_of(s.at("train"))) +
         ", teacher train " + pct(summary_of(s.at("teacher_train"))) + "\n";
}

}  // namespace

std::vector<std::string> report(const std::filesystem::path& run_dir) {
  const auto results_dir = run_dir / "results";
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(results_dir))
    for (const auto& e : std::filesystem::directory_iterator(results_dir))
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  if (files.empty()) {
    std::string msg = "report: no result files in " + run_dir.string() + "; expected one or more of:";
    for (const auto& f : expected_result_files()) msg += " " + f;
    throw IoError(msg);
  }
  std::sort(files.begin(), files.end());

  const auto out_dir = run_dir / "report";
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> written;
  const auto emit = [&](const std::string& name, const std::string& text) {
    write_text(out_dir / name, text);
    written.push_back("report/" + name);
  };

  std::string summary;
  for (const auto& path : files) {
    const std::string stem = path.stem().string();
    json j;
    {
      std::ifstream in(path);
      if (!in) throw IoError("cannot read " + path.string());
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw IoError("result file " + path.string() + ": " + e.what());
      }
    }
    try {
      if (j.value("format", "") != "tspl-results")
        throw IoError(path.string() + " is not a result file");
      const std::string kind = j.at("kind").get<std::string>();
      summary += "== " + stem + " (" + kind + ")\n";
      if (kind == "trials") {
        const json& r = j.at("result");
        summary += trials_text(r);
        emit("confusion_" + stem + ".csv", confusion_csv(sum_confusion(r.at("trials"), "confusion_test")));
      } else if (kind == "table1") {
        const json& p = j.at("pseudo");
        const json& t = j.at("truth");
        summary += table1_text(j.at("chance").get<double>(), j.at("teacher").get<std::string>(),
                               summary_of(p.at("summary").at("teacher_train")),
                               summary_of(p.at("summary").at("teacher_test")),
                               summary_of(p.at("summary").at("train")),
                               summary_of(p.at("summary").at("test")),
                               summary_of(t.at("summary").at("train")),
                               summary_of(t.at("summary").at("test")));
        emit("confusion_" + stem + "_teacher.csv",
             confusion_csv(sum_confusion(p.at("trials"), "teacher_confusion_train")));
        emit("confusion_" + stem + "_pseudo.csv", confusion_csv(sum_confusion(p.at("trials"), "confusion_test")));
        emit("confusion_" + stem + "_truth.csv", confusion_csv(sum_confusion(t.at("trials"), "confusion_test")));
      } else if (kind == "sweep") {
        SweepResult s;
        s.variable = j.at("variable").get<std::string>();
        for (const auto& p : j.at("points")) {
          s.grid.push_back(p.at("value").get<double>());
          s.summaries.push_back(summary_of(p.at("summary")));
        }
        char buf[160];
        for (std::size_t i = 0; i < s.grid.size(); ++i) {
          std::snprintf(buf, sizeof buf, "%s=%g: test %s\n", s.variable.c_str(), s.grid[i],
                        pct(s.summaries[i]).c_str());
          summary += buf;
        }
        emit(stem + ".csv", sweep_csv(s));
      } else if (kind == "inheritance") {
        char buf[512];
        std::snprintf(buf, sizeof buf,
                      "treatment errors %zu, control errors %zu, region train %zu\n"
                      "inheritance rate %.4f (test split %.4f), control error rate %.4f (test split %.4f)\n"
                      "test accuracy: treatment %.4f, control %.4f\n",
                      j.at("treatment_errors").get<std::size_t>(), j.at("control_errors").get<std::size_t>(),
                      j.at("region_train").get<std::size_t>(), j.at("inheritance_rate").get<double>(),
                      j.at("test_inheritance_rate").get<double>(), j.at("control_error_rate").get<double>(),
                      j.at("test_control_error_rate").get<double>(),
                      j.at("treatment_test_accuracy").get<double>(),
                      j.at("control_test_accuracy").get<double>());
        summary += buf;
        const json& pr = j.at("projection");
        std::string csv = "id,x,y,label,gt\n";
        const auto ids = pr.at("ids").get<std::vector<std::uint64_t>>();
        const auto x = pr.at("x").get<std::vector<double>>();
        const auto y = pr.at("y").get<std::vector<double>>();
        const auto labels = pr.at("labels").get<std::vector<int>>();
        const auto gt = pr.at("gt").get<std::vector<int>>();
        for (std::size_t i = 0; i < ids.size(); ++i) {
          std::snprintf(buf, sizeof buf, "%llu,%.9g,%.9g,%s,%s\n", static_cast<unsigned long long>(ids[i]),
                        x[i], y[i], std::string(class_name(class_from_id(labels[i]))).c_str(),
                        std::string(class_name(class_from_id(gt[i]))).c_str());
          csv += buf;
        }
        emit("projection_" + stem + ".csv", csv);
        std::string mis = "id,r1,r2,r3,values\n";
        for (const auto& m : j.at("misclassified")) {
          const auto roots = m.at("roots").get<std::array<double, 3>>();
          std::snprintf(buf, sizeof buf, "%llu,%.9g,%.9g,%.9g,",
                        static_cast<unsigned long long>(m.at("id").get<std::uint64_t>()), roots[0], roots[1],
                        roots[2]);
          mis += buf;
          const auto values = m.at("values").get<std::vector<double>>();
          for (std::size_t i = 0; i < values.size(); ++i) {
            std::snprintf(buf, sizeof buf, i ? " %.9g" : "%.9g", values[i]);
            mis += buf;
          }
          mis += '\n';
        }
        emit("misclassified_" + stem + ".csv", mis);
      } else {
        throw IoError(path.string() + ": unknown result kind '" + kind + "'");
      }
      summary += '\n';
    } catch (const json::exception& e) {
      throw IoError("result file " + path.string() + ": " + e.what());
    }
  }
  emit("summary.txt", summary);
  return written;
}

}  // namespace tspl
