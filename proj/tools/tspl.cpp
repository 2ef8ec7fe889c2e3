// tools/tspl.cpp

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

// tspl: synthetic time-series pseudo-label experiments.
//
//   tspl gen --out RUN --n-per-class 1000 --seed 1
//   tspl label --run RUN --teacher uniform:0.8
//   tspl train --run RUN --teacher oracle --trials 5
//   tspl eval --run RUN --checkpoint checkpoints/oracle_trial0.ckpt
//   tspl sweep-noise --run RUN --ratios 1.0,0.8,0.6,0.4
//   tspl sweep-size --run RUN --sizes 90,300,900,3000,9000
//   tspl inherit --run RUN
//   tspl table1 --run RUN --teacher confusion --print-table
//   tspl gradcheck
//   tspl report --run RUN
//   tspl mock-vlm --run RUN --port 8080
//   tspl verify --run RUN
//   tspl replay --run RUN --step gen
//
// Exit codes: 0 ok, 2 usage, 3 I/O, 4 validation, 5 external service.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <csignal>
#include <pthread.h>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tspl/checkpoint.hpp"
#include "tspl/dataset_io.hpp"
#include "tspl/error.hpp"
#include "tspl/experiments.hpp"
#include "tspl/gradcheck.hpp"
#include "tspl/labeler.hpp"
#include "tspl/manifest.hpp"
#include "tspl/trainer.hpp"
#include "tspl/vlm.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace tspl;

namespace {

struct Common {
  std::string run_dir;
  int jobs = 1;
  bool print_table = false;
  bool quiet = false;
};

struct TrainFlags {
  int trials = 5;
  int epochs = 100;
  std::size_t batch = 32;
  double lr = TrainConfig::desk().lr;
  double min_lr = TrainConfig::desk().min_lr;
  double weight_decay = 0.01;
  std::uint64_t seed = 1;
  bool pseudo_val = false;
};

struct VlmFlags {
  std::string base_url = VlmEndpointConfig{}.base_url;
  std::string model = VlmEndpointConfig{}.model;
  std::string api_key_env = VlmEndpointConfig{}.api_key_env;
  double timeout = 60.0;
  int max_retries = 4;
  double backoff = 1.0;
};

void progress(const Common& c, const std::string& line) {
  if (!c.quiet) std::fprintf(stderr, "%s\n", line.c_str());
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path run_path(const Common& c) {
  if (c.run_dir.empty()) throw UsageError("--run is required");
  return c.run_dir;
}

std::vector<std::string> dataset_inputs() {
  std::vector<std::string> out;
  for (const auto& n : dataset_file_names()) out.push_back("datasets/" + n);
  return out;
}

Dataset load_pool(const fs::path& run) {
  if (!fs::is_directory(run / "datasets"))
    throw IoError("no datasets/ in " + run.string() + " (run 'tspl gen --out " + run.string() + "' first)");
  Dataset ds = read_dataset(run / "datasets");
  for (TimeSeries& ts : ds.samples) ts.split = Split::kUnassigned;
  return ds;
}

TrainConfig train_config(const TrainFlags& f, const Common& c, std::size_t length) {
  TrainConfig cfg = TrainConfig::desk();
  cfg.trials = f.trials;
  cfg.epochs = f.epochs;
  cfg.batch_size = f.batch;
  cfg.lr = f.lr;
  cfg.min_lr = f.min_lr;
  cfg.weight_decay = f.weight_decay;
  cfg.base_seed = f.seed;
  cfg.validate_on_pseudo = f.pseudo_val;
  cfg.jobs = c.jobs;
  cfg.verbose = !c.quiet;
  cfg.model.input_length = length;
  cfg.validate();
  return cfg;
}

VlmEndpointConfig vlm_config(const VlmFlags& f, const Common& c) {
  VlmEndpointConfig v;
  v.base_url = f.base_url;
  v.model = f.model;
  v.api_key_env = f.api_key_env;
  v.timeout_seconds = f.timeout;
  v.max_retries = f.max_retries;
  v.backoff_initial_seconds = f.backoff;
  v.max_concurrency = c.jobs;
  v.validate();
  return v;
}

/// File-name friendly form of a teacher spec.
std::string teacher_tag(const std::string& spec) {
  std::string tag;
  for (char ch : spec) {
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-') {
      tag += ch;
    } else if (ch == ':' || ch == '/' || ch == '_') {
      tag += '-';
    }
  }
  return tag.empty() ? "teacher" : tag;
}

std::unique_ptr<Teacher> make_teacher(const std::string& spec, const fs::path& run,
                                      const VlmFlags& vf, const Common& c) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "oracle" && arg.empty()) return std::make_unique<OracleTeacher>();
  if (kind == "systematic" && arg.empty()) return std::make_unique<SystematicTeacher>();
  if (kind == "uniform") {
    char* end = nullptr;
    const double rho = std::strtod(arg.c_str(), &end);
    if (arg.empty() || *end != '\0') throw UsageError("teacher 'uniform:RHO' needs a number, got '" + spec + "'");
    NoiseSpec ns{rho};
    try {
      ns.validate();
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
    return std::make_unique<UniformNoiseTeacher>(ns);
  }
  if (kind == "confusion")
    return std::make_unique<ConfusionTeacher>(arg.empty() ? ConfusionModel::default_teacher()
                                                          : ConfusionModel::load(arg));
  if (kind == "vlm" && arg.empty())
    return std::make_unique<VlmTeacher>(vlm_config(vf, c), run / "labels" / "vlm_cache.jsonl");
  throw UsageError("unknown teacher '" + spec +
                   "' (expected oracle, uniform:RHO, confusion[:PATH], systematic or vlm)");
}

std::string join(const std::vector<std::string>& args) {
  std::string out;
  for (const auto& a : args) out += (out.empty() ? "" : " ") + a;
  return out;
}

void print_quality(const Common& c, const std::string& teacher, const TeacherQuality& q) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "teacher %s: train quality %.4f (%zu/%zu labeled correct, %zu excluded)",
                teacher.c_str(), q.accuracy, q.correct, q.labeled, q.excluded);
  progress(c, buf);
}

std::vector<std::string> checkpoint_outputs(const fs::path& run, const std::string& tag,
                                            const TrialsResult& r) {
  std::vector<std::string> out;
  for (const TrialOutcome& o : r.trials) {
    const std::string rel = "checkpoints/" + tag + "_trial" + std::to_string(o.trial) + ".ckpt";
    CheckpointMeta meta;
    meta.split_seed = o.seeds.split;
    meta.shuffle_seed = o.seeds.shuffle;
    meta.epoch = o.history.best_epoch;
    meta.val_accuracy = o.history.best_val_accuracy;
    write_checkpoint(run / rel, o.model, meta);
    out.push_back(rel);
  }
  return out;
}

std::string summary_line(const std::string& what, const TrialSummary& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s: mean %.4f std %.4f over %zu trials", what.c_str(), s.mean, s.std,
                s.accuracies.size());
  return buf;
}

json config_json(const TrainConfig& cfg) {
  return {{"epochs", cfg.epochs},   {"batch_size", cfg.batch_size}, {"lr", cfg.lr},
          {"min_lr", cfg.min_lr},   {"weight_decay", cfg.weight_decay},
          {"lr_factor", cfg.lr_factor}, {"lr_patience", cfg.lr_patience},
          {"trials", cfg.trials},   {"base_seed", cfg.base_seed},
          {"validate_on_pseudo", cfg.validate_on_pseudo}, {"hash", cfg.hash()}};
}

std::map<std::string, std::uint64_t> trial_seeds(const TrainConfig& cfg) {
  std::map<std::string, std::uint64_t> seeds{{"base", cfg.base_seed}};
  for (int t = 0; t < cfg.trials; ++t) {
    const TrialSeeds s = TrialSeeds::for_trial(cfg.base_seed, t);
    const std::string k = "trial" + std::to_string(t) + ".";
    seeds[k + "split"] = s.split;
    seeds[k + "init"] = s.init;
    seeds[k + "shuffle"] = s.shuffle;
    seeds[k + "label"] = s.label;
    seeds[k + "subsample"] = s.subsample;
  }
  return seeds;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::stringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) throw UsageError(std::string(flag) + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(flag) + " is empty");
  return out;
}

int run_cli(std::vector<std::string> args);

int dispatch(int argc, char** argv, const std::vector<std::string>& args) {
  CLI::App app{"Synthetic time-series pseudo-label experiments"};
  app.require_subcommand(1);
  Common c;
  TrainFlags tf;
  VlmFlags vf;

  const auto add_common = [&](CLI::App* sub, bool needs_run = true) {
    if (needs_run) sub->add_option("--run", c.run_dir, "Run directory")->required();
    sub->add_option("--jobs", c.jobs, "Concurrent trials or requests")->check(CLI::PositiveNumber);
    sub->add_flag("--print-table", c.print_table, "Also print the result table on stdout");
    sub->add_flag("--quiet", c.quiet, "No progress lines");
  };
  const auto add_train = [&](CLI::App* sub) {
    sub->add_option("--trials", tf.trials, "Trials (split + initialization)")->check(CLI::PositiveNumber);
    sub->add_option("--epochs", tf.epochs, "Epochs per trial")->check(CLI::PositiveNumber);
    sub->add_option("--batch", tf.batch, "Mini-batch size")->check(CLI::PositiveNumber);
    sub->add_option("--lr", tf.lr, "Initial learning rate")->check(CLI::PositiveNumber);
    sub->add_option("--min-lr", tf.min_lr, "Plateau reductions stop at this rate")->check(CLI::NonNegativeNumber);
    sub->add_option("--weight-decay", tf.weight_decay, "AdamW decoupled weight decay")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", tf.seed, "Base seed for splits, initialization, shuffling and labels");
    sub->add_flag("--pseudo-val", tf.pseudo_val, "Validate against pseudo labels instead of ground truth");
  };
  const auto add_vlm = [&](CLI::App* sub) {
    sub->add_option("--base-url", vf.base_url, "Chat completions endpoint base URL");
    sub->add_option("--model", vf.model, "Model name");
    sub->add_option("--api-key-env", vf.api_key_env, "Environment variable holding the API key");
    sub->add_option("--timeout", vf.timeout, "Request timeout in seconds")->check(CLI::PositiveNumber);
    sub->add_option("--max-retries", vf.max_retries, "Retries for transient failures")->check(CLI::NonNegativeNumber);
    sub->add_option("--backoff", vf.backoff, "Initial retry backoff in seconds")->check(CLI::NonNegativeNumber);
  };

  // gen
  std::size_t n_per_class = 1000, length = 256;
  std::uint64_t gen_seed = 1;
  std::string ratios_text = "0.9,0.05,0.05";
  auto* gen = app.add_subcommand("gen", "Generate the train/val/test dataset files");
  gen->add_option("--out", c.run_dir, "Run directory")->required();
  gen->add_option("--n-per-class", n_per_class, "Signals per class")->check(CLI::PositiveNumber);
  gen->add_option("--length", length, "Samples per signal")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Dataset seed");
  gen->add_option("--ratios", ratios_text, "train,val,test fractions");
  add_common(gen, false);

  // label
  std::string teacher_spec = "oracle", labels_out;
  std::uint64_t label_seed = 1;
  auto* label = app.add_subcommand("label", "Pseudo-label the dataset with a teacher");
  label->add_option("--teacher", teacher_spec, "oracle | uniform:RHO | confusion[:PATH] | systematic | vlm");
  label->add_option("--seed", label_seed, "Base seed (labels use its trial-0 label stream)");
  label->add_option("--out", labels_out, "Labels file (default labels/<teacher>.jsonl)");
  add_common(label);
  add_vlm(label);

  // train
  std::string labels_in;
  auto* train_cmd = app.add_subcommand("train", "Train students over several trials");
  train_cmd->add_option("--teacher", teacher_spec, "Teacher used to label each trial");
  train_cmd->add_option("--labels", labels_in, "Fixed labels file instead of --teacher");
  add_common(train_cmd);
  add_train(train_cmd);
  add_vlm(train_cmd);

  // eval
  std::string checkpoint_rel, split_text = "test";
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint against ground truth");
  eval->add_option("--checkpoint", checkpoint_rel, "Checkpoint path (relative to --run)")->required();
  eval->add_option("--split", split_text, "train | val | test");
  add_common(eval);

  // sweeps
  std::string ratio_list = "1.0,0.9,0.8,0.7,0.6,0.5,0.4", size_list = "90,300,900,3000,9000";
  auto* sweep_noise = app.add_subcommand("sweep-noise", "Test accuracy against the correct-label ratio");
  sweep_noise->add_option("--ratios", ratio_list, "Comma separated correct-label ratios");
  add_common(sweep_noise);
  add_train(sweep_noise);
  auto* sweep_size = app.add_subcommand("sweep-size", "Test accuracy against the training set size");
  sweep_size->add_option("--sizes", size_list, "Comma separated training set sizes");
  add_common(sweep_size);
  add_train(sweep_size);

  // inherit
  std::size_t probe_count = 300;
  bool gt_val = false;
  double max_wiggle = SystematicRegion{}.max_wiggle;
  auto* inherit = app.add_subcommand("inherit", "Systematic versus random label noise");
  inherit->add_option("--probe", probe_count, "Held-out region cubics")->check(CLI::PositiveNumber);
  inherit->add_option("--max-wiggle", max_wiggle, "Region: largest relative bump of a cubic");
  inherit->add_flag("--gt-val", gt_val, "Select epochs against ground truth");
  add_common(inherit);
  add_train(inherit);

  // table1
  auto* table1 = app.add_subcommand("table1", "Teacher, student on pseudo labels, student on ground truth");
  table1->add_option("--teacher", teacher_spec, "Teacher (default confusion)");
  add_common(table1);
  add_train(table1);
  add_vlm(table1);

  // gradcheck
  std::uint64_t gc_seed = 1;
  double tolerance = 1e-3;
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare backprop with central differences");
  gradcheck->add_option("--seed", gc_seed, "Model and input seed");
  gradcheck->add_option("--tolerance", tolerance, "Largest accepted relative error");
  add_common(gradcheck, false);

  // report
  auto* report_cmd = app.add_subcommand("report", "Summaries and CSV tables from results/");
  add_common(report_cmd);

  // mock-vlm
  int port = 8080;
  std::string mock_mode = "truthful", mock_key_env;
  std::size_t malformed_every = 0, mock_limit = 0;
  auto* mock = app.add_subcommand("mock-vlm", "Serve the built-in chat completions mock for a dataset");
  mock->add_option("--port", port, "TCP port on 127.0.0.1");
  mock->add_option("--mode", mock_mode, "truthful | constant")->check(CLI::IsMember({"truthful", "constant"}));
  mock->add_option("--malformed-every", malformed_every, "Every k-th sample (by id) gets an unparseable answer");
  mock->add_option("--limit", mock_limit, "Register only the first n samples");
  mock->add_option("--require-key-env", mock_key_env, "Reject requests without the key from this variable");
  add_common(mock);

  // verify / replay
  auto* verify = app.add_subcommand("verify", "Re-hash every file recorded in the manifest");
  add_common(verify);
  std::string step_name;
  auto* replay = app.add_subcommand("replay", "Re-run a step recorded in the manifest");
  replay->add_option("--step", step_name, "Step name as stored in manifest.json")->required();
  add_common(replay);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorKind::kUsage);
  }

  ManifestStep step;
  step.args = args;

  if (gen->parsed()) {
    const fs::path run = c.run_dir;
    DatasetSpec spec;
    spec.n_per_class = n_per_class;
    spec.length = length;
    spec.seed = gen_seed;
    const auto r = parse_list<double>(ratios_text, "--ratios");
    if (r.size() != 3) throw UsageError("--ratios needs three values");
    spec.ratios = {r[0], r[1], r[2]};
    try {
      spec.validate();
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
    progress(c, "generating " + std::to_string(spec.n_per_class * kNumClasses) + " signals");
    const Dataset ds = make_dataset(spec);
    write_dataset(run / "datasets", ds);
    progress(c, "train " + std::to_string(ds.count(Split::kTrain)) + ", val " +
                    std::to_string(ds.count(Split::kVal)) + ", test " + std::to_string(ds.count(Split::kTest)));
    step.command = "gen";
    step.config_json = json{{"n_per_class", spec.n_per_class},
                            {"length", spec.length},
                            {"ratios", spec.ratios},
                            {"seed", spec.seed},
                            {"spec_hash", spec.hash()}}
                           .dump();
    step.seeds = {{"dataset", spec.seed}, {"split", derive_seed(spec.seed, "split", 0)}};
    record_step(run, "gen", step, {}, dataset_inputs());
    return 0;
  }

  if (gradcheck->parsed()) {
    GradCheckOptions o;
    o.tolerance = tolerance;
    const GradCheckReport rep = grad_check(gradcheck_descriptor(), gc_seed, o);
    char buf[256];
    std::snprintf(buf, sizeof buf, "gradcheck: max relative error %.3e at %s[%zu] (%zu checked, %zu at kinks) %s",
                  rep.max_relative_error, rep.worst_parameter.c_str(), rep.worst_index, rep.checked,
                  rep.skipped_at_kinks, rep.passed ? "PASS" : "FAIL");
    std::fprintf(stderr, "%s\n", buf);
    if (c.print_table) std::printf("%s\n", buf);
    return rep.passed ? 0 : exit_code(ErrorKind::kValidation);
  }

  const fs::path run = run_path(c);

  if (verify->parsed()) {
    const auto problems = verify_manifest(run);
    for (const auto& p : problems) std::fprintf(stderr, "%s\n", p.c_str());
    if (!problems.empty()) throw ValidationError(std::to_string(problems.size()) + " recorded files changed");
    progress(c, "manifest verified");
    return 0;
  }

  if (replay->parsed()) {
    const RunManifest m = load_manifest(run);
    const auto it = m.steps.find(step_name);
    if (it == m.steps.end()) throw UsageError("no step '" + step_name + "' in " + (run / kManifestName).string());
    progress(c, "replaying: tspl " + join(it->second.args));
    return run_cli(it->second.args);
  }

  if (report_cmd->parsed()) {
    const auto written = report(run);
    std::vector<std::string> inputs;
    for (const auto& e : fs::directory_iterator(run / "results"))
      if (e.is_regular_file() && e.path().extension() == ".json")
        inputs.push_back("results/" + e.path().filename().string());
    std::sort(inputs.begin(), inputs.end());
    step.command = "report";
    record_step(run, "report", step, inputs, written);
    if (c.print_table) {
      std::ifstream in(run / "report" / "summary.txt");
      std::printf("%s", std::string(std::istreambuf_iterator<char>(in), {}).c_str());
    }
    progress(c, "wrote " + std::to_string(written.size()) + " report files");
    return 0;
  }

  Dataset pool = load_pool(run);

  if (mock->parsed()) {
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
    MockVlmServer::Options o;
    o.mode = mock_mode == "constant" ? MockVlmServer::Mode::kConstant : MockVlmServer::Mode::kTruthful;
    if (!mock_key_env.empty()) {
      VlmEndpointConfig kc;
      kc.api_key_env = mock_key_env;
      o.required_key = resolve_api_key(kc);
    }
    MockVlmServer server(o);
    std::size_t n = 0;
    for (const TimeSeries& ts : pool.samples) {
      if (mock_limit && n >= mock_limit) break;
      server.register_sample(ts, malformed_every && (n % malformed_every) == malformed_every - 1);
      ++n;
    }
    server.start(port);
    progress(c, "mock VLM serving " + std::to_string(n) + " samples at " + server.base_url());
    int received = 0;
    sigwait(&stop_signals, &received);
    server.stop();
    progress(c, "mock VLM stopped after " + std::to_string(server.requests()) + " requests");
    return 0;
  }

  if (label->parsed()) {
    auto teacher = make_teacher(teacher_spec, run, vf, c);
    const std::string tag = teacher_tag(teacher_spec);
    const std::string rel = labels_out.empty() ? "labels/" + tag + ".jsonl" : labels_out;
    Dataset ds = read_dataset(run / "datasets");
    const std::uint64_t seed = TrialSeeds::for_trial(label_seed, 0).label;
    progress(c, "labeling " + std::to_string(ds.samples.size()) + " samples with " + teacher->id());
    const LabelSet ls = teacher->label_all(ds.samples, seed);
    for (const LabelFailure& f : ls.failures)
      progress(c, "sample " + std::to_string(f.sample_id) + " excluded (" + f.reason + "): " + f.raw_response);
    write_labels(run / rel, ls);
    print_quality(c, teacher->id(), teacher_quality(ls, ds, Split::kTrain));
    if (!ls.failures.empty()) progress(c, std::to_string(ls.failures.size()) + " samples excluded");
    if (auto* vt = dynamic_cast<VlmTeacher*>(teacher.get())) {
      const VlmStats s = vt->stats();
      progress(c, std::to_string(s.requests) + " requests, " + std::to_string(s.cache_hits) + " cache hits");
    }
    step.command = "label";
    step.config_json = json{{"teacher", teacher->id()}, {"config_hash", teacher->config_hash()}}.dump();
    step.seeds = {{"base", label_seed}, {"label", seed}};
    std::vector<std::string> outputs = {rel};
    record_step(run, "label/" + tag, step, dataset_inputs(), outputs);
    return 0;
  }

  if (eval->parsed()) {
    const Checkpoint ck = read_checkpoint(run / checkpoint_rel);
    const Split split = split_from_name(split_text);
    const Dataset ds = assign_splits(pool, ck.meta.split_seed);
    const EvalResult r = evaluate(ck.model, ds, split);
    const std::string stem = fs::path(checkpoint_rel).stem().string();
    const std::string rel = "results/eval_" + stem + "_" + split_text + ".csv";
    fs::create_directories(run / "results");
    {
      std::ofstream out(run / rel, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write " + (run / rel).string());
      out << confusion_csv(r.confusion);
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %s accuracy %.4f (%zu samples)", stem.c_str(), split_text.c_str(),
                  r.accuracy, r.total);
    progress(c, buf);
    if (c.print_table) std::printf("%s\n", buf);
    step.command = "eval";
    step.seeds = {{"split", ck.meta.split_seed}};
    std::vector<std::string> inputs = dataset_inputs();
    inputs.push_back(checkpoint_rel);
    record_step(run, "eval/" + stem + "/" + split_text, step, inputs, {rel});
    return 0;
  }

  const TrainConfig cfg = train_config(tf, c, pool.spec.length);
  step.config_json = config_json(cfg).dump();
  step.seeds = trial_seeds(cfg);

  if (train_cmd->parsed()) {
    std::vector<std::string> inputs = dataset_inputs();
    TrialsResult r;
    std::string tag;
    if (!labels_in.empty()) {
      const LabelSet fixed = read_labels(run / labels_in);
      tag = fs::path(labels_in).stem().string();
      inputs.push_back(labels_in);
      r = run_trials(pool, [&](const Dataset&, int, const TrialSeeds&) { return fixed; }, cfg);
    } else {
      auto teacher = make_teacher(teacher_spec, run, vf, c);
      tag = teacher_tag(teacher_spec);
      r = run_trials(pool, *teacher, cfg);
    }
    const std::string rel = "results/train_" + tag + ".json";
    write_trials_result(run / rel, r, pool, cfg);
    std::vector<std::string> outputs = checkpoint_outputs(run, tag, r);
    outputs.insert(outputs.begin(), rel);
    progress(c, summary_line("test accuracy", r.test));
    progress(c, summary_line("teacher train quality", r.teacher_train));
    if (c.print_table) std::printf("%s\n", summary_line("test accuracy", r.test).c_str());
    step.command = "train";
    record_step(run, "train/" + tag, step, inputs, outputs);
    return 0;
  }

  if (sweep_noise->parsed() || sweep_size->parsed()) {
    const bool noise = sweep_noise->parsed();
    const SweepResult s =
        noise ? noise_ratio_sweep(pool, parse_list<double>(ratio_list, "--ratios"), cfg)
              : sample_size_sweep(pool, parse_list<std::size_t>(size_list, "--sizes"), cfg);
    const std::string name = noise ? "sweep_noise" : "sweep_size";
    write_sweep(run / ("results/" + name + ".json"), s, pool, cfg);
    {
      std::ofstream out(run / ("results/" + name + ".csv"), std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write results/" + name + ".csv");
      out << sweep_csv(s);
    }
    std::string table;
    for (std::size_t i = 0; i < s.grid.size(); ++i)
      table += summary_line(s.variable + "=" + fmt("%g", s.grid[i]), s.summaries[i]) + "\n";
    progress(c, table.substr(0, table.size() - 1));
    if (c.print_table) std::printf("%s", table.c_str());
    step.command = noise ? "sweep-noise" : "sweep-size";
    record_step(run, step.command, step, dataset_inputs(),
                {"results/" + name + ".json", "results/" + name + ".csv"});
    return 0;
  }

  if (inherit->parsed()) {
    InheritanceOptions o;
    o.probe_count = probe_count;
    o.validate_on_pseudo = !gt_val;
    o.region.max_wiggle = max_wiggle;
    const InheritanceReport rep = inheritance_study(pool, cfg, o);
    write_inheritance(run / "results/inherit.json", rep, pool, cfg, o);
    CheckpointMeta meta;
    const TrialSeeds seeds = TrialSeeds::for_trial(cfg.base_seed, 0);
    meta.split_seed = seeds.split;
    meta.shuffle_seed = seeds.shuffle;
    write_checkpoint(run / "checkpoints/inherit_treatment.ckpt", rep.treatment_model, meta);
    write_checkpoint(run / "checkpoints/inherit_control.ckpt", rep.control_model, meta);
    char buf[256];
    std::snprintf(buf, sizeof buf, "inheritance rate %.4f, control error rate %.4f (%zu flipped labels per arm)",
                  rep.inheritance_rate, rep.control_error_rate, rep.treatment_errors);
    progress(c, buf);
    if (c.print_table) std::printf("%s\n", buf);
    step.command = "inherit";
    step.seeds["probe"] = derive_seed(cfg.base_seed, "probe", 0);
    record_step(run, "inherit", step, dataset_inputs(),
                {"results/inherit.json", "checkpoints/inherit_treatment.ckpt",
                 "checkpoints/inherit_control.ckpt"});
    return 0;
  }

  if (table1->parsed()) {
    if (teacher_spec == "oracle" && !table1->count("--teacher")) teacher_spec = "confusion";
    auto teacher = make_teacher(teacher_spec, run, vf, c);
    const Table1 t = compare_table1(pool, *teacher, cfg);
    write_table1(run / "results/table1.json", t, pool, cfg);
    const std::string text = format_table1(t);
    progress(c, text.substr(0, text.size() - 1));
    if (c.print_table) std::printf("%s", text.c_str());
    step.command = "table1";
    record_step(run, "table1", step, dataset_inputs(), {"results/table1.json"});
    return 0;
  }

  throw UsageError("no command given");
}

int run_cli(std::vector<std::string> args) {
  std::vector<char*> argv;
  std::string prog = "tspl";
  argv.push_back(prog.data());
  for (auto& a : args) argv.push_back(a.data());
  try {
    return dispatch(static_cast<int>(argv.size()), argv.data(), args);
  } catch (const Error& e) {
    std::fprintf(stderr, "tspl: error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "tspl: error: %s\n", e.what());
    return exit_code(ErrorKind::kIo);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "tspl: internal error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(std::move(args));
}
