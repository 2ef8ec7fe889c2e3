// tests/acceptance/acceptance.cpp

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

// Acceptance suite: one PASS/FAIL line per criterion on stdout, progress on
// stderr. Arguments, when given, select criteria by number.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "tspl/error.hpp"
#include "tspl/experiments.hpp"
#include "tspl/gradcheck.hpp"
#include "tspl/hash.hpp"
#include "tspl/labeler.hpp"
#include "tspl/rng.hpp"
#include "tspl/trainer.hpp"
#include "tspl/vlm.hpp"

namespace fs = std::filesystem;
using namespace tspl;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

class Suite {
 public:
  Suite() : pool_(generate_pool(DatasetSpec{})), config_(TrainConfig::desk()) {}

  const Dataset& pool() const { return pool_; }
  const TrainConfig& config() const { return config_; }
  RunCache& cache() { return cache_; }

  const TrialsResult& clean() {
    if (!clean_) {
      OracleTeacher oracle;
      clean_ = cache_.run(pool_, oracle, config_);
    }
    return *clean_;
  }

 private:
  Dataset pool_;
  TrainConfig config_;
  RunCache cache_;
  std::optional<TrialsResult> clean_;
};

Verdict gradient_check(Suite&) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelDescriptor d = gradcheck_descriptor();
  const GradCheckReport r = grad_check(d, 1);
  const double secs = seconds_since(t0);
  return {r.passed && r.max_relative_error < 1e-3 && secs < 30.0 && d.parameter_count() <= 5000,
          fmt("params %zu, max rel err %.3g over %zu coords, %.1f s", d.parameter_count(),
              r.max_relative_error, r.checked, secs)};
}

Verdict clean_ceiling(Suite& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const TrialsResult& r = s.clean();
  return {r.test.mean >= 0.95 && r.trials.size() == 5,
          fmt("oracle test mean %.4f (std %.4f) over %zu trials, %.0f s", r.test.mean, r.test.std,
              r.trials.size(), seconds_since(t0))};
}

Verdict noise_absorption(Suite& s) {
  const double clean = s.clean().test.mean;
  UniformNoiseTeacher t08({0.8}), t04({0.4});
  const TrialsResult r08 = s.cache().run(s.pool(), t08, s.config());
  const TrialsResult r04 = s.cache().run(s.pool(), t04, s.config());
  const bool ok = r08.test.mean > 0.80 && clean - r08.test.mean <= 0.05 && r04.test.mean > 0.40;
  return {ok, fmt("rho 0.8: %.4f (clean %.4f), rho 0.4: %.4f (std %.4f)", r08.test.mean, clean,
                  r04.test.mean, r04.test.std)};
}

Verdict student_exceeds_teacher(Suite& s) {
  ConfusionTeacher teacher(ConfusionModel::default_teacher());
  const Table1 t = compare_table1(s.pool(), teacher, s.config(), &s.cache());
  const double q = t.pseudo.teacher_train.mean;
  const double test = t.pseudo.test.mean, train = t.pseudo.train.mean;
  const bool ok = q >= 0.79 && q <= 0.85 && test >= q + 0.02 && train > q;
  return {ok, fmt("teacher train %.4f, student test %.4f, student train %.4f, gt student test %.4f", q,
                  test, train, t.truth.test.mean)};
}

Verdict data_size_law(Suite& s) {
  s.clean();
  const SweepResult sw = sample_size_sweep(s.pool(), kDefaultSizeGrid, s.config(), &s.cache());
  const MonotonicityCheck m = check_monotone(sw);
  std::string means;
  for (std::size_t i = 0; i < sw.grid.size(); ++i)
    means += fmt("%s%.0f:%.4f", i ? " " : "", sw.grid[i], sw.summaries[i].mean);
  return {sw.summaries.front().mean >= 0.5 && m.holds(1),
          means + fmt(", inversions %zu", m.inversions)};
}

Verdict error_inheritance(Suite& s) {
  const InheritanceReport r = inheritance_study(s.pool(), s.config());
  const bool ok = r.inheritance_rate >= 0.5 && r.control_error_rate <= r.inheritance_rate - 0.2;
  return {ok, fmt("inheritance %.3f, control %.3f on %zu held-out region cubics (%zu flipped labels each)",
                  r.inheritance_rate, r.control_error_rate, r.probe_count, r.treatment_errors)};
}

Verdict teacher_quality_estimator(Suite&) {
  const Dataset ds = make_dataset(DatasetSpec{});
  UniformNoiseTeacher noisy({0.8});
  const TeacherQuality q = teacher_quality(noisy.label_all(ds.samples, 1), ds, Split::kTrain);
  OracleTeacher oracle;
  const TeacherQuality o = teacher_quality(oracle.label_all(ds.samples, 1), ds, Split::kTrain);
  const bool ok = q.labeled == 9000 && q.accuracy >= 0.78 && q.accuracy <= 0.82 && o.accuracy == 1.0;
  return {ok, fmt("rho 0.8: %.4f over %zu, oracle %.4f", q.accuracy, q.labeled, o.accuracy)};
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = "'" TSPL_CLI_PATH "' " + args + " >>'" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> hash_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = file_sha256(e.path());
  return out;
}

Verdict determinism(Suite&) {
  const fs::path base = fs::temp_directory_path() / fmt("tspl_accept_%d", static_cast<int>(::getpid()));
  fs::remove_all(base);
  fs::create_directories(base);
  const fs::path log = base / "cli.log";
  const auto pass = [&](const fs::path& dir) {
    const std::string run = " --run '" + dir.string() + "' --quiet";
    const std::vector<std::string> steps = {
        "gen --out '" + dir.string() + "' --quiet",
        "label" + run + " --teacher uniform:0.8",
        "train" + run + " --teacher uniform:0.8 --trials 5 --epochs 3",
        "eval" + run + " --checkpoint checkpoints/uniform-0.8_trial4.ckpt --split test",
        "sweep-noise" + run + " --ratios 1.0,0.4 --trials 2 --epochs 2",
        "sweep-size" + run + " --sizes 90,900 --trials 2 --epochs 2",
        "table1" + run + " --trials 2 --epochs 2",
        "inherit" + run + " --epochs 2 --probe 100",
        "report" + run,
    };
    for (const std::string& st : steps)
      if (int code = run_cli(st, log); code != 0) return "'" + st.substr(0, st.find(' ')) + "' exited " + std::to_string(code);
    return std::string();
  };
  const fs::path a = base / "a", b = base / "b";
  std::string err = pass(a);
  const auto first = hash_tree(a);
  if (err.empty()) err = pass(a);
  const auto second = hash_tree(a);
  if (err.empty()) err = pass(b);
  auto other = hash_tree(b);
  if (!err.empty()) return {false, err + " (log " + log.string() + ")"};

  std::size_t differ = 0;
  std::string example;
  for (const auto& [path, digest] : first) {
    const auto it = second.find(path);
    if (it == second.end() || it->second != digest) ++differ, example = path;
  }
  if (second.size() != first.size()) ++differ;
  std::size_t cross = 0;
  for (const auto& [path, digest] : first) {
    if (path == "manifest.json") continue;
    const auto it = other.find(path);
    if (it == other.end() || it->second != digest) ++cross, example = path;
  }
  const bool ok = differ == 0 && cross == 0 && first.size() > 20;
  if (ok) fs::remove_all(base);
  return {ok, fmt("%zu files; rerun differences %zu, fresh-directory differences %zu%s", first.size(), differ,
                  cross, example.empty() ? "" : (" (e.g. " + example + ")").c_str())};
}

Verdict prompt_round_trip(Suite&) {
  Rng rng(2024);
  std::size_t ok = 0, total = 0;
  for (SignalClass c : all_classes()) {
    for (int i = 0; i < 100; ++i) {
      const std::vector<int> perm = random_permutation(rng);
      const std::string prompt = build_prompt(perm);
      int pos = 0;
      while (perm[pos] != class_id(c)) ++pos;
      const std::string option = "(" + std::to_string(pos) + ") " + std::string(class_name(c));
      const AnswerParse p = parse_answer("(" + std::to_string(pos) + ")", perm);
      ++total;
      ok += prompt.find(option) != std::string::npos && std::holds_alternative<SignalClass>(p) &&
            std::get<SignalClass>(p) == c;
    }
  }
  const std::vector<int> perm = random_permutation(rng);
  const AnswerParse bad = parse_answer("The plot shows an increasing trend.", perm);
  const bool no_number =
      std::holds_alternative<ParseFailure>(bad) && std::get<ParseFailure>(bad).kind == ParseFailure::Kind::kNoNumber;

  DatasetSpec spec;
  spec.n_per_class = 20;
  spec.length = 64;
  const Dataset ds = make_dataset(spec);
  LabelSet ls = OracleTeacher().label_all(ds.samples, 1);
  const std::uint64_t dropped = ds.samples[ds.indices(Split::kTrain).front()].id;
  std::erase_if(ls.records, [&](const LabelRecord& r) { return r.sample_id == dropped; });
  ls.failures.push_back({dropped, "no_number", "The plot shows an increasing trend."});
  TrainConfig c = TrainConfig::desk();
  c.epochs = 1;
  c.model = gradcheck_descriptor();
  const TrainOutcome out = train(ds, ls, c, {1, 2});
  return {ok == total && no_number && out.excluded == 1,
          fmt("%zu/%zu round trips, no-number failure %s, excluded %zu", ok, total, no_number ? "yes" : "no",
              out.excluded)};
}

Verdict vlm_against_mock(Suite&) {
  constexpr const char* kEnv = "TSPL_ACCEPTANCE_VLM_KEY";
  ::setenv(kEnv, "acceptance-key", 1);
  DatasetSpec spec;
  spec.n_per_class = 10;
  spec.ratios = {0.8, 0.1, 0.1};
  const Dataset ds = make_dataset(spec);
  const fs::path dir = fs::temp_directory_path() / fmt("tspl_accept_vlm_%d", static_cast<int>(::getpid()));
  fs::remove_all(dir);

  const auto run_mock = [&](bool with_malformed, const std::string& name) {
    MockVlmServer::Options o;
    o.required_key = "acceptance-key";
    MockVlmServer server(o);
    for (const TimeSeries& ts : ds.samples) server.register_sample(ts, with_malformed && ts.id % 10 == 3);
    server.start();
    VlmEndpointConfig c;
    c.base_url = server.base_url();
    c.model = "mock";
    c.api_key_env = kEnv;
    c.backoff_initial_seconds = 0;
    VlmTeacher teacher(c, dir / (name + "_cache.jsonl"));
    LabelSet ls = teacher.label_all(ds.samples, 1);
    write_labels(dir / (name + ".jsonl"), ls);
    return std::pair{read_labels(dir / (name + ".jsonl")), teacher.stats()};
  };

  const auto [truthful, st1] = run_mock(false, "truthful");
  std::size_t agree = 0;
  for (const LabelRecord& r : truthful.records) agree += r.label == oracle_label(*ds.find(r.sample_id)).label;
  const auto [malformed, st2] = run_mock(true, "malformed");
  std::size_t logged = 0;
  for (const LabelFailure& f : malformed.failures) logged += f.reason == "no_number" && !f.raw_response.empty();
  ::unsetenv(kEnv);
  fs::remove_all(dir);

  const bool ok = ds.samples.size() == 100 && agree == 100 && truthful.failures.empty() &&
                  malformed.records.size() == 90 && malformed.failures.size() == 10 && logged == 10 &&
                  st2.parse_failures == 10;
  return {ok, fmt("truthful: %zu/100 match oracle; malformed: %zu excluded, %zu logged, %zu labeled", agree,
                  malformed.failures.size(), logged, malformed.records.size())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict(Suite&)>>> criteria = {
      {"gradient check", gradient_check},
      {"clean-label ceiling", clean_ceiling},
      {"noise absorption", noise_absorption},
      {"student exceeds teacher", student_exceeds_teacher},
      {"data-size law", data_size_law},
      {"error inheritance", error_inheritance},
      {"teacher-quality estimator", teacher_quality_estimator},
      {"determinism", determinism},
      {"prompt/parse round trip", prompt_round_trip},
      {"VLM client against mock", vlm_against_mock},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  Suite suite;
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(n)) continue;
    std::fprintf(stderr, "[%d] %s ...\n", n, criteria[i].first.c_str());
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second(suite);
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", n, criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
    std::fprintf(stderr, "[%d] done in %.0f s\n", n, seconds_since(t0));
  }
  return failures == 0 ? 0 : 1;
}
