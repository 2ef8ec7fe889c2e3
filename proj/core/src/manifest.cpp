// core/src/manifest.cpp

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

#include "tspl/manifest.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "tspl/error.hpp"
#include "tspl/hash.hpp"

#ifndef TSPL_VERSION
#define TSPL_VERSION "0.0.0"
#endif

namespace tspl {

using json = nlohmann::json;

namespace {

json digests_json(const std::vector<FileDigest>& files) {
  json out = json::array();
  for (const FileDigest& f : files) out.push_back({{"path", f.path}, {"sha256", f.sha256}});
  return out;
}

std::vector<FileDigest> digests_of(const json& j) {
  std::vector<FileDigest> out;
  for (const auto& f : j) out.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
  return out;
}

}  // namespace

std::string_view library_version() { return TSPL_VERSION; }

RunManifest load_manifest(const std::filesystem::path& run_dir) {
  RunManifest m;
  m.tool_version = std::string(library_version());
  const auto path = run_dir / kManifestName;
  if (!std::filesystem::exists(path)) return m;
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    const json j = json::parse(in);
    if (j.value("format", "") != "tspl-manifest") throw IoError(path.string() + " is not a run manifest");
    m.tool_version = j.at("tool_version").get<std::string>();
    for (const auto& [name, s] : j.at("steps").items()) {
      ManifestStep step;
      step.command = s.at("command").get<std::string>();
      step.args = s.at("args").get<std::vector<std::string>>();
      step.config_json = s.at("config").dump();
      step.seeds = s.at("seeds").get<std::map<std::string, std::uint64_t>>();
      step.inputs = digests_of(s.at("inputs"));
      step.outputs = digests_of(s.at("outputs"));
      m.steps[name] = std::move(step);
    }
  } catch (const json::exception& e) {
    throw IoError("manifest " + path.string() + ": " + e.what());
  }
  return m;
}

void save_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest) {
  json steps = json::object();
  for (const auto& [name, s] : manifest.steps) {
    steps[name] = {{"command", s.command},
                   {"args", s.args},
                   {"config", json::parse(s.config_json)},
                   {"seeds", s.seeds},
                   {"inputs", digests_json(s.inputs)},
                   {"outputs", digests_json(s.outputs)}};
  }
  const json j = {{"format", "tspl-manifest"},
                  {"version", 1},
                  {"tool_version", manifest.tool_version},
                  {"steps", steps}};
  std::filesystem::create_directories(run_dir);
  const auto path = run_dir / kManifestName;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("error writing " + path.string());
}

std::vector<FileDigest> digest_files(const std::filesystem::path& run_dir,
                                     const std::vector<std::string>& relative_paths) {
  std::vector<FileDigest> out;
  for (const std::string& rel : relative_paths) {
    const auto path = run_dir / rel;
    if (!std::filesystem::is_regular_file(path)) throw IoError("missing file " + path.string());
    out.push_back({rel, file_sha256(path)});
  }
  return out;
}

void record_step(const std::filesystem::path& run_dir, const std::string& name, ManifestStep step,
                 const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
  RunManifest m = load_manifest(run_dir);
  m.tool_version = std::string(library_version());
  step.inputs = digest_files(run_dir, inputs);
  step.outputs = digest_files(run_dir, outputs);
  m.steps[name] = std::move(step);
  save_manifest(run_dir, m);
}

std::vector<std::string> verify_manifest(const std::filesystem::path& run_dir) {
  if (!std::filesystem::exists(run_dir / kManifestName))
    throw IoError("no " + std::string(kManifestName) + " in " + run_dir.string());
  const RunManifest m = load_manifest(run_dir);
  std::vector<std::string> problems;
  for (const auto& [name, step] : m.steps) {
    for (const auto* list : {&step.inputs, &step.outputs}) {
      for (const FileDigest& f : *list) {
        const auto path = run_dir / f.path;
        if (!std::filesystem::is_regular_file(path)) {
          problems.push_back(name + ": missing " + f.path);
        } else if (file_sha256(path) != f.sha256) {
          problems.push_back(name + ": hash mismatch for " + f.path);
        }
      }
    }
  }
  return problems;
}

}  // namespace tspl
