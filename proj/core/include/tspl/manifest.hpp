// core/include/tspl/manifest.hpp

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

#ifndef TSPL_MANIFEST_HPP_
#define TSPL_MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tspl {

std::string_view library_version();

struct FileDigest {
  std::string path;  // relative to the run directory, '/' separated
  std::string sha256;

  bool operator==(const FileDigest&) const = default;
};

/// One command invocation.
struct ManifestStep {
  std::string command;
  std::vector<std::string> args;
  std::string config_json = "{}";  // resolved configuration, JSON text
  std::map<std::string, std::uint64_t> seeds;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;

  bool operator==(const ManifestStep&) const = default;
};

/// manifest.json at the root of a run directory. Steps are keyed by name
/// (e.g. "gen", "label/oracle"); rerunning a step replaces its entry. No
/// timestamps, so reruns leave the file unchanged.
struct RunManifest {
  std::string tool_version;
  std::map<std::string, ManifestStep> steps;

  bool operator==(const RunManifest&) const = default;
};

inline constexpr const char* kManifestName = "manifest.json";

/// Empty manifest when the file does not exist; IoError when malformed.
RunManifest load_manifest(const std::filesystem::path& run_dir);
void save_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest);

/// Digests of files given relative to run_dir. Missing files raise IoError.
std::vector<FileDigest> digest_files(const std::filesystem::path& run_dir,
                                     const std::vector<std::string>& relative_paths);

/// Adds `step` under `name` (inputs and outputs given as relative paths are
/// hashed here) and saves the manifest.
void record_step(const std::filesystem::path& run_dir, const std::string& name, ManifestStep step,
                 const std::vector<std::string>& inputs, const std::vector<std::string>& outputs);

/// Re-hashes every recorded input and output. Returns one message per
/// missing or changed file; empty when everything matches.
std::vector<std::string> verify_manifest(const std::filesystem::path& run_dir);

}  // namespace tspl

#endif  // TSPL_MANIFEST_HPP_
