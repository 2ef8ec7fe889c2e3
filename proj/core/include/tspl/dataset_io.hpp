// core/include/tspl/dataset_io.hpp

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

#ifndef TSPL_DATASET_IO_HPP_
#define TSPL_DATASET_IO_HPP_

#include <array>
#include <filesystem>
#include <string>

#include "tspl/signal.hpp"

namespace tspl {

inline constexpr int kDatasetVersion = 1;

/// File names written by write_dataset, in split order train, val, test.
std::array<std::string, 3> dataset_file_names();

/// One JSONL file per split under `dir`: a header line
/// {"format":"tspl-dataset","version","split","length","seed","n_per_class",
///  "ratios","spec_hash","count"} then one record per sample in id order with
/// its class, generator parameters and values (%.9g). Unassigned samples are
/// not written.
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);

/// Inverse of write_dataset. Values round-trip exactly for datasets built by
/// generate_pool. Throws IoError on missing or malformed files and when the
/// headers disagree.
Dataset read_dataset(const std::filesystem::path& dir);

std::string params_to_json(const SignalParams& p);
SignalParams params_from_json(const std::string& text);

}  // namespace tspl

#endif  // TSPL_DATASET_IO_HPP_
