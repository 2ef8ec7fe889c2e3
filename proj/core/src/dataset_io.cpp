// core/src/dataset_io.cpp

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

#include "tspl/dataset_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tspl/error.hpp"

namespace tspl {

using json = nlohmann::json;

namespace {

json params_json(const SignalParams& p) {
  json j = {{"class", class_id(p.cls)},
            {"amplitude", p.amplitude},
            {"offset", p.offset},
            {"noise_sigma", p.noise_sigma}};
  switch (p.cls) {
    case SignalClass::kConstant:
      break;
    case SignalClass::kLinearIncrease:
    case SignalClass::kLinearDecrease:
      j["slope"] = p.slope;
      break;
    case SignalClass::kConcave:
    case SignalClass::kConvex:
      j["curvature"] = p.curvature;
      j["vertex"] = p.vertex;
      break;
    case SignalClass::kExponentialGrowth:
    case SignalClass::kExponentialDecay:
      j["rate"] = p.rate;
      break;
    case SignalClass::kSigmoid:
      j["steepness"] = p.steepness;
      j["midpoint"] = p.midpoint;
      break;
    case SignalClass::kCubicFunction:
      j["roots"] = p.roots;
      j["cubic_scale"] = p.cubic_scale;
      break;
    case SignalClass::kGaussian:
      j["center"] = p.center;
      j["width"] = p.width;
      break;
  }
  return j;
}

SignalParams params_of(const json& j) {
  SignalParams p;
  p.cls = class_from_id(j.at("class").get<int>());
  p.amplitude = j.at("amplitude").get<double>();
  p.offset = j.at("offset").get<double>();
  p.noise_sigma = j.at("noise_sigma").get<double>();
  p.slope = j.value("slope", 0.0);
  p.curvature = j.value("curvature", 0.0);
  p.vertex = j.value("vertex", 0.0);
  p.rate = j.value("rate", 0.0);
  p.steepness = j.value("steepness", 0.0);
  p.midpoint = j.value("midpoint", 0.0);
  if (j.contains("roots")) p.roots = j["roots"].get<std::array<double, 3>>();
  p.cubic_scale = j.value("cubic_scale", 0.0);
  p.center = j.value("center", 0.0);
  p.width = j.value("width", 0.0);
  return p;
}

std::string values_text(const std::vector<double>& values) {
  std::string out = "[";
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g", values[i]);
    if (i) out += ',';
    out += buf;
  }
  out += ']';
  return out;
}

constexpr std::array<Split, 3> kSplits = {Split::kTrain, Split::kVal, Split::kTest};

}  // namespace

std::array<std::string, 3> dataset_file_names() { return {"train.jsonl", "val.jsonl", "test.jsonl"}; }

std::string params_to_json(const SignalParams& p) { return params_json(p).dump(); }

SignalParams params_from_json(const std::string& text) {
  try {
    return params_of(json::parse(text));
  } catch (const json::exception& e) {
    throw IoError(std::string("signal params: ") + e.what());
  }
}

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  std::filesystem::create_directories(dir);
  const auto names = dataset_file_names();
  const DatasetSpec& spec = dataset.spec;
  for (std::size_t s = 0; s < 3; ++s) {
    const auto path = dir / names[s];
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    json header = {{"format", "tspl-dataset"},
                   {"version", kDatasetVersion},
                   {"split", split_name(kSplits[s])},
                   {"length", spec.length},
                   {"seed", spec.seed},
                   {"n_per_class", spec.n_per_class},
                   {"ratios", spec.ratios},
                   {"spec_hash", spec.hash()},
                   {"count", dataset.count(kSplits[s])}};
    out << header.dump() << '\n';
    for (const TimeSeries& ts : dataset.samples) {
      if (ts.split != kSplits[s]) continue;
      json rec = {{"id", ts.id}, {"class", class_id(ts.gt_class)}, {"params", params_json(ts.params)}};
      std::string line = rec.dump();
      line.pop_back();
      line += ",\"values\":" + values_text(ts.values) + "}\n";
      out << line;
    }
    if (!out) throw IoError("error writing " + path.string());
  }
}

Dataset read_dataset(const std::filesystem::path& dir) {
  const auto names = dataset_file_names();
  Dataset ds;
  for (std::size_t s = 0; s < 3; ++s) {
    const auto path = dir / names[s];
    std::ifstream in(path);
    if (!in) throw IoError("cannot read dataset file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + " is empty");
    try {
      const json header = json::parse(line);
      if (header.value("format", "") != "tspl-dataset")
        throw IoError(path.string() + " is not a dataset file");
      if (header.value("version", 0) != kDatasetVersion)
        throw IoError(path.string() + ": unsupported dataset version");
      if (header.at("split").get<std::string>() != split_name(kSplits[s]))
        throw IoError(path.string() + ": split field does not match the file name");
      DatasetSpec spec;
      spec.length = header.at("length").get<std::size_t>();
      spec.seed = header.at("seed").get<std::uint64_t>();
      spec.n_per_class = header.at("n_per_class").get<std::size_t>();
      spec.ratios = header.at("ratios").get<std::array<double, 3>>();
      if (s == 0) {
        ds.spec = spec;
      } else if (!(spec == ds.spec)) {
        throw IoError(path.string() + ": header disagrees with " + names[0]);
      }
      if (header.at("spec_hash").get<std::string>() != spec.hash())
        throw IoError(path.string() + ": spec_hash does not match the header fields");
      std::size_t count = 0;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json rec = json::parse(line);
        TimeSeries ts;
        ts.id = rec.at("id").get<std::uint64_t>();
        ts.gt_class = class_from_id(rec.at("class").get<int>());
        ts.params = params_of(rec.at("params"));
        ts.values = rec.at("values").get<std::vector<double>>();
        ts.split = kSplits[s];
        if (ts.values.size() != spec.length)
          throw IoError(path.string() + ": sample " + std::to_string(ts.id) + " has " +
                        std::to_string(ts.values.size()) + " values, expected " +
                        std::to_string(spec.length));
        ds.samples.push_back(std::move(ts));
        ++count;
      }
      if (count != header.at("count").get<std::size_t>())
        throw IoError(path.string() + ": record count does not match header");
    } catch (const json::exception& e) {
      throw IoError("dataset file " + path.string() + ": " + e.what());
    }
  }
  std::sort(ds.samples.begin(), ds.samples.end(),
            [](const TimeSeries& a, const TimeSeries& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < ds.samples.size(); ++i)
    if (ds.samples[i].id == ds.samples[i - 1].id)
      throw IoError("dataset: duplicate sample id " + std::to_string(ds.samples[i].id));
  return ds;
}

}  // namespace tspl
