// core/src/checkpoint.cpp

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

#include "tspl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json_fields.hpp"
#include "tspl/error.hpp"

namespace tspl {

using json = nlohmann::json;

namespace {

void to_little_endian(std::uint64_t& bits) {
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const ClassifierModel& model,
                      const CheckpointMeta& meta) {
  json index = json::array();
  std::size_t offset = 0;
  for (const NamedTensor& p : model.params) {
    index.push_back({{"name", p.name}, {"shape", p.value.shape}, {"offset", offset}});
    offset += p.value.size();
  }
  json header = {{"format", "tspl-checkpoint"},
                 {"version", kCheckpointVersion},
                 {"descriptor", to_json(model.descriptor)},
                 {"init_seed", model.init_seed},
                 {"split_seed", meta.split_seed},
                 {"shuffle_seed", meta.shuffle_seed},
                 {"epoch", meta.epoch},
                 {"val_accuracy", meta.val_accuracy},
                 {"count", offset},
                 {"tensors", index}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << header.dump() << '\n';
  std::vector<char> payload(offset * 8);
  std::size_t k = 0;
  for (const NamedTensor& p : model.params)
    for (double v : p.value.data) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      to_little_endian(bits);
      std::memcpy(payload.data() + 8 * k++, &bits, 8);
    }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("error writing " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + " is empty");
  Checkpoint ck;
  try {
    const json header = json::parse(line);
    if (header.value("format", "") != "tspl-checkpoint")
      throw IoError(path.string() + " is not a checkpoint");
    if (header.value("version", 0) != kCheckpointVersion)
      throw IoError(path.string() + ": unsupported checkpoint version");
    ModelDescriptor d = descriptor_from_json(header.at("descriptor"));
    try {
      d.validate();
    } catch (const ValidationError& e) {
      throw IoError(path.string() + ": " + e.what());
    }
    ck.model = init_model(d, header.at("init_seed").get<std::uint64_t>());
    ck.meta.split_seed = header.at("split_seed").get<std::uint64_t>();
    ck.meta.shuffle_seed = header.at("shuffle_seed").get<std::uint64_t>();
    ck.meta.epoch = header.at("epoch").get<int>();
    ck.meta.val_accuracy = header.at("val_accuracy").get<double>();
    const auto& index = header.at("tensors");
    if (index.size() != ck.model.params.size())
      throw IoError(path.string() + ": tensor index does not match the descriptor");
    const std::size_t count = header.at("count").get<std::size_t>();
    std::vector<char> payload(count * 8);
    in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (static_cast<std::size_t>(in.gcount()) != payload.size())
      throw IoError(path.string() + ": truncated parameter payload");
    if (in.peek() != std::char_traits<char>::eof())
      throw IoError(path.string() + ": trailing bytes after payload");
    for (std::size_t t = 0; t < index.size(); ++t) {
      NamedTensor& p = ck.model.params[t];
      if (index[t].at("name").get<std::string>() != p.name ||
          index[t].at("shape").get<std::vector<std::size_t>>() != p.value.shape)
        throw IoError(path.string() + ": tensor " + std::to_string(t) + " is " +
                      index[t].at("name").get<std::string>() + ", expected " + p.name + " " +
                      shape_string(p.value.shape));
      const std::size_t off = index[t].at("offset").get<std::size_t>();
      if (off + p.value.size() > count) throw IoError(path.string() + ": tensor outside payload");
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, payload.data() + 8 * (off + i), 8);
        to_little_endian(bits);
        p.value.data[i] = std::bit_cast<double>(bits);
      }
    }
  } catch (const json::exception& e) {
    throw IoError("checkpoint " + path.string() + ": " + e.what());
  }
  return ck;
}

}  // namespace tspl
