// core/src/json_fields.hpp

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

#ifndef TSPL_SRC_JSON_FIELDS_HPP_
#define TSPL_SRC_JSON_FIELDS_HPP_

#include <nlohmann/json.hpp>

#include "tspl/model.hpp"
#include "tspl/signal.hpp"
#include "tspl/trainer.hpp"

namespace tspl {

inline nlohmann::json to_json(const ModelDescriptor& d) {
  nlohmann::json stages = nlohmann::json::array();
  for (const ConvStage& s : d.stages)
    stages.push_back({{"channels", s.channels}, {"kernel", s.kernel}, {"stride", s.stride}});
  return {{"input_length", d.input_length},
          {"stages", stages},
          {"hidden", d.hidden},
          {"num_classes", d.num_classes}};
}

inline ModelDescriptor descriptor_from_json(const nlohmann::json& j) {
  ModelDescriptor d;
  d.input_length = j.at("input_length").get<std::size_t>();
  d.stages.clear();
  for (const auto& s : j.at("stages"))
    d.stages.push_back({s.at("channels").get<std::size_t>(), s.at("kernel").get<std::size_t>(),
                        s.at("stride").get<std::size_t>()});
  d.hidden = j.at("hidden").get<std::size_t>();
  d.num_classes = j.at("num_classes").get<std::size_t>();
  return d;
}

inline nlohmann::json to_json(const DatasetSpec& s) {
  return {{"n_per_class", s.n_per_class},
          {"ratios", s.ratios},
          {"length", s.length},
          {"seed", s.seed},
          {"spec_hash", s.hash()}};
}

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"lr_factor", c.lr_factor},
          {"lr_patience", c.lr_patience},
          {"min_lr", c.min_lr},
          {"trials", c.trials},
          {"base_seed", c.base_seed},
          {"shuffle", c.shuffle},
          {"validate_on_pseudo", c.validate_on_pseudo},
          {"model", to_json(c.model)},
          {"hash", c.hash()}};
}

}  // namespace tspl

#endif  // TSPL_SRC_JSON_FIELDS_HPP_
