/*
 Copyright 2026 The dlqg Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Built-in scenarios, kept as JSON text so they go through the same loader
// as user configs. The files under samples/ are copies of these.

#pragma once

#include "dlqg/io.hpp"

#include <string>
#include <utility>
#include <vector>

namespace dlqg {

inline const std::vector<std::pair<std::string, std::string>>& demo_configs() {
  static const std::vector<std::pair<std::string, std::string>> demos = {
      {"scalar-2ctrl-k1", R"({
  "horizon": 6,
  "dims": {"d_x": 1, "d_u": [1, 1], "d_y": [1, 1]},
  "dynamics": {"A": 1.0, "B": [[1.0, 0.5]]},
  "observations": {"C": [1.0, 0.5]},
  "cost": {"Q": 1.0, "R": [[1.0, 0.0], [0.0, 1.0]]},
  "noise": {"sigma_x": 1.0, "sigma_w0": 1.0, "sigma_w": [1.0, 1.0]},
  "info_structure": {"kind": "symmetric_delay", "k": 1},
  "sim": {"seed": 7, "rollouts": 10000},
  "tune": {"budget": 2000, "restarts": 2, "seed": 1}
})"},
      {"symmetric-k2", R"({
  "horizon": 6,
  "dims": {"d_x": 2, "d_u": [1, 1], "d_y": [1, 1]},
  "dynamics": {"A": [[1.0, 0.2], [0.0, 0.9]], "B": [[1.0, 0.0], [0.0, 1.0]]},
  "observations": {"C": [[[1.0, 0.0]], [[0.0, 1.0]]]},
  "cost": {"Q": [[1.0, 0.0], [0.0, 1.0]], "R": [[1.0, 0.0], [0.0, 1.0]]},
  "noise": {"sigma_x": [[1.0, 0.0], [0.0, 1.0]],
            "sigma_w0": [[0.5, 0.0], [0.0, 0.5]],
            "sigma_w": [0.5, 0.5]},
  "info_structure": {"kind": "symmetric_delay", "k": 2},
  "sim": {"seed": 7, "rollouts": 10000},
  "tune": {"budget": 2000, "restarts": 2, "seed": 1}
})"},
      {"figure1-asymmetric", R"({
  "horizon": 5,
  "dims": {"d_x": 3, "d_u": [1, 1, 1], "d_y": [1, 1, 1]},
  "dynamics": {"A": [[0.9, 0.2, 0.0], [0.1, 0.9, 0.2], [0.0, 0.1, 0.9]],
               "B": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]},
  "observations": {"C": [[[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]], [[0.0, 0.0, 1.0]]]},
  "cost": {"Q": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
           "R": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]},
  "noise": {"sigma_x": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            "sigma_w0": [[0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.5]],
            "sigma_w": [0.5, 0.5, 0.5]},
  "info_structure": {"kind": "asymmetric_delay",
                     "delays": [[1, 1, 2], [1, 1, 1], [2, 1, 1]]},
  "sim": {"seed": 7, "rollouts": 10000},
  "tune": {"budget": 1000, "restarts": 1, "seed": 1}
})"},
      {"control-sharing", R"({
  "horizon": 6,
  "dims": {"d_x": 2, "d_u": [1, 1], "d_y": [1, 1]},
  "dynamics": {"A": [[1.0, 0.2], [0.0, 0.9]], "B": [[1.0, 0.0], [0.0, 1.0]]},
  "observations": {"C": [[[1.0, 0.0]], [[0.0, 1.0]]]},
  "cost": {"Q": [[1.0, 0.0], [0.0, 1.0]], "R": [[1.0, 0.0], [0.0, 1.0]]},
  "noise": {"sigma_x": [[1.0, 0.0], [0.0, 1.0]],
            "sigma_w0": [[0.5, 0.0], [0.0, 0.5]],
            "sigma_w": [0.5, 0.5]},
  "info_structure": {"kind": "control_sharing"},
  "sim": {"seed": 7, "rollouts": 10000},
  "tune": {"budget": 2000, "restarts": 2, "seed": 1}
})"},
      {"one-sided", R"({
  "horizon": 6,
  "dims": {"d_x": 2, "d_u": [1, 1], "d_y": [1, 1]},
  "dynamics": {"A": [[1.0, 0.2], [0.0, 0.9]], "B": [[1.0, 0.0], [0.0, 1.0]]},
  "observations": {"C": [[[1.0, 0.0]], [[0.0, 1.0]]]},
  "cost": {"Q": [[1.0, 0.0], [0.0, 1.0]], "R": [[1.0, 0.0], [0.0, 1.0]]},
  "noise": {"sigma_x": [[1.0, 0.0], [0.0, 1.0]],
            "sigma_w0": [[0.5, 0.0], [0.0, 0.5]],
            "sigma_w": [0.5, 0.5]},
  "info_structure": {"kind": "one_sided"},
  "sim": {"seed": 7, "rollouts": 10000},
  "tune": {"budget": 2000, "restarts": 2, "seed": 1}
})"},
  };
  return demos;
}

inline std::vector<std::string> demo_names() {
  std::vector<std::string> out;
  for (const auto& d : demo_configs()) out.push_back(d.first);
  return out;
}

/// Throws kConfig for an unknown name.
inline const std::string& demo_config_text(const std::string& name) {
  for (const auto& d : demo_configs())
    if (d.first == name) return d.second;
  throw Error(ErrorCode::kConfig, "unknown demo '" + name + "'", "demo");
}

inline Scenario demo_scenario(const std::string& name) {
  return scenario_from_json(parse_json_text(demo_config_text(name)));
}

}  // namespace dlqg
