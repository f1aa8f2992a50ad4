/*
 * Copyright 2026 The FlexLP Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flex/analysis.hpp"
#include "flex/flex.hpp"
#include "flex/gnn.hpp"
#include "flex/sivi.hpp"
#include "flex/split.hpp"
#include "flex/synth.hpp"

namespace flex::cli {

/// Layered run configuration: built-in defaults, then a JSON file, then
/// "section.key=value" overrides. Unknown sections or keys and values of the
/// wrong type raise ConfigError.
class RunConfig {
 public:
  RunConfig();
  static RunConfig load(const std::optional<std::string>& path,
                        const std::vector<std::string>& overrides);

  void merge(const nlohmann::json& j, const std::string& origin);
  void set(const std::string& assignment);

  const nlohmann::json& values() const noexcept { return j_; }
  std::uint64_t seed() const;

  SyntheticGraphSpec synth() const;
  SplitSpec split() const;
  TrainConfig gnn() const;
  GgmTrainConfig ggm() const;
  NoiseSpec ggm_noise() const;
  /// Flex config without tau and noise_dim, which come from the pretrained
  /// generator.
  FlexConfig flex() const;
  std::optional<double> flex_tau() const;
  double flex_tau_offset() const;
  Ablation ablation() const;

  double analyze_gamma() const;
  double analyze_scan_low() const;
  double analyze_scan_high() const;

  SweepParam sweep_param() const;
  std::vector<double> sweep_grid() const;
  std::vector<std::uint64_t> sweep_seeds() const;

 private:
  nlohmann::json j_;
};

}  // namespace flex::cli
