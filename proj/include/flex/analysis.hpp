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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flex/flex.hpp"
#include "flex/histogram.hpp"
#include "flex/sivi.hpp"
#include "flex/split.hpp"
#include "flex/subgraph.hpp"

namespace flex {

/// CN of the target link inside each generated block.
HeuristicHistogram cn_distribution(const GeneratedSample& s,
                                   std::string source = "generated");
/// Same over original labeled subgraphs (the target edge is never counted).
HeuristicHistogram cn_distribution(const std::vector<LabeledSubgraph>& subs,
                                   std::string source);

/// The graph the split was cut from: observed edges plus held-out positives.
Graph full_graph(const DatasetSplit& split);

/// Histogram of one part's positive links, valued on the full graph (the
/// values that placed them in their bucket).
HeuristicHistogram part_histogram(const DatasetSplit& split, Part part, Heuristic h);

struct AlignmentReport {
  std::string heuristic;
  double train_mean = 0;
  double valid_mean = 0;
  double generated_mean = 0;
  double generated_gap = 0;  // |generated - valid|
  double train_gap = 0;      // |train - valid|
  /// train_gap / generated_gap; empty when generated_gap is 0 ("exact").
  std::optional<double> improvement;

  bool generated_closer() const { return generated_gap < train_gap; }
  std::string improvement_str() const;
};

AlignmentReport alignment_report(const HeuristicHistogram& train,
                                 const HeuristicHistogram& valid,
                                 const HeuristicHistogram& generated);

struct DegreeBiasPoint {
  std::size_t nodes = 0;
  double mean_cn = 0;  // mean CN over all unordered node pairs of the block
};

struct DegreeBiasScan {
  std::vector<DegreeBiasPoint> points;
  double slope = 0;
  double intercept = 0;
};

/// Least-squares line through (x, y). A zero-variance x gives slope 0 and
/// the mean of y as intercept.
std::pair<double, double> least_squares_fit(std::span<const double> x,
                                            std::span<const double> y);

DegreeBiasScan degree_bias_scan(const GeneratedSample& s);
DegreeBiasScan degree_bias_scan(const std::vector<GeneratedSample>& samples);

enum class SweepParam { gamma, lr_gnn, alpha };
std::string to_string(SweepParam p);
SweepParam sweep_param_from_string(const std::string& s);
void set_sweep_param(FlexConfig& cfg, SweepParam p, double value);

inline const std::vector<double> kGammaGrid{0.0, 0.25, 0.5, 0.75, 0.9, 0.9999};
inline const std::vector<double> kLrGrid{1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7};

/// Pretrained inputs of one seed.
struct SweepCase {
  std::uint64_t seed = 0;
  const DatasetSplit* split = nullptr;
  const GcnParams* gnn = nullptr;
  const SiviParams* ggm = nullptr;
};

struct SweepPoint {
  double value = 0;
  std::vector<double> test_hits;  // one per successful case
  std::vector<double> valid_hits;
  double mean = 0;
  double stddev = 0;
  std::vector<std::string> errors;
};

struct SweepResult {
  SweepParam param = SweepParam::gamma;
  std::vector<SweepPoint> points;
};

/// flex_tune per grid point per case, parallel over all runs. A failing run
/// is recorded on its point and the sweep continues.
SweepResult run_sweep(SweepParam param, const std::vector<double>& grid,
                      const FlexConfig& base, const std::vector<SweepCase>& cases);

void write_histogram_csv(std::ostream& out, const std::vector<HeuristicHistogram>& hs);
void write_degree_bias_csv(std::ostream& out, const DegreeBiasScan& scan);
void write_sweep_csv(std::ostream& out, const SweepResult& r);

}  // namespace flex
