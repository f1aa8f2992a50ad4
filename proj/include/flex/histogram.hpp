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

#include <span>
#include <string>
#include <vector>

#include "flex/graph.hpp"

namespace flex {

/// Counts of heuristic values over half-open buckets [edges[i], edges[i+1]).
/// CN and SP use unit-width integer buckets, PA power-of-two buckets. An
/// infinite value (unreachable SP) lands in a final [last, inf] bucket.
struct HeuristicHistogram {
  std::string heuristic;
  std::string source;  // train | valid | test | generated | free-form
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  double mean = 0.0;
};

HeuristicHistogram make_histogram(Heuristic h, std::span<const double> values,
                                  std::string source);

}  // namespace flex
