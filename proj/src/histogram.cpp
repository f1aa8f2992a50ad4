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

#include "flex/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flex/error.hpp"

namespace flex {

HeuristicHistogram make_histogram(Heuristic h, std::span<const double> values,
                                  std::string source) {
  HeuristicHistogram out;
  out.heuristic = to_string(h);
  out.source = std::move(source);
  out.total = values.size();

  double max_finite = 0.0;
  bool has_inf = false;
  double sum = 0.0;
  for (double v : values) {
    if (std::isnan(v) || v < 0) throw InputError("histogram: invalid value");
    if (std::isinf(v)) {
      has_inf = true;
    } else {
      max_finite = std::max(max_finite, v);
    }
    sum += v;
  }
  out.mean = values.empty() ? 0.0 : sum / static_cast<double>(values.size());

  out.edges.push_back(0.0);
  if (h == Heuristic::pa) {
    double e = 1.0;
    while (out.edges.back() <= max_finite) {
      out.edges.push_back(e);
      e *= 2.0;
    }
  } else {
    for (double e = 1.0; out.edges.back() <= max_finite; e += 1.0)
      out.edges.push_back(e);
  }
  if (has_inf) out.edges.push_back(std::numeric_limits<double>::infinity());
  out.counts.assign(out.edges.size() - 1, 0);

  for (double v : values) {
    if (std::isinf(v)) {
      ++out.counts.back();
      continue;
    }
    auto it = std::upper_bound(out.edges.begin(), out.edges.end(), v);
    ++out.counts[static_cast<std::size_t>(it - out.edges.begin()) - 1];
  }
  return out;
}

}  // namespace flex
