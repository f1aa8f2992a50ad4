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

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "flex/graph.hpp"
#include "flex/histogram.hpp"

namespace flex {

enum class Direction { forward, backward };

std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

struct SplitSpec {
  Heuristic heuristic = Heuristic::cn;
  Direction direction = Direction::forward;
  double t1 = 1;
  double t2 = 2;
  /// Negatives per positive in each bucket.
  double neg_ratio = 1.0;
  /// Floor on negatives per bucket, so Hits@K stays defined for small
  /// buckets. Zero disables the floor.
  std::size_t min_negatives = 0;
  std::uint64_t seed = 0;
  /// Evaluate on the full original adjacency instead of the training-visible
  /// one (parity experiments only; leaks held-out structure).
  bool full_adjacency = false;

  /// Raises ConfigError on negative or non-integral thresholds etc.
  void validate() const;
};

/// Half-open heuristic range [lo, hi).
struct Bucket {
  double lo = 0;
  double hi = 0;
  /// The unbounded top bucket also holds +inf (unreachable SP).
  bool contains(double x) const {
    return x >= lo && (x < hi || hi == std::numeric_limits<double>::infinity());
  }
};

enum class Part { train = 0, valid = 1, test = 2 };
std::string to_string(Part p);

/// Bucket ranges of a spec. The two thresholds are read as an unordered
/// pair lo < hi: forward puts low values in train, backward in test, and
/// valid is always [lo, hi). Thresholds given larger-first for a forward
/// split (or smaller-first for a backward one) are reordered, and
/// `threshold_note` says so.
std::array<Bucket, 3> bucket_ranges(const SplitSpec& spec);
/// Human-readable account of how the thresholds were interpreted.
std::string threshold_note(const SplitSpec& spec);

struct DatasetSplit {
  SplitSpec spec;
  std::array<std::vector<Edge>, 3> pos;
  std::array<std::vector<Edge>, 3> neg;
  /// Nodes and features of the source graph with train positives only.
  Graph observed;
  /// Adjacency used for message passing at evaluation time: `observed`,
  /// or the source graph when spec.full_adjacency is set.
  Graph evaluation;

  const std::vector<Edge>& train_pos() const { return pos[0]; }
  const std::vector<Edge>& valid_pos() const { return pos[1]; }
  const std::vector<Edge>& test_pos() const { return pos[2]; }
  const std::vector<Edge>& train_neg() const { return neg[0]; }
  const std::vector<Edge>& valid_neg() const { return neg[1]; }
  const std::vector<Edge>& test_neg() const { return neg[2]; }
};

/// Buckets every edge of `g` by its heuristic on `g` and samples negatives.
/// An empty positive bucket raises DegenerateSplitError.
DatasetSplit generate_split(const Graph& g, const SplitSpec& spec);

/// Uniformly sampled distinct non-edges (u < v), deterministic in seed.
std::vector<Edge> sample_negatives(const Graph& g, std::size_t count,
                                   std::uint64_t seed);

struct SplitViolation {
  Edge edge;
  std::string what;
};

struct SplitReport {
  std::array<std::size_t, 3> pos_counts{};
  std::array<std::size_t, 3> neg_counts{};
  std::array<HeuristicHistogram, 3> histograms;
  std::vector<SplitViolation> violations;
  std::string note;
};

/// Recomputes every positive's heuristic with an independent brute-force
/// implementation and checks bucket membership, disjointness, negatives
/// and the observed graph. Never throws on violations.
SplitReport audit_split(const Graph& g, const DatasetSplit& split);
/// audit_split, raising ValidationError listing offending edges.
SplitReport verify_split(const Graph& g, const DatasetSplit& split);

void save_split(const std::string& path, const DatasetSplit& split);
/// Loads and re-verifies against `g`.
DatasetSplit load_split(const std::string& path, const Graph& g);

}  // namespace flex
