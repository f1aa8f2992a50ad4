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

#include <cstdint>
#include <string>
#include <vector>

#include "flex/graph.hpp"
#include "flex/rng.hpp"

namespace flex {

/// Edge list of a stochastic block model with an arbitrary symmetric
/// block-probability matrix.
std::vector<std::pair<NodeId, NodeId>> sbm_edges(
    const std::vector<std::size_t>& sizes,
    const std::vector<std::vector<double>>& prob, Rng& rng);

/// Barabási–Albert: a complete seed graph on m nodes, then every further
/// node attaches to m distinct existing nodes chosen proportionally to
/// degree. Edge count is m(m-1)/2 + m(n-m).
std::vector<std::pair<NodeId, NodeId>> barabasi_albert_edges(std::size_t n,
                                                             std::size_t m,
                                                             Rng& rng);

std::vector<std::pair<NodeId, NodeId>> erdos_renyi_edges(std::size_t n,
                                                         double p, Rng& rng);

/// Per-node features drawn around a random per-community centre:
/// x = centre[c] * separation + N(0, 1).
Tensor community_features(const std::vector<std::uint32_t>& community,
                          std::size_t dim, Rng& rng, double separation = 1.5);

enum class Family { sbm, ba, er };
std::string to_string(Family f);
Family family_from_string(const std::string& s);

struct SyntheticGraphSpec {
  Family family = Family::sbm;
  std::size_t n = 100;
  // sbm
  std::size_t blocks = 2;
  double p_in = 0.5;
  double p_out = 0.01;
  /// When non-empty, the blocks are arranged in disjoint rings of these
  /// lengths (summing to `blocks`) and p_out applies only between
  /// neighbouring blocks of a ring.
  std::vector<std::size_t> rings;
  // ba
  std::size_t m = 2;
  // er
  double p = 0.05;
  /// "community-gaussian:<d>" (SBM only), "degree-onehot:<D>" or
  /// "constant:<d>".
  std::string features = "constant:1";
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticGraph {
  Graph graph;
  /// Block of every node (all zero for BA and ER).
  std::vector<std::uint32_t> community;
  std::vector<std::string> warnings;
};

SyntheticGraph synthesize(const SyntheticGraphSpec& spec);

}  // namespace flex
