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
#include <span>
#include <utility>
#include <vector>

#include "flex/graph.hpp"
#include "flex/kernels.hpp"
#include "flex/tensor.hpp"

namespace flex {

using LocalEdge = std::pair<std::uint32_t, std::uint32_t>;

/// k-hop enclosing subgraph of a link with zero-one node labels. Local index
/// 0 is the image of e.u, index 1 the image of e.v; the remaining nodes
/// follow in ascending global id.
struct LabeledSubgraph {
  std::vector<NodeId> node_map;
  std::vector<LocalEdge> edges;  // (i < j), sorted
  Tensor features;
  std::vector<std::uint8_t> labels;
  std::uint32_t hop_k = 1;
  Edge link;

  std::size_t size() const noexcept { return node_map.size(); }
  static constexpr std::uint32_t target_u = 0;
  static constexpr std::uint32_t target_v = 1;

  /// Dense symmetric 0/1 adjacency (size x size).
  Tensor dense_adjacency() const;
  friend bool operator==(const LabeledSubgraph&, const LabeledSubgraph&) = default;
};

struct SubgraphOptions {
  std::uint32_t hops = 1;
  std::size_t max_nodes = 1000;
  /// Drop the (u, v) edge from the local adjacency when it exists.
  bool exclude_target = true;
  std::uint64_t seed = 0;
};

/// Union of the k-hop balls of e.u and e.v. When the union exceeds
/// max_nodes, non-target nodes are subsampled uniformly (seeded by
/// opts.seed and the edge itself, so extraction order does not matter).
LabeledSubgraph extract_enclosing_subgraph(const Graph& g, const Edge& e,
                                           const SubgraphOptions& opts = {});

/// Extraction over many links; OpenMP-parallel, identical to calling
/// extract_enclosing_subgraph for each link in turn.
std::vector<LabeledSubgraph> extract_enclosing_subgraphs(
    const Graph& g, std::span<const Edge> links, const SubgraphOptions& opts);

/// Block-diagonal concatenation of labeled subgraphs.
class LabeledSubgraphBatch {
 public:
  explicit LabeledSubgraphBatch(std::vector<LabeledSubgraph> blocks);

  const std::vector<LabeledSubgraph>& blocks() const noexcept { return blocks_; }
  const BlockLayout& layout() const noexcept { return layout_; }
  const std::vector<std::size_t>& block_sizes() const noexcept {
    return layout_.sizes;
  }
  const std::vector<std::size_t>& offsets() const noexcept {
    return layout_.node_offsets;
  }
  std::size_t total_nodes() const noexcept { return layout_.total_nodes; }
  std::size_t count() const noexcept { return blocks_.size(); }
  std::vector<LinkLabel> batch_labels() const;

  /// Stacked node features (total_nodes x d).
  Tensor features() const;
  /// Stacked zero-one labels (total_nodes x 1).
  Tensor labels() const;
  /// Global rows of the two target endpoints of every block.
  std::vector<std::size_t> target_rows(std::uint32_t which) const;
  /// Block-diagonal 0/1 adjacency over all batched nodes.
  CsrMatrix adjacency() const;
  /// Packed per-block dense 0/1 adjacency (layout().total_entries values).
  std::vector<double> packed_adjacency() const;

 private:
  std::vector<LabeledSubgraph> blocks_;
  BlockLayout layout_;
};

}  // namespace flex
