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
#include <istream>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flex/kernels.hpp"
#include "flex/tensor.hpp"

namespace flex {

using NodeId = std::uint32_t;

enum class LinkLabel : std::uint8_t { negative = 0, positive = 1 };

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  LinkLabel label = LinkLabel::positive;

  /// (min, max) pair, the canonical key of an undirected edge.
  std::pair<NodeId, NodeId> key() const {
    return u < v ? std::pair{u, v} : std::pair{v, u};
  }
  bool positive() const { return label == LinkLabel::positive; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected, unweighted, simple graph with a dense node-feature matrix.
/// Immutable once built; rows of the adjacency are sorted ascending.
class Graph {
 public:
  Graph() = default;

  /// Builds from an undirected edge list. Self-loops and duplicate edges
  /// (in either orientation) raise InputError.
  static Graph from_edges(std::size_t num_nodes,
                          std::span<const std::pair<NodeId, NodeId>> edges,
                          Tensor features = {});
  static Graph from_edges(std::size_t num_nodes, std::span<const Edge> edges,
                          Tensor features = {});

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t edge_count() const noexcept { return neighbors_.size() / 2; }
  std::size_t feature_dim() const noexcept { return features_.cols(); }
  const Tensor& features() const noexcept { return features_; }

  std::span<const NodeId> neighbors(NodeId u) const {
    return std::span<const NodeId>(neighbors_).subspan(
        offsets_[u], offsets_[u + 1] - offsets_[u]);
  }
  std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }
  bool has_edge(NodeId u, NodeId v) const;

  /// Every undirected edge once, as (min, max), in ascending order.
  std::vector<std::pair<NodeId, NodeId>> edge_list() const;

  /// Same structure with a different feature matrix (row count must match).
  Graph with_features(Tensor features) const;
  /// Same node set and features, different edges.
  Graph with_edges(std::span<const std::pair<NodeId, NodeId>> edges) const;

  /// Adjacency as a weighted CSR with unit values.
  CsrMatrix adjacency() const;

  void check_node(NodeId u) const;

 private:
  std::size_t num_nodes_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> neighbors_;
  Tensor features_;
};

// --- link heuristics -------------------------------------------------------

/// Sentinel distance for disconnected endpoints; compares above every
/// finite threshold.
inline constexpr std::uint32_t kUnreachable =
    std::numeric_limits<std::uint32_t>::max();

std::size_t common_neighbors(const Graph& g, NodeId u, NodeId v);

/// BFS hop distance; with exclude_edge set and (u, v) present, the search
/// runs as if that single edge were removed.
std::uint32_t shortest_path_length(const Graph& g, NodeId u, NodeId v,
                                   bool exclude_edge);

double preferential_attachment(const Graph& g, NodeId u, NodeId v);

enum class Heuristic { cn, sp, pa };

std::string to_string(Heuristic h);
Heuristic heuristic_from_string(const std::string& s);

/// Heuristic as a real (SP: unreachable maps to +infinity). SP always uses
/// the exclude-edge convention.
double heuristic_value(const Graph& g, Heuristic h, NodeId u, NodeId v);

/// heuristic_value over many pairs; OpenMP-parallel over pairs.
std::vector<double> heuristic_values(const Graph& g, Heuristic h,
                                     std::span<const Edge> edges);

// --- ingestion -------------------------------------------------------------

/// Parses "u<TAB>v" lines (0-based). Returns the edges and the node count
/// (max id + 1, or `min_nodes` when larger). Errors carry line numbers.
std::pair<std::vector<std::pair<NodeId, NodeId>>, std::size_t> read_edge_list(
    std::istream& in, std::size_t min_nodes = 0);
void write_edge_list(std::ostream& out, const Graph& g);

Tensor read_feature_csv(std::istream& in);
void write_feature_csv(std::ostream& out, const Tensor& x);

/// Builds features for a graph from a mode string: "degree-onehot:<D>"
/// (degrees >= D-1 share the last column) or "constant:<d>".
Tensor synthetic_features(const Graph& g, const std::string& mode);

/// Loads a graph from an edge-list file and a feature source, which is either
/// a CSV path or a synthetic mode string.
Graph load_graph(const std::string& edge_path, const std::string& features);

}  // namespace flex
