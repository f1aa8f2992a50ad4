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

#include "flex/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

namespace flex {

void Graph::check_node(NodeId u) const {
  if (u >= num_nodes_)
    throw InputError("node id " + std::to_string(u) + " out of range (n=" +
                     std::to_string(num_nodes_) + ")");
}

Graph Graph::from_edges(std::size_t num_nodes,
                        std::span<const std::pair<NodeId, NodeId>> edges,
                        Tensor features) {
  Graph g;
  g.num_nodes_ = num_nodes;
  std::vector<std::size_t> deg(num_nodes, 0);
  for (auto [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes)
      throw InputError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                       ") references a node outside [0," +
                       std::to_string(num_nodes) + ")");
    if (u == v) throw InputError("self-loop on node " + std::to_string(u));
    ++deg[u];
    ++deg[v];
  }
  g.offsets_.assign(num_nodes + 1, 0);
  for (std::size_t i = 0; i < num_nodes; ++i)
    g.offsets_[i + 1] = g.offsets_[i] + deg[i];
  g.neighbors_.resize(g.offsets_.back());
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (auto [u, v] : edges) {
    g.neighbors_[fill[u]++] = v;
    g.neighbors_[fill[v]++] = u;
  }
  for (std::size_t i = 0; i < num_nodes; ++i) {
    auto first = g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]);
    auto last = g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]);
    std::sort(first, last);
    if (auto dup = std::adjacent_find(first, last); dup != last)
      throw InputError("duplicate edge (" + std::to_string(i) + "," +
                       std::to_string(*dup) + ")");
  }
  if (features.empty()) features = Tensor(num_nodes, 1, 1.0);
  if (features.rows() != num_nodes)
    throw InputError("feature rows " + std::to_string(features.rows()) +
                     " != num_nodes " + std::to_string(num_nodes));
  g.features_ = std::move(features);
  return g;
}

Graph Graph::from_edges(std::size_t num_nodes, std::span<const Edge> edges,
                        Tensor features) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(edges.size());
  for (const auto& e : edges) pairs.emplace_back(e.u, e.v);
  return from_edges(num_nodes, pairs, std::move(features));
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  check_node(u);
  check_node(v);
  auto n = neighbors(u);
  return std::binary_search(n.begin(), n.end(), v);
}

std::vector<std::pair<NodeId, NodeId>> Graph::edge_list() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(edge_count());
  for (NodeId u = 0; u < num_nodes_; ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

Graph Graph::with_features(Tensor features) const {
  if (features.rows() != num_nodes_)
    throw InputError("feature rows " + std::to_string(features.rows()) +
                     " != num_nodes " + std::to_string(num_nodes_));
  Graph g = *this;
  g.features_ = std::move(features);
  return g;
}

Graph Graph::with_edges(std::span<const std::pair<NodeId, NodeId>> edges) const {
  return from_edges(num_nodes_, edges, features_);
}

CsrMatrix Graph::adjacency() const {
  CsrMatrix a;
  a.rows = a.cols = num_nodes_;
  a.row_ptr = offsets_;
  a.col = neighbors_;
  a.val.assign(neighbors_.size(), 1.0);
  return a;
}

std::size_t common_neighbors(const Graph& g, NodeId u, NodeId v) {
  g.check_node(u);
  g.check_node(v);
  auto a = g.neighbors(u);
  auto b = g.neighbors(v);
  std::size_t count = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      if (*i != u && *i != v) ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

std::uint32_t shortest_path_length(const Graph& g, NodeId u, NodeId v,
                                   bool exclude_edge) {
  g.check_node(u);
  g.check_node(v);
  if (u == v) return 0;
  std::vector<std::uint32_t> dist(g.num_nodes(), kUnreachable);
  std::queue<NodeId> frontier;
  dist[u] = 0;
  frontier.push(u);
  while (!frontier.empty()) {
    const NodeId x = frontier.front();
    frontier.pop();
    for (NodeId y : g.neighbors(x)) {
      if (exclude_edge && ((x == u && y == v) || (x == v && y == u))) continue;
      if (dist[y] != kUnreachable) continue;
      dist[y] = dist[x] + 1;
      if (y == v) return dist[y];
      frontier.push(y);
    }
  }
  return kUnreachable;
}

double preferential_attachment(const Graph& g, NodeId u, NodeId v) {
  g.check_node(u);
  g.check_node(v);
  return static_cast<double>(g.degree(u)) * static_cast<double>(g.degree(v));
}

std::string to_string(Heuristic h) {
  switch (h) {
    case Heuristic::cn: return "CN";
    case Heuristic::sp: return "SP";
    case Heuristic::pa: return "PA";
  }
  return "?";
}

Heuristic heuristic_from_string(const std::string& s) {
  std::string up;
  for (char c : s) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "CN") return Heuristic::cn;
  if (up == "SP") return Heuristic::sp;
  if (up == "PA") return Heuristic::pa;
  throw ConfigError("unknown heuristic '" + s + "' (expected CN, SP or PA)");
}

double heuristic_value(const Graph& g, Heuristic h, NodeId u, NodeId v) {
  switch (h) {
    case Heuristic::cn:
      return static_cast<double>(common_neighbors(g, u, v));
    case Heuristic::sp: {
      const auto d = shortest_path_length(g, u, v, true);
      return d == kUnreachable ? std::numeric_limits<double>::infinity()
                               : static_cast<double>(d);
    }
    case Heuristic::pa:
      return preferential_attachment(g, u, v);
  }
  return 0.0;
}

std::vector<double> heuristic_values(const Graph& g, Heuristic h,
                                     std::span<const Edge> edges) {
  for (const auto& e : edges) {
    g.check_node(e.u);
    g.check_node(e.v);
  }
  std::vector<double> out(edges.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(edges.size()); ++i)
    out[i] = heuristic_value(g, h, edges[i].u, edges[i].v);
  return out;
}

// --- ingestion -------------------------------------------------------------

std::pair<std::vector<std::pair<NodeId, NodeId>>, std::size_t> read_edge_list(
    std::istream& in, std::size_t min_nodes) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<std::pair<std::pair<NodeId, NodeId>, std::size_t>> seen;
  std::size_t max_id = 0;
  bool any = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    auto bad = [&](const std::string& why) {
      return InputError("edge list line " + std::to_string(lineno) + ": " + why);
    };
    if (tab == std::string::npos) throw bad("expected 'u<TAB>v'");
    unsigned long long u = 0, v = 0;
    try {
      std::size_t pu = 0, pv = 0;
      const std::string su = line.substr(0, tab), sv = line.substr(tab + 1);
      if (su.empty() || sv.empty() || su[0] == '-' || sv[0] == '-')
        throw std::invalid_argument("");
      u = std::stoull(su, &pu);
      v = std::stoull(sv, &pv);
      if (pu != su.size() || pv != sv.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw bad("node ids must be non-negative integers");
    }
    if (u > std::numeric_limits<NodeId>::max() - 1 ||
        v > std::numeric_limits<NodeId>::max() - 1)
      throw bad("node id too large");
    if (u == v) throw bad("self-loop on node " + std::to_string(u));
    const auto a = static_cast<NodeId>(u), b = static_cast<NodeId>(v);
    seen.push_back({a < b ? std::pair{a, b} : std::pair{b, a}, lineno});
    edges.emplace_back(a, b);
    max_id = std::max<std::size_t>(max_id, std::max(a, b));
    any = true;
  }
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 1; i < seen.size(); ++i)
    if (seen[i].first == seen[i - 1].first)
      throw InputError("edge list line " + std::to_string(seen[i].second) +
                       ": duplicate of line " +
                       std::to_string(seen[i - 1].second));
  return {std::move(edges), std::max(min_nodes, any ? max_id + 1 : 0)};
}

void write_edge_list(std::ostream& out, const Graph& g) {
  for (auto [u, v] : g.edge_list()) out << u << '\t' << v << '\n';
}

Tensor read_feature_csv(std::istream& in) {
  std::vector<double> data;
  std::size_t cols = 0, rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t c = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        data.push_back(std::stod(cell, &pos));
      } catch (const std::exception&) {
        throw InputError("feature CSV row " + std::to_string(rows + 1) +
                         ": non-numeric cell '" + cell + "'");
      }
      ++c;
    }
    if (rows == 0) cols = c;
    if (c != cols)
      throw InputError("feature CSV row " + std::to_string(rows + 1) + " has " +
                       std::to_string(c) + " columns, expected " +
                       std::to_string(cols));
    ++rows;
  }
  return Tensor(rows, cols, std::move(data));
}

void write_feature_csv(std::ostream& out, const Tensor& x) {
  out.precision(17);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (c) out << ',';
      out << x(r, c);
    }
    out << '\n';
  }
}

Tensor synthetic_features(const Graph& g, const std::string& mode) {
  const auto colon = mode.find(':');
  const std::string kind = mode.substr(0, colon);
  std::size_t width = 0;
  if (colon != std::string::npos) {
    try {
      width = std::stoul(mode.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad feature mode '" + mode + "'");
    }
  }
  if (width == 0) throw ConfigError("feature mode '" + mode + "' needs a width >= 1");
  Tensor x(g.num_nodes(), width, 0.0);
  if (kind == "constant") {
    x.fill(1.0);
  } else if (kind == "degree-onehot") {
    for (NodeId u = 0; u < g.num_nodes(); ++u)
      x(u, std::min(g.degree(u), width - 1)) = 1.0;
  } else {
    throw ConfigError("unknown feature mode '" + mode + "'");
  }
  return x;
}

Graph load_graph(const std::string& edge_path, const std::string& features) {
  std::ifstream ein(edge_path);
  if (!ein) throw DependencyError("cannot open edge list '" + edge_path + "'");
  auto [edges, n] = read_edge_list(ein);
  const bool synthetic = features.starts_with("degree-onehot:") ||
                         features.starts_with("constant:");
  if (synthetic) {
    Graph g = Graph::from_edges(n, edges);
    return g.with_features(synthetic_features(g, features));
  }
  std::ifstream fin(features);
  if (!fin) throw DependencyError("cannot open feature file '" + features + "'");
  Tensor x = read_feature_csv(fin);
  // isolated trailing nodes exist only in the feature file
  return Graph::from_edges(std::max(n, x.rows()), edges, std::move(x));
}

}  // namespace flex
