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

// Helpers shared by the unit and acceptance suites: tiny graph builders,
// brute-force oracles and a central finite-difference gradient checker.
// Nothing here calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "flex/autodiff.hpp"
#include "flex/graph.hpp"

namespace flex::testing {

using EdgePairs = std::vector<std::pair<NodeId, NodeId>>;

inline Graph make_graph(std::size_t n, EdgePairs edges, Tensor features = {}) {
  return Graph::from_edges(n, edges, std::move(features));
}

inline Graph path_graph(std::size_t n) {
  EdgePairs e;
  for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make_graph(n, e);
}

inline Graph complete_graph(std::size_t n) {
  EdgePairs e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return make_graph(n, e);
}

/// Star with center 0 and leaves 1..leaves.
inline Graph star_graph(std::size_t leaves) {
  EdgePairs e;
  for (NodeId i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return make_graph(leaves + 1, e);
}

inline EdgePairs random_edges(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  EdgePairs e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (coin(rng)) e.emplace_back(i, j);
  return e;
}

/// Adjacency sets, the brute-force view of a graph.
inline std::vector<std::set<NodeId>> adjacency_sets(std::size_t n,
                                                    const EdgePairs& edges) {
  std::vector<std::set<NodeId>> adj(n);
  for (auto [u, v] : edges) {
    adj[u].insert(v);
    adj[v].insert(u);
  }
  return adj;
}

inline std::size_t brute_cn(const std::vector<std::set<NodeId>>& adj, NodeId u,
                            NodeId v) {
  std::size_t c = 0;
  for (NodeId w = 0; w < adj.size(); ++w)
    if (w != u && w != v && adj[u].count(w) && adj[v].count(w)) ++c;
  return c;
}

/// Full BFS distances from u after deleting edge (u, v) when requested.
inline double brute_sp(std::vector<std::set<NodeId>> adj, NodeId u, NodeId v,
                       bool exclude) {
  if (exclude) {
    adj[u].erase(v);
    adj[v].erase(u);
  }
  std::vector<int> dist(adj.size(), -1);
  std::queue<NodeId> q;
  dist[u] = 0;
  q.push(u);
  while (!q.empty()) {
    NodeId x = q.front();
    q.pop();
    for (NodeId y : adj[x])
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        q.push(y);
      }
  }
  return dist[v] < 0 ? std::numeric_limits<double>::infinity()
                     : static_cast<double>(dist[v]);
}

inline double brute_pa(const std::vector<std::set<NodeId>>& adj, NodeId u, NodeId v) {
  return static_cast<double>(adj[u].size() * adj[v].size());
}

inline Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng,
                            double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Tensor t(r, c);
  for (auto& v : t.values()) v = nd(rng);
  return t;
}

/// Max relative error between the analytic gradient of `loss` w.r.t. every
/// entry of `params` and central finite differences with step h. `loss`
/// must be a pure function of the parameter values.
inline double max_fd_relative_error(
    ParamList& params, const std::function<double(const ParamList&)>& loss,
    const std::vector<Tensor>& analytic, double h = 1e-5) {
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p].value.size(); ++i) {
      const double orig = params[p].value[i];
      params[p].value[i] = orig + h;
      const double up = loss(params);
      params[p].value[i] = orig - h;
      const double down = loss(params);
      params[p].value[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[p][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-3});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace flex::testing
