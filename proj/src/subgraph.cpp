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

#include "flex/subgraph.hpp"

#include <algorithm>
#include <queue>
#include <unordered_map>

#include "flex/rng.hpp"

namespace flex {

Tensor LabeledSubgraph::dense_adjacency() const {
  Tensor a(size(), size(), 0.0);
  for (auto [i, j] : edges) a(i, j) = a(j, i) = 1.0;
  return a;
}

namespace {

void collect_ball(const Graph& g, NodeId root, std::uint32_t hops,
                  std::vector<std::uint32_t>& depth,
                  std::vector<NodeId>& touched) {
  std::queue<NodeId> q;
  if (depth[root] == kUnreachable) touched.push_back(root);
  depth[root] = 0;
  q.push(root);
  while (!q.empty()) {
    const NodeId x = q.front();
    q.pop();
    if (depth[x] >= hops) continue;
    for (NodeId y : g.neighbors(x)) {
      if (depth[y] != kUnreachable && depth[y] <= depth[x] + 1) continue;
      if (depth[y] == kUnreachable) touched.push_back(y);
      depth[y] = depth[x] + 1;
      q.push(y);
    }
  }
}

}  // namespace

LabeledSubgraph extract_enclosing_subgraph(const Graph& g, const Edge& e,
                                           const SubgraphOptions& opts) {
  g.check_node(e.u);
  g.check_node(e.v);
  if (e.u == e.v) throw InputError("link endpoints must differ");
  if (opts.hops < 1) throw ConfigError("subgraph hops must be >= 1");
  if (opts.max_nodes < 2) throw ConfigError("subgraph max_nodes must be >= 2");

  // depth tracking over touched nodes only; a fresh vector per call keeps
  // the function reentrant for the parallel extractor
  std::vector<std::uint32_t> du(g.num_nodes(), kUnreachable);
  std::vector<std::uint32_t> dv(g.num_nodes(), kUnreachable);
  std::vector<NodeId> touched_u, touched_v;
  collect_ball(g, e.u, opts.hops, du, touched_u);
  collect_ball(g, e.v, opts.hops, dv, touched_v);

  std::vector<NodeId> others;
  others.reserve(touched_u.size() + touched_v.size());
  for (NodeId x : touched_u)
    if (x != e.u && x != e.v) others.push_back(x);
  for (NodeId x : touched_v)
    if (x != e.u && x != e.v && du[x] == kUnreachable) others.push_back(x);
  std::sort(others.begin(), others.end());

  if (others.size() + 2 > opts.max_nodes) {
    const auto [a, b] = e.key();
    Rng rng = make_substream(opts.seed, (std::uint64_t{a} << 32) | b);
    std::shuffle(others.begin(), others.end(), rng);
    others.resize(opts.max_nodes - 2);
    std::sort(others.begin(), others.end());
  }

  LabeledSubgraph s;
  s.link = e;
  s.hop_k = opts.hops;
  s.node_map.reserve(others.size() + 2);
  s.node_map.push_back(e.u);
  s.node_map.push_back(e.v);
  s.node_map.insert(s.node_map.end(), others.begin(), others.end());

  std::unordered_map<NodeId, std::uint32_t> local;
  local.reserve(s.node_map.size() * 2);
  for (std::uint32_t i = 0; i < s.node_map.size(); ++i) local[s.node_map[i]] = i;

  for (std::uint32_t i = 0; i < s.node_map.size(); ++i) {
    for (NodeId y : g.neighbors(s.node_map[i])) {
      auto it = local.find(y);
      if (it == local.end() || it->second <= i) continue;
      const std::uint32_t j = it->second;
      if (opts.exclude_target && i == 0 && j == 1) continue;
      s.edges.emplace_back(i, j);
    }
  }
  std::sort(s.edges.begin(), s.edges.end());

  const std::size_t d = g.feature_dim();
  s.features = Tensor(s.size(), d);
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto src = g.features().row(s.node_map[i]);
    std::copy(src.begin(), src.end(), s.features.data() + i * d);
  }
  s.labels.assign(s.size(), 0);
  s.labels[0] = s.labels[1] = 1;
  return s;
}

std::vector<LabeledSubgraph> extract_enclosing_subgraphs(
    const Graph& g, std::span<const Edge> links, const SubgraphOptions& opts) {
  std::vector<LabeledSubgraph> out(links.size());
  // exceptions must not escape an OpenMP region
  std::vector<std::string> errors(links.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(links.size()); ++i) {
    try {
      out[i] = extract_enclosing_subgraph(g, links[i], opts);
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  }
  for (const auto& err : errors)
    if (!err.empty()) throw InputError(err);
  return out;
}

LabeledSubgraphBatch::LabeledSubgraphBatch(std::vector<LabeledSubgraph> blocks)
    : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw InputError("cannot batch an empty subgraph list");
  const std::size_t d = blocks_.front().features.cols();
  std::vector<std::size_t> sizes;
  sizes.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    if (b.features.cols() != d)
      throw ShapeError("make_batch", "feature widths differ across blocks");
    sizes.push_back(b.size());
  }
  layout_ = BlockLayout::from_sizes(std::move(sizes));
}

std::vector<LinkLabel> LabeledSubgraphBatch::batch_labels() const {
  std::vector<LinkLabel> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(b.link.label);
  return out;
}

Tensor LabeledSubgraphBatch::features() const {
  const std::size_t d = blocks_.front().features.cols();
  Tensor x(total_nodes(), d);
  for (std::size_t b = 0; b < count(); ++b)
    std::copy(blocks_[b].features.vec().begin(), blocks_[b].features.vec().end(),
              x.data() + layout_.node_offsets[b] * d);
  return x;
}

Tensor LabeledSubgraphBatch::labels() const {
  Tensor l(total_nodes(), 1);
  for (std::size_t b = 0; b < count(); ++b)
    for (std::size_t i = 0; i < blocks_[b].size(); ++i)
      l[layout_.node_offsets[b] + i] = blocks_[b].labels[i];
  return l;
}

std::vector<std::size_t> LabeledSubgraphBatch::target_rows(std::uint32_t which) const {
  std::vector<std::size_t> rows;
  rows.reserve(count());
  for (std::size_t b = 0; b < count(); ++b)
    rows.push_back(layout_.node_offsets[b] + which);
  return rows;
}

CsrMatrix LabeledSubgraphBatch::adjacency() const {
  const std::size_t n = total_nodes();
  std::vector<std::vector<std::uint32_t>> rows(n);
  for (std::size_t b = 0; b < count(); ++b) {
    const auto off = static_cast<std::uint32_t>(layout_.node_offsets[b]);
    for (auto [i, j] : blocks_[b].edges) {
      rows[off + i].push_back(off + j);
      rows[off + j].push_back(off + i);
    }
  }
  CsrMatrix a;
  a.rows = a.cols = n;
  a.row_ptr.assign(n + 1, 0);
  for (std::size_t r = 0; r < n; ++r) {
    std::sort(rows[r].begin(), rows[r].end());
    a.row_ptr[r + 1] = a.row_ptr[r] + rows[r].size();
    a.col.insert(a.col.end(), rows[r].begin(), rows[r].end());
  }
  a.val.assign(a.col.size(), 1.0);
  return a;
}

std::vector<double> LabeledSubgraphBatch::packed_adjacency() const {
  std::vector<double> out(layout_.total_entries, 0.0);
  for (std::size_t b = 0; b < count(); ++b) {
    const std::size_t nb = layout_.sizes[b];
    double* ab = out.data() + layout_.entry_offsets[b];
    for (auto [i, j] : blocks_[b].edges) ab[i * nb + j] = ab[j * nb + i] = 1.0;
  }
  return out;
}

}  // namespace flex
