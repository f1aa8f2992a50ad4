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

#include <gtest/gtest.h>

#include <numeric>

#include "flex/subgraph.hpp"
#include "test_util.hpp"

namespace flex {
namespace {

using testing::make_graph;

std::vector<NodeId> sorted_nodes(const LabeledSubgraph& s) {
  auto n = s.node_map;
  std::sort(n.begin(), n.end());
  return n;
}

TEST(Extract, PathUnionOfOneHopBalls) {
  auto g = testing::path_graph(5);
  auto s = extract_enclosing_subgraph(g, {1, 3, LinkLabel::negative});
  EXPECT_EQ(sorted_nodes(s), (std::vector<NodeId>{0, 1, 2, 3, 4}));
  EXPECT_EQ(s.node_map[0], 1u);
  EXPECT_EQ(s.node_map[1], 3u);
  EXPECT_EQ(s.labels, (std::vector<std::uint8_t>{1, 1, 0, 0, 0}));
  // ascending global order after the targets
  EXPECT_EQ(s.node_map, (std::vector<NodeId>{1, 3, 0, 2, 4}));
}

TEST(Extract, TriangleInStarExcludesTargetEdge) {
  // center 0, leaves 1,2,3 plus an edge between leaves 1 and 2
  auto g = make_graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}});
  auto s = extract_enclosing_subgraph(g, {1, 2, LinkLabel::positive});
  EXPECT_EQ(s.node_map, (std::vector<NodeId>{1, 2, 0}));
  EXPECT_EQ(s.edges, (std::vector<LocalEdge>{{0, 2}, {1, 2}}));

  SubgraphOptions keep;
  keep.exclude_target = false;
  auto kept = extract_enclosing_subgraph(g, {1, 2, LinkLabel::positive}, keep);
  EXPECT_EQ(kept.edges.front(), (LocalEdge{0, 1}));
  EXPECT_EQ(kept.edges.size(), 3u);
}

TEST(Extract, StarWithoutLeafEdge) {
  auto g = testing::star_graph(3);
  auto s = extract_enclosing_subgraph(g, {1, 2, LinkLabel::negative});
  // the 1-hop balls of two leaves only meet at the center
  EXPECT_EQ(s.node_map, (std::vector<NodeId>{1, 2, 0}));
  EXPECT_EQ(s.edges, (std::vector<LocalEdge>{{0, 2}, {1, 2}}));
}

TEST(Extract, TwoHopsAndErrors) {
  auto g = testing::path_graph(7);
  SubgraphOptions two;
  two.hops = 2;
  auto s = extract_enclosing_subgraph(g, {3, 4, LinkLabel::positive}, two);
  EXPECT_EQ(sorted_nodes(s), (std::vector<NodeId>{1, 2, 3, 4, 5, 6}));
  EXPECT_THROW(extract_enclosing_subgraph(g, {3, 3}), InputError);
  EXPECT_THROW(extract_enclosing_subgraph(g, {3, 70}), InputError);
  SubgraphOptions zero;
  zero.hops = 0;
  EXPECT_THROW(extract_enclosing_subgraph(g, {0, 1}, zero), ConfigError);
}

TEST(Extract, CapKeepsTargetsAndIsDeterministic) {
  auto g = testing::complete_graph(40);
  SubgraphOptions cap;
  cap.max_nodes = 10;
  cap.seed = 5;
  auto a = extract_enclosing_subgraph(g, {7, 9}, cap);
  auto b = extract_enclosing_subgraph(g, {7, 9}, cap);
  EXPECT_EQ(a.size(), 10u);
  EXPECT_EQ(a.node_map[0], 7u);
  EXPECT_EQ(a.node_map[1], 9u);
  EXPECT_EQ(a, b);
  cap.seed = 6;
  auto c = extract_enclosing_subgraph(g, {7, 9}, cap);
  EXPECT_NE(a.node_map, c.node_map);
}

TEST(Extract, LabelsAndEdgesOnRandomGraphs) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + rng() % 40;
    auto edges = testing::random_edges(n, 0.15, rng);
    auto g = make_graph(n, edges);
    NodeId u = rng() % n, v = rng() % n;
    if (u == v) continue;
    auto s = extract_enclosing_subgraph(g, {u, v});
    EXPECT_EQ(std::accumulate(s.labels.begin(), s.labels.end(), 0), 2);
    EXPECT_EQ(s.node_map[0], u);
    EXPECT_EQ(s.node_map[1], v);
    for (auto [i, j] : s.edges) {
      EXPECT_TRUE(g.has_edge(s.node_map[i], s.node_map[j]));
      EXPECT_FALSE(i == 0 && j == 1);
    }
  }
}

TEST(Extract, ParallelMatchesSequential) {
  std::mt19937_64 rng(9);
  auto edges = testing::random_edges(60, 0.2, rng);
  auto g = make_graph(60, edges);
  std::vector<Edge> links;
  for (auto [u, v] : edges) links.push_back({u, v});
  SubgraphOptions opts;
  opts.max_nodes = 12;
  opts.seed = 77;
  auto batch = extract_enclosing_subgraphs(g, links, opts);
  for (std::size_t i = 0; i < links.size(); ++i)
    ASSERT_EQ(batch[i], extract_enclosing_subgraph(g, links[i], opts));
}

LabeledSubgraph triangle_block() {
  auto g = testing::complete_graph(3);
  SubgraphOptions keep;
  keep.exclude_target = false;
  return extract_enclosing_subgraph(g, {0, 1}, keep);
}

TEST(Batch, TwoTriangles) {
  LabeledSubgraphBatch batch({triangle_block(), triangle_block()});
  EXPECT_EQ(batch.total_nodes(), 6u);
  EXPECT_EQ(batch.block_sizes(), (std::vector<std::size_t>{3, 3}));
  auto a = batch.adjacency();
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      const bool same = (i < 3) == (j < 3);
      EXPECT_EQ(a.at(i, j), same && i != j ? 1.0 : 0.0);
    }
}

TEST(Batch, SingleAndOffsets) {
  auto g = testing::path_graph(10);
  auto s = extract_enclosing_subgraph(g, {2, 5});
  LabeledSubgraphBatch one({s});
  EXPECT_EQ(one.blocks().front(), s);
  EXPECT_EQ(one.offsets(), (std::vector<std::size_t>{0}));
  EXPECT_EQ(one.features(), s.features);

  auto b2 = extract_enclosing_subgraph(make_graph(2, {{0, 1}}), {0, 1});
  auto b5 = extract_enclosing_subgraph(g, {2, 4});
  auto b3 = extract_enclosing_subgraph(g, {0, 1});
  ASSERT_EQ(b2.size(), 2u);
  ASSERT_EQ(b5.size(), 5u);
  ASSERT_EQ(b3.size(), 3u);
  LabeledSubgraphBatch batch({b2, b5, b3});
  EXPECT_EQ(batch.offsets(), (std::vector<std::size_t>{0, 2, 7}));
  EXPECT_EQ(batch.target_rows(1), (std::vector<std::size_t>{1, 3, 8}));
  EXPECT_THROW(LabeledSubgraphBatch({}), InputError);
}

TEST(Batch, NoCrossBlockEntriesOnRandomBatches) {
  std::mt19937_64 rng(21);
  auto edges = testing::random_edges(80, 0.08, rng);
  auto g = make_graph(80, edges);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<LabeledSubgraph> blocks;
    const int k = 1 + rng() % 6;
    for (int b = 0; b < k; ++b) {
      NodeId u = rng() % 80, v = (u + 1 + rng() % 79) % 80;
      blocks.push_back(extract_enclosing_subgraph(g, {u, v}));
    }
    LabeledSubgraphBatch batch(blocks);
    auto a = batch.adjacency();
    auto block_of = [&](std::size_t row) {
      std::size_t b = 0;
      while (b + 1 < batch.count() && batch.offsets()[b + 1] <= row) ++b;
      return b;
    };
    for (std::size_t i = 0; i < batch.total_nodes(); ++i)
      for (std::size_t j = 0; j < batch.total_nodes(); ++j)
        if (block_of(i) != block_of(j)) ASSERT_EQ(a.at(i, j), 0.0);
    // packed dense blocks agree with the sparse form
    auto packed = batch.packed_adjacency();
    const auto& l = batch.layout();
    for (std::size_t b = 0; b < batch.count(); ++b)
      for (std::size_t i = 0; i < l.sizes[b]; ++i)
        for (std::size_t j = 0; j < l.sizes[b]; ++j)
          ASSERT_EQ(packed[l.entry_offsets[b] + i * l.sizes[b] + j],
                    a.at(l.node_offsets[b] + i, l.node_offsets[b] + j));
  }
}

}  // namespace
}  // namespace flex
