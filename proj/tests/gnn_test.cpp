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

#include <set>

#include "flex/adam.hpp"
#include "flex/gnn.hpp"
#include "flex/synth.hpp"
#include "test_util.hpp"

namespace flex {
namespace {

using testing::make_graph;

// Sorts all scores descending and takes the k-th negative as threshold.
double brute_hits(std::vector<double> pos, std::vector<double> neg, std::size_t k) {
  std::vector<std::pair<double, bool>> all;
  for (double s : pos) all.push_back({s, true});
  for (double s : neg) all.push_back({s, false});
  std::sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.first > b.first; });
  std::size_t seen = 0;
  double threshold = 0;
  for (auto& [s, is_pos] : all)
    if (!is_pos && ++seen == k) {
      threshold = s;
      break;
    }
  std::size_t hits = 0;
  for (double s : pos) hits += s > threshold;
  return static_cast<double>(hits) / static_cast<double>(pos.size());
}

TEST(NormalizeAdjacency, Examples) {
  auto one = normalize_adjacency(make_graph(1, {}).adjacency());
  EXPECT_EQ(one.nnz(), 1u);
  EXPECT_EQ(one.at(0, 0), 1.0);
  auto edge = normalize_adjacency(make_graph(2, {{0, 1}}).adjacency());
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(edge.at(i, j), 0.5);
  // 2-regular cycle: rows sum to one
  auto cycle = normalize_adjacency(make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}}).adjacency());
  for (std::size_t r = 0; r < 5; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < 5; ++c) s += cycle.at(r, c);
    EXPECT_NEAR(s, 1.0, 1e-15);
  }
}

TEST(GcnForward, ZeroWeightsAndSingleNode) {
  Rng rng(1);
  auto p = init_gcn(3, 4, 2, 0.0, rng);
  for (auto& q : p.params) q.value.fill(0.0);
  auto g = testing::path_graph(4).with_features(Tensor(4, 3, 1.0));
  EXPECT_EQ(gcn_embed(p, g), Tensor(4, 4, 0.0));

  auto single = init_gcn(3, 2, 1, 0.0, rng);
  Tensor x = Tensor::from_rows({{1.0, -2.0, 0.5}});
  auto h = gcn_embed(single, make_graph(1, {}, x));
  for (std::size_t j = 0; j < 2; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < 3; ++i) s += x(0, i) * single.params[0].value(i, j);
    EXPECT_NEAR(h(0, j), s, 1e-15);
  }
}

TEST(GcnForward, PermutationEquivariant) {
  std::mt19937_64 rng(2);
  auto edges = testing::random_edges(10, 0.3, rng);
  Tensor x = testing::random_tensor(10, 4, rng);
  auto g = make_graph(10, edges, x);
  std::vector<NodeId> perm(10);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  testing::EdgePairs pe;
  for (auto [u, v] : edges) pe.emplace_back(perm[u], perm[v]);
  Tensor px(10, 4);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 4; ++j) px(perm[i], j) = x(i, j);
  auto pg = make_graph(10, pe, px);
  Rng init(3);
  auto p = init_gcn(4, 8, 3, 0.0, init);
  auto h = gcn_embed(p, g), ph = gcn_embed(p, pg);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(ph(perm[i], j), h(i, j), 1e-12);
}

TEST(GcnForward, BlockPathMatchesSparsePath) {
  std::mt19937_64 rng(4);
  auto g = make_graph(5, {{0, 1}, {1, 2}, {3, 4}}, testing::random_tensor(5, 3, rng));
  Rng init(5);
  auto p = init_gcn(3, 6, 2, 0.0, init);
  auto expect = gcn_embed(p, g);
  // same graph as blocks {0,1,2} and {3,4}
  auto layout = BlockLayout::from_sizes({3, 2});
  Tape t;
  auto packed = t.constant(Tensor::column({0, 1, 0, 1, 0, 1, 0, 1, 0, 0, 1, 1, 0}));
  std::vector<Var> w;
  for (auto& q : p.params) w.push_back(t.constant(q.value));
  auto h = gcn_forward_blocks(p, w, ad::block_gcn_normalize(packed, layout), layout,
                              t.constant(g.features()), nullptr);
  for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_NEAR(h.value()[i], expect[i], 1e-12);
}

TEST(GcnForward, ShapeMismatch) {
  Rng rng(1);
  auto p = init_gcn(3, 4, 2, 0.0, rng);
  EXPECT_THROW(gcn_embed(p, testing::path_graph(3)), ShapeError);
  p.params[2].value = Tensor(5, 4);
  EXPECT_THROW(p.validate(), ShapeError);
}

TEST(ScoreLink, Examples) {
  Tensor h = Tensor::from_rows({{0, 0}, {1, 0}, {1, 0}, {0.3, -2}});
  EXPECT_EQ(score_link(h, 0, 1), 0.0);
  EXPECT_EQ(stable_sigmoid(score_link(h, 0, 1)), 0.5);
  EXPECT_EQ(score_link(h, 1, 2), 1.0);
  EXPECT_EQ(score_link(h, 3, 1), score_link(h, 1, 3));
  EXPECT_THROW(score_link(h, 0, 4), InputError);
}

TEST(LpLoss, Examples) {
  std::vector<double> big{40.0}, small{-40.0};
  EXPECT_LT(lp_loss(big, small), 1e-15);
  std::vector<double> zeros{0, 0, 0};
  EXPECT_NEAR(lp_loss(zeros, zeros), std::log(2.0), 1e-15);
  std::vector<double> pos{0.3}, neg{-0.2};
  const double expect = 0.5 * (std::log(1 + std::exp(-0.3)) + std::log(1 + std::exp(-0.2)));
  EXPECT_NEAR(lp_loss(pos, neg), expect, 1e-15);
  EXPECT_THROW(lp_loss(std::span<const double>{}, std::span<const double>{}), InputError);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> nd(0, 5);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> a{nd(rng), nd(rng)}, b{nd(rng)};
    EXPECT_GE(lp_loss(a, b), 0.0);
  }
}

TEST(HitsAtK, Examples) {
  std::vector<double> neg{0.9, 0.8, 0.7, 0.6};
  std::vector<double> pos{0.95, 0.65};
  EXPECT_EQ(hits_at_k(pos, neg, 3), 0.5);
  std::vector<double> above{1.0, 2.0};
  EXPECT_EQ(hits_at_k(above, neg, 1), 1.0);
  std::vector<double> tie{0.7};
  EXPECT_EQ(hits_at_k(tie, neg, 3), 0.0);
  EXPECT_THROW(hits_at_k(pos, neg, 5), InputError);
}

TEST(HitsAtK, MatchesBruteForceOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t np = 1 + rng() % 30, nn = 1 + rng() % 60;
    const std::size_t k = 1 + rng() % nn;
    std::vector<double> pos(np), neg(nn);
    // coarse grid to force ties
    std::uniform_int_distribution<int> grid(0, 20);
    for (auto& s : pos) s = grid(rng) / 10.0;
    for (auto& s : neg) s = grid(rng) / 10.0;
    ASSERT_EQ(hits_at_k(pos, neg, k), brute_hits(pos, neg, k));
  }
}

TEST(LpLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  auto g = make_graph(12, testing::random_edges(12, 0.3, rng), testing::random_tensor(12, 3, rng));
  auto a = std::make_shared<const CsrMatrix>(normalize_adjacency(g.adjacency()));
  Rng init(9);
  auto p = init_gcn(3, 5, 2, 0.0, init);
  std::vector<std::size_t> ru{0, 3, 5, 7}, rv{1, 4, 9, 11};
  std::vector<LinkLabel> labels{LinkLabel::positive, LinkLabel::negative,
                                LinkLabel::positive, LinkLabel::negative};
  auto loss_of = [&](Tape& t, const ParamList& q, std::vector<Var>* out) {
    GcnParams gp{q, 0.0};
    auto w = t.leaves(q);
    if (out) *out = w;
    return lp_loss(score_pairs(gcn_forward(gp, w, a, t.constant(g.features()), nullptr), ru, rv),
                   labels);
  };
  Tape t;
  std::vector<Var> w;
  auto grads = t.backward(loss_of(t, p.params, &w)).of(w);
  auto f = [&](const ParamList& q) {
    Tape tt;
    return loss_of(tt, q, nullptr).value().item();
  };
  EXPECT_LT(testing::max_fd_relative_error(p.params, f, grads), 1e-4);
}

DatasetSplit sbm_split(std::uint64_t seed) {
  auto g = synthesize({.family = Family::sbm, .n = 100, .blocks = 2, .p_in = 0.5,
                       .p_out = 0.01, .features = "community-gaussian:8", .seed = seed})
               .graph;
  // intra-block CN is about 12 here, so thresholds near it fill every bucket
  SplitSpec s;
  s.heuristic = Heuristic::cn;
  s.t1 = 10;
  s.t2 = 13;
  s.min_negatives = 100;
  s.seed = seed;
  return generate_split(g, s);
}

TEST(PretrainGnn, ImprovesOverInitialization) {
  auto split = sbm_split(7);
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.hidden = 32;
  cfg.lr = 1e-2;
  cfg.seed = 1;
  auto r = pretrain_gnn(split, cfg);
  EXPECT_GT(r.best_valid, r.initial_valid);
  EXPECT_GE(r.best_epoch, 1u);
  EXPECT_EQ(evaluate_hits(r.params, split.evaluation, split.valid_pos(), split.valid_neg(), 20),
            r.best_valid);
}

TEST(PretrainGnn, PatienceZeroRunsOneEpoch) {
  auto split = sbm_split(7);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.patience = 0;
  cfg.hidden = 8;
  auto r = pretrain_gnn(split, cfg);
  EXPECT_EQ(r.trace.size(), 1u);
}

TEST(PretrainGnn, DeterministicAndTrainOnly) {
  auto split = sbm_split(3);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.patience = 5;
  cfg.hidden = 16;
  cfg.batch_size = 64;
  cfg.seed = 11;
  std::set<std::pair<NodeId, NodeId>> train, seen_pos;
  for (const auto& e : split.train_pos()) train.insert(e.key());
  std::size_t negatives = 0;
  TrainHooks hooks;
  hooks.on_gradient_edge = [&](const Edge& e) {
    if (e.positive())
      seen_pos.insert(e.key());
    else
      ++negatives;
  };
  auto a = pretrain_gnn(split, cfg, hooks);
  auto b = pretrain_gnn(split, cfg);
  EXPECT_EQ(params_digest(a.params.params), params_digest(b.params.params));
  EXPECT_EQ(seen_pos, train);
  EXPECT_GT(negatives, 0u);
}

}  // namespace
}  // namespace flex
