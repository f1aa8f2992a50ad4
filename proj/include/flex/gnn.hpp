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

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "flex/autodiff.hpp"
#include "flex/graph.hpp"
#include "flex/rng.hpp"
#include "flex/split.hpp"

namespace flex {

/// D^-1/2 (A + I) D^-1/2 with D the row sums of A + I.
CsrMatrix normalize_adjacency(const CsrMatrix& a);

/// GCN encoder: H' = A_norm (H W) + b per layer, ReLU between layers and
/// none after the last. Links are scored by the inner product of the two
/// endpoint embeddings, so the predictor itself has no parameters.
struct GcnParams {
  ParamList params;  // gcn.<i>.w (in x out), gcn.<i>.b (1 x out)
  double dropout = 0.0;

  std::size_t layers() const { return params.size() / 2; }
  std::size_t in_dim() const { return params.front().value.rows(); }
  std::size_t out_dim() const { return params[params.size() - 2].value.cols(); }
  /// Checks names and that shapes chain; raises ShapeError otherwise.
  void validate() const;
};

/// Glorot-uniform weights, zero biases.
GcnParams init_gcn(std::size_t in_dim, std::size_t hidden, std::size_t layers,
                   double dropout, Rng& rng);

/// Training mode when dropout_rng is non-null.
Var gcn_forward(const GcnParams& p, const std::vector<Var>& w,
                std::shared_ptr<const CsrMatrix> a_norm, const Var& x,
                Rng* dropout_rng);
/// Same network over a packed block-diagonal normalized adjacency.
Var gcn_forward_blocks(const GcnParams& p, const std::vector<Var>& w,
                       const Var& packed_norm, const BlockLayout& layout,
                       const Var& x, Rng* dropout_rng);

/// Evaluation-mode embeddings of every node of `g`.
Tensor gcn_embed(const GcnParams& p, const Graph& g);

double score_link(const Tensor& h, NodeId u, NodeId v);
std::vector<double> score_links(const Tensor& h, std::span<const Edge> edges);
/// Logits h_u . h_v for paired rows, as a column.
Var score_pairs(const Var& h, const std::vector<std::size_t>& rows_u,
                const std::vector<std::size_t>& rows_v);

/// Mean BCE of logits against link labels. Raises InputError when empty.
Var lp_loss(const Var& logits, const std::vector<LinkLabel>& labels);
double lp_loss(std::span<const double> pos_logits,
               std::span<const double> neg_logits);

/// Fraction of positives scoring strictly above the k-th highest negative.
double hits_at_k(std::span<const double> pos, std::span<const double> neg,
                 std::size_t k);

/// Hits@k of a model on a graph's adjacency for one bucket.
double evaluate_hits(const GcnParams& p, const Graph& g,
                     std::span<const Edge> pos, std::span<const Edge> neg,
                     std::size_t k);

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t patience = 20;
  double lr = 1e-3;
  double dropout = 0.1;
  std::size_t hidden = 128;
  std::size_t layers = 2;
  /// Positives per step; 0 uses all train positives in one step.
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
  std::size_t eval_k = 20;

  void validate() const;
};

struct GnnEpoch {
  std::size_t epoch = 0;
  double train_loss = 0;
  double valid_hits = 0;
  double seconds = 0;
};

struct TrainHooks {
  /// Called for every link that enters a training loss.
  std::function<void(const Edge&)> on_gradient_edge;
};

struct GnnPretrainResult {
  GcnParams params;
  std::vector<GnnEpoch> trace;
  double initial_valid = 0;
  double best_valid = 0;
  std::size_t best_epoch = 0;
};

/// Full-graph training on the observed (train-only) adjacency with fresh
/// negatives each epoch; keeps the epoch with the best validation Hits@k
/// and stops after `patience` epochs without improvement.
GnnPretrainResult pretrain_gnn(const DatasetSplit& split, const TrainConfig& cfg,
                               const TrainHooks& hooks = {});

void write_gnn_trace_csv(std::ostream& out, const std::vector<GnnEpoch>& trace);

}  // namespace flex
