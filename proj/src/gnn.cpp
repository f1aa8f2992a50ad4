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

#include "flex/gnn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "flex/adam.hpp"
#include "flex/error.hpp"

namespace flex {

CsrMatrix normalize_adjacency(const CsrMatrix& a) {
  if (a.rows != a.cols) throw ShapeError("normalize_adjacency", "matrix is not square");
  const std::size_t n = a.rows;
  std::vector<double> s(n, 1.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = a.row_ptr[r]; i < a.row_ptr[r + 1]; ++i)
      if (a.col[i] != r) s[r] += a.val[i];
  for (auto& x : s) x = 1.0 / std::sqrt(x);

  CsrMatrix out;
  out.rows = out.cols = n;
  out.row_ptr.assign(1, 0);
  for (std::size_t r = 0; r < n; ++r) {
    bool diag_done = false;
    auto put_diag = [&] {
      out.col.push_back(static_cast<std::uint32_t>(r));
      out.val.push_back(s[r] * s[r]);
      diag_done = true;
    };
    for (std::size_t i = a.row_ptr[r]; i < a.row_ptr[r + 1]; ++i) {
      const std::size_t c = a.col[i];
      if (c == r) continue;
      if (!diag_done && c > r) put_diag();
      out.col.push_back(static_cast<std::uint32_t>(c));
      out.val.push_back(s[r] * a.val[i] * s[c]);
    }
    if (!diag_done) put_diag();
    out.row_ptr.push_back(out.col.size());
  }
  return out;
}

void GcnParams::validate() const {
  if (params.empty() || params.size() % 2 != 0)
    throw ShapeError("gcn", "expected weight/bias pairs");
  for (std::size_t l = 0; l < layers(); ++l) {
    const auto& w = params[2 * l];
    const auto& b = params[2 * l + 1];
    if (w.name != "gcn." + std::to_string(l) + ".w" ||
        b.name != "gcn." + std::to_string(l) + ".b")
      throw ShapeError("gcn", "unexpected parameter names " + w.name + ", " + b.name);
    if (b.value.rows() != 1 || b.value.cols() != w.value.cols())
      throw ShapeError("gcn", "bias " + b.value.shape_str() + " does not match " +
                                  w.value.shape_str());
    if (l > 0 && params[2 * l - 2].value.cols() != w.value.rows())
      throw ShapeError("gcn", "layer " + std::to_string(l) + " input width mismatch");
  }
}

GcnParams init_gcn(std::size_t in_dim, std::size_t hidden, std::size_t layers,
                   double dropout, Rng& rng) {
  if (layers < 1) throw ConfigError("gcn needs at least one layer");
  if (in_dim == 0 || hidden == 0) throw ConfigError("gcn widths must be positive");
  if (!(dropout >= 0 && dropout < 1)) throw ConfigError("dropout must lie in [0, 1)");
  GcnParams p;
  p.dropout = dropout;
  std::size_t in = in_dim;
  for (std::size_t l = 0; l < layers; ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in + hidden));
    std::uniform_real_distribution<double> u(-limit, limit);
    Tensor w(in, hidden);
    for (auto& v : w.values()) v = u(rng);
    p.params.push_back({"gcn." + std::to_string(l) + ".w", std::move(w)});
    p.params.push_back({"gcn." + std::to_string(l) + ".b", Tensor(1, hidden)});
    in = hidden;
  }
  return p;
}

namespace {

Var dropout(const Var& h, double rate, Rng* rng) {
  if (!rng || rate <= 0) return h;
  std::bernoulli_distribution keep(1.0 - rate);
  Tensor mask(h.rows(), h.cols());
  const double scale = 1.0 / (1.0 - rate);
  for (auto& m : mask.values()) m = keep(*rng) ? scale : 0.0;
  return ad::mul_const(h, mask);
}

template <class Propagate>
Var forward_impl(const GcnParams& p, const std::vector<Var>& w, const Var& x,
                 Rng* rng, Propagate&& propagate) {
  if (w.size() != p.params.size()) throw ShapeError("gcn_forward", "parameter count");
  if (x.cols() != p.in_dim())
    throw ShapeError("gcn_forward", "features " + x.value().shape_str() +
                                        " vs weights " + p.params[0].value.shape_str());
  Var h = x;
  for (std::size_t l = 0; l < p.layers(); ++l) {
    if (l > 0) h = dropout(ad::relu(h), p.dropout, rng);
    h = ad::add_row(propagate(ad::matmul(h, w[2 * l])), w[2 * l + 1]);
  }
  return h;
}

}  // namespace

Var gcn_forward(const GcnParams& p, const std::vector<Var>& w,
                std::shared_ptr<const CsrMatrix> a_norm, const Var& x,
                Rng* dropout_rng) {
  if (a_norm->rows != x.rows())
    throw ShapeError("gcn_forward", "adjacency order " + std::to_string(a_norm->rows) +
                                        " vs " + std::to_string(x.rows()) + " feature rows");
  return forward_impl(p, w, x, dropout_rng,
                      [&](const Var& hw) { return ad::spmm(a_norm, hw); });
}

Var gcn_forward_blocks(const GcnParams& p, const std::vector<Var>& w,
                       const Var& packed_norm, const BlockLayout& layout,
                       const Var& x, Rng* dropout_rng) {
  if (layout.total_nodes != x.rows())
    throw ShapeError("gcn_forward_blocks", "layout covers " +
                                               std::to_string(layout.total_nodes) +
                                               " nodes, features have " +
                                               std::to_string(x.rows()));
  return forward_impl(p, w, x, dropout_rng, [&](const Var& hw) {
    return ad::block_matmul(packed_norm, hw, layout);
  });
}

Tensor gcn_embed(const GcnParams& p, const Graph& g) {
  Tape t;
  std::vector<Var> w;
  for (const auto& q : p.params) w.push_back(t.constant(q.value));
  auto a = std::make_shared<const CsrMatrix>(normalize_adjacency(g.adjacency()));
  return gcn_forward(p, w, a, t.constant(g.features()), nullptr).value();
}

double score_link(const Tensor& h, NodeId u, NodeId v) {
  if (u >= h.rows() || v >= h.rows())
    throw InputError("score_link: node id out of range");
  double s = 0;
  for (std::size_t j = 0; j < h.cols(); ++j) s += h(u, j) * h(v, j);
  return s;
}

std::vector<double> score_links(const Tensor& h, std::span<const Edge> edges) {
  std::vector<double> out(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i)
    out[i] = score_link(h, edges[i].u, edges[i].v);
  return out;
}

Var score_pairs(const Var& h, const std::vector<std::size_t>& rows_u,
                const std::vector<std::size_t>& rows_v) {
  if (rows_u.size() != rows_v.size())
    throw ShapeError("score_pairs", "endpoint lists differ in length");
  return ad::row_sum(ad::mul(ad::gather_rows(h, rows_u), ad::gather_rows(h, rows_v)));
}

Var lp_loss(const Var& logits, const std::vector<LinkLabel>& labels) {
  if (labels.empty()) throw InputError("lp_loss: no samples");
  if (logits.rows() != labels.size() || logits.cols() != 1)
    throw ShapeError("lp_loss", logits.value().shape_str() + " logits for " +
                                    std::to_string(labels.size()) + " labels");
  Tensor t(labels.size(), 1);
  for (std::size_t i = 0; i < labels.size(); ++i)
    t[i] = labels[i] == LinkLabel::positive ? 1.0 : 0.0;
  return ad::bce_with_logits(logits, t);
}

double lp_loss(std::span<const double> pos_logits, std::span<const double> neg_logits) {
  const std::size_t n = pos_logits.size() + neg_logits.size();
  if (n == 0) throw InputError("lp_loss: no samples");
  double s = 0;
  for (double x : pos_logits) s += bce_logit(x, 1.0);
  for (double x : neg_logits) s += bce_logit(x, 0.0);
  return s / static_cast<double>(n);
}

double hits_at_k(std::span<const double> pos, std::span<const double> neg,
                 std::size_t k) {
  if (k == 0) throw InputError("hits_at_k: k must be >= 1");
  if (neg.size() < k)
    throw InputError("hits_at_k: " + std::to_string(neg.size()) +
                     " negatives, need at least k=" + std::to_string(k));
  if (pos.empty()) throw InputError("hits_at_k: no positives");
  std::vector<double> n(neg.begin(), neg.end());
  std::nth_element(n.begin(), n.begin() + static_cast<std::ptrdiff_t>(k - 1), n.end(),
                   std::greater<>());
  const double threshold = n[k - 1];
  const auto hits = std::count_if(pos.begin(), pos.end(),
                                  [&](double s) { return s > threshold; });
  return static_cast<double>(hits) / static_cast<double>(pos.size());
}

double evaluate_hits(const GcnParams& p, const Graph& g, std::span<const Edge> pos,
                     std::span<const Edge> neg, std::size_t k) {
  const auto h = gcn_embed(p, g);
  return hits_at_k(score_links(h, pos), score_links(h, neg), k);
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (patience > epochs) throw ConfigError("patience must not exceed epochs");
  if (eval_k < 1) throw ConfigError("eval_k must be >= 1");
  if (!(lr > 0)) throw ConfigError("learning rate must be positive");
  if (layers < 1 || hidden < 1) throw ConfigError("gcn needs layers >= 1, hidden >= 1");
  if (!(dropout >= 0 && dropout < 1)) throw ConfigError("dropout must lie in [0, 1)");
}

GnnPretrainResult pretrain_gnn(const DatasetSplit& split, const TrainConfig& cfg,
                               const TrainHooks& hooks) {
  cfg.validate();
  const Graph& obs = split.observed;
  const auto& train = split.train_pos();
  if (train.empty()) throw InputError("pretrain_gnn: no train positives");

  auto init_rng = make_stream(cfg.seed, "init");
  auto drop_rng = make_stream(cfg.seed, "dropout");
  auto batch_rng = make_stream(cfg.seed, "batches");
  const auto neg_seed = stream_seed(cfg.seed, "negatives");

  GcnParams p = init_gcn(obs.feature_dim(), cfg.hidden, cfg.layers, cfg.dropout, init_rng);
  AdamState adam(p.params, {.lr = cfg.lr});
  auto a_norm = std::make_shared<const CsrMatrix>(normalize_adjacency(obs.adjacency()));

  GnnPretrainResult r;
  r.initial_valid = evaluate_hits(p, split.evaluation, split.valid_pos(),
                                  split.valid_neg(), cfg.eval_k);
  r.params = p;
  double best = -1;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = cfg.batch_size == 0 ? train.size() : cfg.batch_size;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    if (bs < train.size()) std::shuffle(order.begin(), order.end(), batch_rng);
    const auto negs = sample_negatives(obs, train.size(), make_substream(neg_seed, epoch)());
    double loss_sum = 0;
    for (std::size_t start = 0; start < train.size(); start += bs) {
      const std::size_t end = std::min(train.size(), start + bs);
      std::vector<std::size_t> ru, rv;
      std::vector<LinkLabel> labels;
      auto use = [&](const Edge& e) {
        if (hooks.on_gradient_edge) hooks.on_gradient_edge(e);
        ru.push_back(e.u);
        rv.push_back(e.v);
        labels.push_back(e.label);
      };
      for (std::size_t i = start; i < end; ++i) use(train[order[i]]);
      for (std::size_t i = start; i < end; ++i) use(negs[i]);

      Tape t;
      auto w = t.leaves(p.params);
      auto h = gcn_forward(p, w, a_norm, t.constant(obs.features()), &drop_rng);
      auto loss = lp_loss(score_pairs(h, ru, rv), labels);
      const double lv = loss.value().item();
      if (!std::isfinite(lv))
        throw NumericError("gnn pretraining diverged at epoch " + std::to_string(epoch));
      adam.step(p.params, t.backward(loss).of(w));
      loss_sum += lv * static_cast<double>(labels.size());
    }
    GnnEpoch rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(2 * train.size());
    rec.valid_hits = evaluate_hits(p, split.evaluation, split.valid_pos(),
                                   split.valid_neg(), cfg.eval_k);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.trace.push_back(rec);
    if (rec.valid_hits > best) {
      best = rec.valid_hits;
      r.params = p;
      r.best_epoch = epoch;
    }
    if (epoch - r.best_epoch >= cfg.patience) break;
  }
  r.best_valid = best;
  return r;
}

void write_gnn_trace_csv(std::ostream& out, const std::vector<GnnEpoch>& trace) {
  out << "epoch,train_loss,valid_hits,seconds\n";
  out.precision(10);
  for (const auto& e : trace)
    out << e.epoch << "," << e.train_loss << "," << e.valid_hits << "," << e.seconds << "\n";
}

}  // namespace flex
