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

#include "flex/sivi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "flex/adam.hpp"
#include "flex/error.hpp"
#include "flex/gnn.hpp"

namespace flex {

void NoiseSpec::validate() const {
  if (num_psi < 1) throw ConfigError("num_psi must be >= 1");
  if (noise_dim == 0 && num_psi > 1)
    throw ConfigError("num_psi > 1 needs noise_dim >= 1 (the draws would be identical)");
}

void SiviParams::validate() const {
  static const char* names[] = {"sivi.enc.w", "sivi.enc.b", "sivi.mu.w",
                                "sivi.mu.b",  "sivi.lv.w",  "sivi.lv.b"};
  if (params.size() != 6) throw ShapeError("sivi", "expected 6 parameters");
  for (int i = 0; i < 6; ++i)
    if (params[i].name != names[i])
      throw ShapeError("sivi", "unexpected parameter " + params[i].name);
  const auto& enc = params[0].value;
  if (enc.rows() != feature_dim + 1 + noise_dim)
    throw ShapeError("sivi", "encoder input width " + std::to_string(enc.rows()) +
                                 " vs features+label+noise " +
                                 std::to_string(feature_dim + 1 + noise_dim));
  for (int head : {2, 4}) {
    if (params[head].value.rows() != enc.cols())
      throw ShapeError("sivi", "head input does not match trunk width");
    if (params[head].value.cols() != params[2].value.cols())
      throw ShapeError("sivi", "mu and log-variance heads differ in width");
  }
  for (int b : {1, 3, 5})
    if (params[b].value.rows() != 1 || params[b].value.cols() != params[b - 1].value.cols())
      throw ShapeError("sivi", "bias shape " + params[b].value.shape_str());
}

SiviParams init_sivi(std::size_t feature_dim, std::size_t noise_dim,
                     std::size_t hidden, std::size_t latent, Rng& rng) {
  if (feature_dim == 0 || hidden == 0 || latent == 0)
    throw ConfigError("sivi widths must be positive");
  auto glorot = [&](std::size_t in, std::size_t out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> u(-limit, limit);
    Tensor w(in, out);
    for (auto& v : w.values()) v = u(rng);
    return w;
  };
  SiviParams p;
  p.feature_dim = feature_dim;
  p.noise_dim = noise_dim;
  const std::size_t in = feature_dim + 1 + noise_dim;
  p.params = {{"sivi.enc.w", glorot(in, hidden)}, {"sivi.enc.b", Tensor(1, hidden)},
              {"sivi.mu.w", glorot(hidden, latent)}, {"sivi.mu.b", Tensor(1, latent)},
              {"sivi.lv.w", glorot(hidden, latent)}, {"sivi.lv.b", Tensor(1, latent)}};
  return p;
}

SiviParams sivi_from_params(ParamList params, std::size_t feature_dim) {
  SiviParams p;
  p.params = std::move(params);
  p.feature_dim = feature_dim;
  if (p.params.empty() || p.params[0].value.rows() < feature_dim + 1)
    throw ShapeError("sivi", "encoder narrower than features + label");
  p.noise_dim = p.params[0].value.rows() - feature_dim - 1;
  p.validate();
  return p;
}

namespace {

Tensor normal_tensor(std::size_t r, std::size_t c, Rng& rng) {
  std::normal_distribution<double> nd;
  Tensor t(r, c);
  for (auto& v : t.values()) v = nd(rng);
  return t;
}

// Block-diagonal adjacency with `pad` isolated nodes in front.
CsrMatrix padded(const CsrMatrix& a, std::size_t pad) {
  if (pad == 0) return a;
  CsrMatrix out;
  out.rows = out.cols = a.rows + pad;
  out.row_ptr.assign(pad + 1, 0);
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t i = a.row_ptr[r]; i < a.row_ptr[r + 1]; ++i) {
      out.col.push_back(static_cast<std::uint32_t>(a.col[i] + pad));
      out.val.push_back(a.val[i]);
    }
    out.row_ptr.push_back(out.col.size());
  }
  return out;
}

Tensor off_diagonal_mask(const BlockLayout& l) {
  Tensor m(l.total_entries, 1, 1.0);
  for (std::size_t b = 0; b < l.count(); ++b)
    for (std::size_t i = 0; i < l.sizes[b]; ++i)
      m[l.entry_offsets[b] + i * l.sizes[b] + i] = 0.0;
  return m;
}

}  // namespace

PosteriorSample encode_semi_implicit(Tape& t, const SiviParams& p,
                                     const std::vector<Var>& w,
                                     const LabeledSubgraphBatch& batch,
                                     const NoiseSpec& spec, Rng& rng,
                                     bool use_labels) {
  spec.validate();
  if (spec.noise_dim > p.noise_dim)
    throw ConfigError("noise_dim " + std::to_string(spec.noise_dim) +
                      " exceeds the encoder's " + std::to_string(p.noise_dim));
  if (w.size() != 6) throw ShapeError("encode_semi_implicit", "expected 6 parameters");
  const Tensor feats = batch.features();
  if (feats.cols() != p.feature_dim)
    throw ShapeError("encode_semi_implicit",
                     "batch features " + feats.shape_str() + " vs encoder width " +
                         std::to_string(p.feature_dim));
  const std::size_t n = batch.total_nodes(), j = spec.truncation;
  const std::size_t d = p.feature_dim, width = d + 1 + p.noise_dim;

  Tensor base(j + n, width);
  const Tensor labels = batch.labels();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) base(j + i, c) = feats(i, c);
    base(j + i, d) = use_labels ? labels[i] : 0.0;
  }
  auto a = std::make_shared<const CsrMatrix>(normalize_adjacency(padded(batch.adjacency(), j)));

  PosteriorSample s;
  for (std::size_t k = 0; k < spec.num_psi; ++k) {
    Tensor in = base;
    Tensor noise = normal_tensor(j + n, spec.noise_dim, rng);
    for (std::size_t i = 0; i < j + n; ++i)
      for (std::size_t c = 0; c < spec.noise_dim; ++c) in(i, d + 1 + c) = noise(i, c);
    auto x = t.constant(std::move(in));
    auto hid = ad::relu(ad::add_row(ad::spmm(a, ad::matmul(x, w[0])), w[1]));
    auto mu = ad::add_row(ad::spmm(a, ad::matmul(hid, w[2])), w[3]);
    auto lv = ad::clamp(ad::add_row(ad::spmm(a, ad::matmul(hid, w[4])), w[5]), kLogVarMin,
                        kLogVarMax);
    if (j > 0) {
      mu = ad::slice_rows(mu, j, n);
      lv = ad::slice_rows(lv, j, n);
    }
    s.h.push_back(reparameterize(mu, lv, rng));
    s.mu.push_back(mu);
    s.log_var.push_back(lv);
    s.psi_draws.push_back(std::move(noise));
  }
  return s;
}

Var reparameterize(const Var& mu, const Var& log_var, Rng& rng) {
  Tensor eps = normal_tensor(mu.rows(), mu.cols(), rng);
  return ad::add(mu, ad::mul_const(ad::exp(ad::scale(log_var, 0.5)), eps));
}

Var decode_probabilities(const Var& h, const BlockLayout& layout) {
  return ad::mul_const(ad::sigmoid(ad::block_gram(h, layout)), off_diagonal_mask(layout));
}

Var kl_gaussian(const Var& mu, const Var& log_var) {
  const double n = static_cast<double>(std::max<std::size_t>(1, mu.rows()));
  auto terms = ad::add_scalar(ad::sub(ad::add(ad::square(mu), ad::exp(log_var)), log_var), -1.0);
  return ad::scale(ad::sum(terms), 0.5 / n);
}

double kl_gaussian(const Tensor& mu, const Tensor& log_var) {
  if (!mu.same_shape(log_var))
    throw ShapeError("kl_gaussian", mu.shape_str() + " vs " + log_var.shape_str());
  double s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    s += mu[i] * mu[i] + std::exp(log_var[i]) - 1.0 - log_var[i];
  return 0.5 * s / static_cast<double>(std::max<std::size_t>(1, mu.rows()));
}

Tensor reconstruction_weights(const LabeledSubgraphBatch& batch) {
  const auto& l = batch.layout();
  const auto packed = batch.packed_adjacency();
  Tensor w(l.total_entries, 1);
  std::size_t active = 0;
  for (auto n : l.sizes) active += n >= 2;
  if (active == 0) return w;
  for (std::size_t b = 0; b < l.count(); ++b) {
    const std::size_t n = l.sizes[b], off = l.entry_offsets[b];
    if (n < 2) continue;
    const double entries = static_cast<double>(n * (n - 1));
    double ones = 0;
    for (std::size_t i = 0; i < n * n; ++i) ones += packed[off + i];
    const double pos_weight = ones > 0 && ones < entries ? (entries - ones) / ones : 1.0;
    // per-node scale, matching the KL which is a mean over nodes
    const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(active));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < n; ++c) {
        if (i == c) continue;
        const double a = packed[off + i * n + c];
        w[off + i * n + c] = (a > 0 ? pos_weight : 1.0) * norm;
      }
  }
  return w;
}

ElboTerms sivi_elbo(Tape& t, const SiviParams& p, const std::vector<Var>& w,
                    const LabeledSubgraphBatch& batch, const NoiseSpec& spec,
                    Rng& rng, bool use_labels) {
  ElboTerms e;
  e.posterior = encode_semi_implicit(t, p, w, batch, spec, rng, use_labels);
  const auto& layout = batch.layout();
  const auto packed = batch.packed_adjacency();
  Tensor target(layout.total_entries, 1, std::vector<double>(packed.begin(), packed.end()));
  const Tensor weights = reconstruction_weights(batch);
  const double inv = 1.0 / static_cast<double>(spec.num_psi);
  Var bce, kl;
  for (std::size_t k = 0; k < spec.num_psi; ++k) {
    auto logits = ad::block_gram(e.posterior.h[k], layout);
    auto b = ad::weighted_bce_with_logits(logits, target, weights);
    auto q = kl_gaussian(e.posterior.mu[k], e.posterior.log_var[k]);
    bce = k == 0 ? b : ad::add(bce, b);
    kl = k == 0 ? q : ad::add(kl, q);
  }
  bce = ad::scale(bce, inv);
  e.kl = ad::scale(kl, inv);
  e.recon = ad::scale(bce, -1.0);
  e.loss = ad::add(bce, e.kl);
  return e;
}

std::size_t GeneratedSample::edge_count() const {
  return static_cast<std::size_t>(std::count(adjacency.begin(), adjacency.end(), 1)) / 2;
}

std::vector<double> threshold_mask(std::span<const double> probs, double gamma) {
  if (!(gamma >= 0 && gamma <= 1)) throw InputError("gamma must lie in [0, 1]");
  std::vector<double> m(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) m[i] = probs[i] >= gamma ? 1.0 : 0.0;
  return m;
}

GeneratedSample threshold_edges(const GeneratedSample& s, double gamma) {
  const auto mask = threshold_mask(s.edge_probs, gamma);
  GeneratedSample out = s;
  out.gamma = gamma;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    out.edge_probs[i] = s.edge_probs[i] * mask[i];
    out.adjacency[i] = out.edge_probs[i] > 0 ? 1 : 0;
  }
  return out;
}

GeneratedSample decode_node_aware(const Tensor& h, const LabeledSubgraphBatch& batch) {
  const auto& l = batch.layout();
  if (h.rows() != l.total_nodes)
    throw ShapeError("decode_node_aware", h.shape_str() + " latents for " +
                                              std::to_string(l.total_nodes) + " nodes");
  GeneratedSample s;
  s.layout = l;
  s.edge_probs.assign(l.total_entries, 0.0);
  kernels::omp::block_gram(l, h.values(), h.cols(), s.edge_probs);
  for (std::size_t b = 0; b < l.count(); ++b)
    for (std::size_t i = 0; i < l.sizes[b]; ++i)
      for (std::size_t c = 0; c < l.sizes[b]; ++c) {
        auto& p = s.edge_probs[l.entry_offsets[b] + i * l.sizes[b] + c];
        p = i == c ? 0.0 : stable_sigmoid(p);
      }
  s.adjacency.resize(l.total_entries);
  for (std::size_t i = 0; i < l.total_entries; ++i) s.adjacency[i] = s.edge_probs[i] > 0;
  s.link_labels = batch.batch_labels();
  s.targets.assign(batch.count(), {LabeledSubgraph::target_u, LabeledSubgraph::target_v});
  s.features = batch.features();
  return s;
}

namespace {

PosteriorSample encode_constant(Tape& t, const SiviParams& p,
                                const LabeledSubgraphBatch& batch, NoiseSpec spec,
                                Rng& rng, bool use_labels) {
  std::vector<Var> w;
  for (const auto& q : p.params) w.push_back(t.constant(q.value));
  return encode_semi_implicit(t, p, w, batch, spec, rng, use_labels);
}

}  // namespace

GeneratedSample generate(const SiviParams& p, const LabeledSubgraphBatch& batch,
                         const NoiseSpec& spec, double gamma, Rng& rng, bool use_labels) {
  NoiseSpec one = spec;
  one.num_psi = 1;
  Tape t;
  auto post = encode_constant(t, p, batch, one, rng, use_labels);
  return threshold_edges(decode_node_aware(post.h[0].value(), batch), gamma);
}

double reconstruction_auc(const SiviParams& p, const LabeledSubgraphBatch& batch,
                          const NoiseSpec& spec, Rng& rng) {
  NoiseSpec one = spec;
  one.num_psi = 1;
  Tape t;
  auto post = encode_constant(t, p, batch, one, rng, true);
  // scored on the posterior mean given the psi draw
  const auto s = decode_node_aware(post.mu[0].value(), batch);
  const auto truth = batch.packed_adjacency();
  std::vector<std::pair<double, bool>> scored;
  const auto& l = s.layout;
  for (std::size_t b = 0; b < l.count(); ++b)
    for (std::size_t i = 0; i < l.sizes[b]; ++i)
      for (std::size_t c = i + 1; c < l.sizes[b]; ++c) {
        const std::size_t k = l.entry_offsets[b] + i * l.sizes[b] + c;
        scored.push_back({s.edge_probs[k], truth[k] > 0});
      }
  std::sort(scored.begin(), scored.end());
  // rank-sum with average ranks for ties
  double pos = 0, neg = 0, rank_sum = 0;
  for (std::size_t i = 0; i < scored.size();) {
    std::size_t e = i;
    while (e < scored.size() && scored[e].first == scored[i].first) ++e;
    const double avg = 0.5 * static_cast<double>(i + 1 + e);
    for (std::size_t k = i; k < e; ++k)
      if (scored[k].second) rank_sum += avg;
    i = e;
  }
  for (auto& x : scored) (x.second ? pos : neg) += 1;
  if (pos == 0 || neg == 0) throw InputError("reconstruction_auc needs edges and non-edges");
  return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

void GgmTrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (patience > epochs) throw ConfigError("patience must not exceed epochs");
  if (!(lr > 0)) throw ConfigError("learning rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (hops < 1) throw ConfigError("hops must be >= 1");
}

std::vector<LabeledSubgraph> training_subgraphs(const DatasetSplit& split,
                                                std::uint32_t hops,
                                                std::size_t max_nodes,
                                                std::uint64_t seed) {
  SubgraphOptions opts;
  opts.hops = hops;
  opts.max_nodes = max_nodes;
  opts.seed = seed;
  return extract_enclosing_subgraphs(split.observed, split.train_pos(), opts);
}

namespace {

LabeledSubgraphBatch gather(const std::vector<LabeledSubgraph>& subs,
                            const std::vector<std::size_t>& order, std::size_t start,
                            std::size_t end) {
  std::vector<LabeledSubgraph> blocks;
  for (std::size_t i = start; i < end; ++i) blocks.push_back(subs[order[i]]);
  return LabeledSubgraphBatch(std::move(blocks));
}

}  // namespace

GgmPretrainResult pretrain_ggm(const DatasetSplit& split, const GgmTrainConfig& cfg,
                               const NoiseSpec& spec) {
  cfg.validate();
  spec.validate();
  const auto subs = training_subgraphs(split, cfg.hops, cfg.max_nodes,
                                       stream_seed(cfg.seed, "ggm.subgraphs"));
  if (subs.empty()) throw InputError("pretrain_ggm: no training links");
  auto init_rng = make_stream(cfg.seed, "ggm.init");
  auto noise_rng = make_stream(cfg.seed, "ggm.noise");
  auto batch_rng = make_stream(cfg.seed, "ggm.batches");
  SiviParams p = init_sivi(split.observed.feature_dim(), spec.noise_dim, cfg.hidden,
                           cfg.latent, init_rng);
  AdamState adam(p.params, {.lr = cfg.lr});

  GgmPretrainResult r;
  r.params = p;
  r.best_loss = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(subs.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), batch_rng);
    GgmEpoch rec;
    rec.epoch = epoch;
    for (std::size_t start = 0; start < subs.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(subs.size(), start + cfg.batch_size);
      auto batch = gather(subs, order, start, end);
      Tape t;
      auto w = t.leaves(p.params);
      auto e = sivi_elbo(t, p, w, batch, spec, noise_rng);
      const double loss = e.loss.value().item();
      if (!std::isfinite(loss))
        throw NumericError("ggm pretraining diverged at epoch " + std::to_string(epoch));
      adam.step(p.params, t.backward(e.loss).of(w));
      const double share = static_cast<double>(end - start) / static_cast<double>(subs.size());
      rec.loss += loss * share;
      rec.kl += e.kl.value().item() * share;
      rec.recon += e.recon.value().item() * share;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.trace.push_back(rec);
    if (rec.loss < r.best_loss) {
      r.best_loss = rec.loss;
      r.params = p;
      r.best_epoch = epoch;
    }
    if (epoch - r.best_epoch >= cfg.patience) break;
  }

  // KL of the returned parameters, on a fixed noise stream
  auto kl_rng = make_stream(cfg.seed, "ggm.final_kl");
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t start = 0; start < subs.size(); start += cfg.batch_size) {
    const std::size_t end = std::min(subs.size(), start + cfg.batch_size);
    auto batch = gather(subs, order, start, end);
    Tape t;
    std::vector<Var> w;
    for (const auto& q : r.params.params) w.push_back(t.constant(q.value));
    auto e = sivi_elbo(t, r.params, w, batch, spec, kl_rng);
    r.final_kl += e.kl.value().item() * static_cast<double>(end - start) /
                  static_cast<double>(subs.size());
  }
  return r;
}

void write_ggm_trace_csv(std::ostream& out, const std::vector<GgmEpoch>& trace) {
  out << "epoch,loss,kl,recon,seconds\n";
  out.precision(10);
  for (const auto& e : trace)
    out << e.epoch << "," << e.loss << "," << e.kl << "," << e.recon << "," << e.seconds << "\n";
}

}  // namespace flex
