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

#include "flex/flex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "flex/adam.hpp"
#include "flex/error.hpp"

namespace flex {

std::string to_string(UpdateRule r) {
  return r == UpdateRule::check_mode ? "check_mode" : "literal_minmax";
}

UpdateRule update_rule_from_string(const std::string& s) {
  if (s == "check_mode") return UpdateRule::check_mode;
  if (s == "literal_minmax") return UpdateRule::literal_minmax;
  throw ConfigError("unknown update_rule '" + s + "' (check_mode, literal_minmax)");
}

void FlexConfig::validate() const {
  if (!(alpha >= 0) || !std::isfinite(alpha)) throw ConfigError("alpha must be >= 0");
  if (!(tau >= 0) || !std::isfinite(tau)) throw ConfigError("tau must be >= 0");
  if (!(gamma >= 0 && gamma <= 1)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(lr_gnn > 0) || !(lr_ggm > 0)) throw ConfigError("learning rates must be positive");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (patience > epochs) throw ConfigError("patience must not exceed epochs");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(mix_ratio >= 0 && mix_ratio <= 1)) throw ConfigError("mix_ratio must lie in [0, 1]");
  if (hops < 1) throw ConfigError("hops must be >= 1");
  if (eval_k < 1) throw ConfigError("eval_k must be >= 1");
  noise.validate();
}

double default_tau(double pretrain_kl, double offset) {
  return std::max(0.0, pretrain_kl + offset);
}

double gen_loss(double elbo, double kl, double tau) {
  return elbo - (kl - tau) * (kl - tau);
}

Var gen_loss(const Var& elbo, const Var& kl, double tau) {
  return ad::sub(elbo, ad::square(ad::add_scalar(kl, -tau)));
}

double flex_objective(double lp, double gen, double alpha) { return alpha * lp + gen; }

Var flex_objective(const Var& lp, const Var& gen, double alpha) {
  return ad::add(ad::scale(lp, alpha), gen);
}

StepLosses flex_step_losses(Tape& t, const GcnParams& gnn, const std::vector<Var>& wg,
                            const SiviParams& ggm, const std::vector<Var>& ws,
                            const LabeledSubgraphBatch& batch, const FlexConfig& cfg,
                            std::uint64_t noise_seed, std::uint64_t mix_seed,
                            Rng* dropout_rng) {
  const auto& layout = batch.layout();
  Rng noise(noise_seed);
  auto e = sivi_elbo(t, ggm, ws, batch, cfg.noise, noise, cfg.use_labels);
  const Var& h = e.posterior.h[0];

  auto probs = decode_probabilities(h, layout);
  const auto mask = threshold_mask(probs.value().values(), cfg.gamma);
  auto kept = ad::mul_const(probs, Tensor(layout.total_entries, 1, mask));

  Var adj = kept;
  if (cfg.mix_ratio > 0) {
    Rng mix(mix_seed);
    std::bernoulli_distribution original(cfg.mix_ratio);
    const auto packed = batch.packed_adjacency();
    Tensor select(layout.total_entries, 1), fixed(layout.total_entries, 1);
    for (std::size_t b = 0; b < layout.count(); ++b) {
      const bool keep_original = original(mix);
      const std::size_t off = layout.entry_offsets[b], len = layout.sizes[b] * layout.sizes[b];
      for (std::size_t i = off; i < off + len; ++i) {
        select[i] = keep_original ? 0.0 : 1.0;
        fixed[i] = keep_original ? packed[i] : 0.0;
      }
    }
    adj = ad::add(ad::mul_const(kept, select), t.constant(std::move(fixed)));
  }

  auto norm = ad::block_gcn_normalize(adj, layout);
  auto hg = gcn_forward_blocks(gnn, wg, norm, layout, t.constant(batch.features()), dropout_rng);
  auto logits = score_pairs(hg, batch.target_rows(LabeledSubgraph::target_u),
                            batch.target_rows(LabeledSubgraph::target_v));

  StepLosses s;
  s.lp = lp_loss(logits, batch.batch_labels());
  s.elbo = ad::scale(e.loss, -1.0);
  s.kl = e.kl;
  s.penalty = ad::square(ad::add_scalar(e.kl, -cfg.tau));
  s.gen = ad::sub(s.elbo, s.penalty);
  s.sample = threshold_edges(decode_node_aware(h.value(), batch), cfg.gamma);
  return s;
}

Var gnn_step_objective(const StepLosses& s, const FlexConfig& cfg) {
  return ad::scale(s.lp, cfg.alpha);
}

Var ggm_step_objective(const StepLosses& s, const FlexConfig& cfg) {
  if (cfg.update_rule == UpdateRule::literal_minmax)
    return ad::scale(flex_objective(s.lp, s.gen, cfg.alpha), -1.0);
  return ad::add(ad::scale(s.gen, -1.0), ad::scale(s.lp, cfg.alpha));
}

std::vector<double> generated_target_cn(const GeneratedSample& s) {
  const auto& l = s.layout;
  std::vector<double> cn(l.count(), 0.0);
  for (std::size_t b = 0; b < l.count(); ++b) {
    const std::size_t n = l.sizes[b], off = l.entry_offsets[b];
    if (n < 2) continue;
    for (std::size_t w = 2; w < n; ++w)
      cn[b] += s.adjacency[off + w] && s.adjacency[off + n + w];
  }
  return cn;
}

namespace {

std::vector<Var> constants(Tape& t, const ParamList& ps) {
  std::vector<Var> w;
  for (const auto& p : ps) w.push_back(t.constant(p.value));
  return w;
}

void checked_step(AdamState& adam, ParamList& params, const std::vector<Tensor>& grads,
                  const char* who) {
  try {
    adam.step(params, grads);
  } catch (const NumericError& e) {
    throw NumericError(std::string(who) + ": " + e.what());
  }
}

void check_finite(const ParamList& params, const char* who) {
  for (const auto& p : params)
    for (double v : p.value.values())
      if (!std::isfinite(v))
        throw NumericError(std::string(who) + ": parameter '" + p.name + "' is not finite");
}

}  // namespace

FlexResult flex_tune(const GcnParams& gnn, const SiviParams& ggm,
                     const DatasetSplit& split, const FlexConfig& cfg) {
  cfg.validate();
  gnn.validate();
  ggm.validate();
  check_finite(gnn.params, "GNN");
  check_finite(ggm.params, "generator");
  const Graph& obs = split.observed;
  if (gnn.in_dim() != obs.feature_dim() || ggm.feature_dim != obs.feature_dim())
    throw ShapeError("flex_tune", "model input widths do not match the graph features");
  if (cfg.noise.noise_dim > ggm.noise_dim)
    throw ConfigError("noise_dim exceeds the pretrained generator's noise inputs");
  if (split.train_pos().empty()) throw InputError("flex_tune: no training links");

  SubgraphOptions opts;
  opts.hops = cfg.hops;
  opts.max_nodes = cfg.max_nodes;
  opts.seed = stream_seed(cfg.seed, "flex.subgraphs");
  const auto pos_subs = extract_enclosing_subgraphs(obs, split.train_pos(), opts);

  auto batch_rng = make_stream(cfg.seed, "flex.batches");
  auto dropout_rng = make_stream(cfg.seed, "flex.dropout");
  const auto noise_root = stream_seed(cfg.seed, "flex.noise");
  const auto mix_root = stream_seed(cfg.seed, "flex.mix");
  const auto neg_root = stream_seed(cfg.seed, "flex.negatives");

  GcnParams g = gnn;
  SiviParams q = ggm;
  AdamState adam_gnn(g.params, {.lr = cfg.lr_gnn});
  AdamState adam_ggm(q.params, {.lr = cfg.lr_ggm});

  FlexResult r;
  r.gnn = gnn;
  r.ggm = ggm;
  r.initial_valid =
      evaluate_hits(gnn, split.evaluation, split.valid_pos(), split.valid_neg(), cfg.eval_k);
  r.best_valid = r.initial_valid;

  std::uint64_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto negs = sample_negatives(obs, split.train_pos().size(),
                                       make_substream(neg_root, epoch)());
    std::vector<LabeledSubgraph> subs = pos_subs;
    for (auto& s : extract_enclosing_subgraphs(obs, negs, opts)) subs.push_back(std::move(s));
    std::vector<std::size_t> order(subs.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), batch_rng);

    CotrainEpoch rec;
    rec.epoch = epoch;
    double cn_sum = 0;
    for (std::size_t start = 0; start < subs.size(); start += cfg.batch_size, ++step) {
      const std::size_t end = std::min(subs.size(), start + cfg.batch_size);
      std::vector<LabeledSubgraph> blocks;
      for (std::size_t i = start; i < end; ++i) blocks.push_back(subs[order[i]]);
      const LabeledSubgraphBatch batch(std::move(blocks));
      const auto noise_seed = make_substream(noise_root, step)();
      const auto mix_seed = make_substream(mix_root, step)();

      {
        Tape t;
        auto wg = t.leaves(g.params);
        auto ws = constants(t, q.params);
        auto s = flex_step_losses(t, g, wg, q, ws, batch, cfg, noise_seed, mix_seed,
                                  &dropout_rng);
        if (!std::isfinite(s.lp.value().item()))
          throw NumericError("GNN: link prediction loss is not finite at epoch " +
                             std::to_string(epoch));
        checked_step(adam_gnn, g.params, t.backward(gnn_step_objective(s, cfg)).of(wg), "GNN");
      }
      {
        Tape t;
        auto wg = constants(t, g.params);
        auto ws = t.leaves(q.params);
        auto s = flex_step_losses(t, g, wg, q, ws, batch, cfg, noise_seed, mix_seed, nullptr);
        if (!std::isfinite(s.gen.value().item()))
          throw NumericError("generator: L_GEN is not finite at epoch " + std::to_string(epoch));
        checked_step(adam_ggm, q.params, t.backward(ggm_step_objective(s, cfg)).of(ws),
                     "generator");
        const double share = static_cast<double>(end - start) / static_cast<double>(subs.size());
        rec.lp_loss += s.lp.value().item() * share;
        rec.elbo += s.elbo.value().item() * share;
        rec.kl += s.kl.value().item() * share;
        rec.penalty += s.penalty.value().item() * share;
        for (double c : generated_target_cn(s.sample)) cn_sum += c;
      }
    }
    rec.generated_cn = cn_sum / static_cast<double>(subs.size());
    rec.valid_hits =
        evaluate_hits(g, split.evaluation, split.valid_pos(), split.valid_neg(), cfg.eval_k);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.trace.push_back(rec);
    if (rec.valid_hits > r.best_valid) {
      r.best_valid = rec.valid_hits;
      r.best_epoch = epoch;
      r.gnn = g;
      r.ggm = q;
    }
    if (epoch - r.best_epoch >= cfg.patience) break;
  }
  return r;
}

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::none: return "none";
    case Ablation::no_seal_labels: return "no_seal_labels";
    case Ablation::no_lp_loss: return "no_lp_loss";
    case Ablation::no_sivi: return "no_sivi";
  }
  return "none";
}

Ablation ablation_from_string(const std::string& s) {
  for (auto a : {Ablation::none, Ablation::no_seal_labels, Ablation::no_lp_loss,
                 Ablation::no_sivi})
    if (s == to_string(a)) return a;
  throw ConfigError("unknown ablation '" + s +
                    "' (none, no_seal_labels, no_lp_loss, no_sivi)");
}

void apply_ablation(Ablation a, FlexConfig& cfg) {
  switch (a) {
    case Ablation::none: break;
    case Ablation::no_seal_labels: cfg.use_labels = false; break;
    case Ablation::no_lp_loss: cfg.alpha = 0.0; break;
    case Ablation::no_sivi:
      cfg.noise.num_psi = 1;
      cfg.noise.noise_dim = 0;
      break;
  }
}

AblationMetrics ablation_run(const GcnParams& gnn, const SiviParams& ggm,
                             const DatasetSplit& split, FlexConfig cfg, Ablation a) {
  apply_ablation(a, cfg);
  AblationMetrics m;
  m.ablation = a;
  m.result = flex_tune(gnn, ggm, split, cfg);
  m.valid_hits = m.result.best_valid;
  m.test_hits = evaluate_hits(m.result.gnn, split.evaluation, split.test_pos(), split.test_neg(),
                              cfg.eval_k);
  return m;
}

void write_flex_trace_csv(std::ostream& out, const std::vector<CotrainEpoch>& trace) {
  out << "epoch,lp_loss,elbo,kl,penalty,generated_cn,valid_hits,seconds\n";
  out.precision(10);
  for (const auto& e : trace)
    out << e.epoch << "," << e.lp_loss << "," << e.elbo << "," << e.kl << "," << e.penalty
        << "," << e.generated_cn << "," << e.valid_hits << "," << e.seconds << "\n";
}

}  // namespace flex
