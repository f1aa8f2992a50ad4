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

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "flex/autodiff.hpp"
#include "flex/rng.hpp"
#include "flex/split.hpp"
#include "flex/subgraph.hpp"

namespace flex {

inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

/// Semi-implicit mixing noise. Each of the num_psi draws feeds an
/// independent N(0, I) block of noise_dim columns into the encoder.
struct NoiseSpec {
  std::size_t noise_dim = 8;
  std::size_t num_psi = 2;
  /// Noise-only rows prepended to the encoder input and dropped from its
  /// output.
  std::size_t truncation = 0;

  void validate() const;
};

/// Encoder GCN over [features | label | noise] to a shared hidden trunk,
/// with mu and log-variance heads. The decoder is parameter-free.
struct SiviParams {
  ParamList params;  // sivi.enc.{w,b}, sivi.mu.{w,b}, sivi.lv.{w,b}
  std::size_t feature_dim = 0;
  std::size_t noise_dim = 0;

  std::size_t hidden() const { return params[0].value.cols(); }
  std::size_t latent() const { return params[2].value.cols(); }
  void validate() const;
};

SiviParams init_sivi(std::size_t feature_dim, std::size_t noise_dim,
                     std::size_t hidden, std::size_t latent, Rng& rng);
/// Rebuilds SiviParams from a loaded parameter table.
SiviParams sivi_from_params(ParamList params, std::size_t feature_dim);

/// One posterior evaluation. Random draws are taken from the rng in a fixed
/// order: for each psi draw, its (J + N) x noise_dim noise, then its
/// N x latent reparameterization noise.
struct PosteriorSample {
  std::vector<Var> mu;       // one (N x latent) per psi draw
  std::vector<Var> log_var;  // clamped to [kLogVarMin, kLogVarMax]
  std::vector<Tensor> psi_draws;
  std::vector<Var> h;
  /// Reserved diagnostic; its definition is not pinned down, so it is
  /// never populated.
  std::optional<double> snr;
};

/// With use_labels false the label channel is zeroed. spec.noise_dim may be
/// smaller than params.noise_dim; the unused noise columns are zero.
PosteriorSample encode_semi_implicit(Tape& t, const SiviParams& p,
                                     const std::vector<Var>& w,
                                     const LabeledSubgraphBatch& batch,
                                     const NoiseSpec& spec, Rng& rng,
                                     bool use_labels = true);

/// h = mu + eps * exp(0.5 log_var), eps ~ N(0, I).
Var reparameterize(const Var& mu, const Var& log_var, Rng& rng);

/// Packed per-block sigmoid(h h^T) with zero diagonal.
Var decode_probabilities(const Var& h, const BlockLayout& layout);

/// Mean over nodes of 0.5 * sum_d (mu^2 + exp(lv) - 1 - lv).
Var kl_gaussian(const Var& mu, const Var& log_var);
double kl_gaussian(const Tensor& mu, const Tensor& log_var);

/// Packed reconstruction weights: positives scaled by non-edges/edges of
/// their block, zero diagonal, each block normalized by n(n-1), blocks
/// averaged. Single-node blocks carry no weight.
Tensor reconstruction_weights(const LabeledSubgraphBatch& batch);

struct ElboTerms {
  Var loss;   // -(recon - kl)
  Var kl;     // kl_gaussian averaged over psi draws
  Var recon;  // negative weighted BCE averaged over psi draws
  PosteriorSample posterior;
};

ElboTerms sivi_elbo(Tape& t, const SiviParams& p, const std::vector<Var>& w,
                    const LabeledSubgraphBatch& batch, const NoiseSpec& spec,
                    Rng& rng, bool use_labels = true);

/// Generated subgraphs. Decoder auxiliaries of Bernoulli-Poisson variants
/// (scaled latents, per-community rates) are not produced.
struct GeneratedSample {
  BlockLayout layout;
  std::vector<double> edge_probs;      // packed, symmetric, zero diagonal
  std::vector<std::uint8_t> adjacency;  // packed, 1 where kept prob > 0
  std::vector<LinkLabel> link_labels;
  /// Local endpoints per block (always 0 and 1 for extracted subgraphs).
  std::vector<std::pair<std::uint32_t, std::uint32_t>> targets;
  Tensor features;
  double gamma = 0.0;

  std::size_t edge_count() const;
};

/// 1 where p >= gamma, else 0.
std::vector<double> threshold_mask(std::span<const double> probs, double gamma);
/// p * [p >= gamma] applied to every block entry.
GeneratedSample threshold_edges(const GeneratedSample& s, double gamma);

/// Assembles an unthresholded sample from latents.
GeneratedSample decode_node_aware(const Tensor& h, const LabeledSubgraphBatch& batch);

/// Encode with one psi draw, reparameterize, decode and threshold.
GeneratedSample generate(const SiviParams& p, const LabeledSubgraphBatch& batch,
                         const NoiseSpec& spec, double gamma, Rng& rng,
                         bool use_labels = true);

/// AUC of the decoded probabilities at true local edges against local
/// non-edges (pairs i < j).
double reconstruction_auc(const SiviParams& p, const LabeledSubgraphBatch& batch,
                          const NoiseSpec& spec, Rng& rng);

struct GgmTrainConfig {
  std::size_t epochs = 2000;
  std::size_t patience = 100;
  double lr = 1e-3;
  std::size_t batch_size = 32;
  std::size_t hidden = 32;
  std::size_t latent = 16;
  std::uint32_t hops = 1;
  std::size_t max_nodes = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GgmEpoch {
  std::size_t epoch = 0;
  double loss = 0;
  double kl = 0;
  double recon = 0;
  double seconds = 0;
};

struct GgmPretrainResult {
  SiviParams params;
  std::vector<GgmEpoch> trace;
  std::size_t best_epoch = 0;
  double best_loss = 0;
  /// KL estimate of the returned parameters over the training subgraphs.
  double final_kl = 0;
};

/// Subgraphs of the training links, extracted from the observed graph.
std::vector<LabeledSubgraph> training_subgraphs(const DatasetSplit& split,
                                                std::uint32_t hops,
                                                std::size_t max_nodes,
                                                std::uint64_t seed);

/// Minimizes the ELBO loss over mini-batches of training-link subgraphs;
/// returns the best-loss epoch's parameters.
GgmPretrainResult pretrain_ggm(const DatasetSplit& split, const GgmTrainConfig& cfg,
                               const NoiseSpec& spec);

void write_ggm_trace_csv(std::ostream& out, const std::vector<GgmEpoch>& trace);

}  // namespace flex
