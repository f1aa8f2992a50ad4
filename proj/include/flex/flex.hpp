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
#include <string>
#include <vector>

#include "flex/gnn.hpp"
#include "flex/sivi.hpp"
#include "flex/split.hpp"

namespace flex {

enum class UpdateRule { check_mode, literal_minmax };
std::string to_string(UpdateRule r);
UpdateRule update_rule_from_string(const std::string& s);

struct FlexConfig {
  double alpha = 1.05;
  double tau = 0.0;
  double gamma = 0.5;
  double lr_gnn = 1e-5;
  double lr_ggm = 1e-5;
  std::size_t epochs = 10;
  std::size_t patience = 3;
  std::size_t batch_size = 32;
  UpdateRule update_rule = UpdateRule::check_mode;
  /// Share of each batch's blocks fed to the GNN with their original
  /// adjacency instead of a generated one.
  double mix_ratio = 0.0;
  /// Feed the zero-one labels to the generator's encoder.
  bool use_labels = true;
  NoiseSpec noise;
  std::uint32_t hops = 1;
  std::size_t max_nodes = 1000;
  std::size_t eval_k = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Target KL for the penalty: the pretraining KL plus an offset.
double default_tau(double pretrain_kl, double offset);

/// L_SIVI - (kl - tau)^2, with L_SIVI the ELBO (higher is better).
double gen_loss(double elbo, double kl, double tau);
Var gen_loss(const Var& elbo, const Var& kl, double tau);

/// alpha * lp + gen.
double flex_objective(double lp, double gen, double alpha);
Var flex_objective(const Var& lp, const Var& gen, double alpha);

struct CotrainEpoch {
  std::size_t epoch = 0;
  double lp_loss = 0;
  double elbo = 0;
  double kl = 0;
  double penalty = 0;
  double generated_cn = 0;
  double valid_hits = 0;
  double seconds = 0;
};

struct FlexResult {
  GcnParams gnn;
  SiviParams ggm;
  std::vector<CotrainEpoch> trace;
  double initial_valid = 0;
  double best_valid = 0;
  /// 0 when no epoch beat the pretrained models.
  std::size_t best_epoch = 0;
};

/// Losses of one co-training step on a fixed batch and noise seed. The
/// generator's first posterior draw, thresholded at gamma, is the adjacency
/// the GNN sees; the indicator is held constant so the link prediction loss
/// reaches the generator through the kept probabilities.
struct StepLosses {
  Var lp;       // BCE of the GNN on the generated blocks
  Var elbo;     // L_SIVI
  Var kl;
  Var gen;      // L_GEN
  Var penalty;  // (kl - tau)^2
  GeneratedSample sample;
};

StepLosses flex_step_losses(Tape& t, const GcnParams& gnn, const std::vector<Var>& wg,
                            const SiviParams& ggm, const std::vector<Var>& ws,
                            const LabeledSubgraphBatch& batch, const FlexConfig& cfg,
                            std::uint64_t noise_seed, std::uint64_t mix_seed,
                            Rng* dropout_rng);

/// Scalar each side minimizes given the step losses.
Var gnn_step_objective(const StepLosses& s, const FlexConfig& cfg);
Var ggm_step_objective(const StepLosses& s, const FlexConfig& cfg);

/// Common neighbors of the two targets in every generated block.
std::vector<double> generated_target_cn(const GeneratedSample& s);

/// Alternating co-training: per batch one GNN step with the generator frozen,
/// then one generator step with the GNN frozen, on the same noise. The
/// pretrained models are the first checkpoint candidate; the best validation
/// Hits@k wins and `patience` epochs without improvement stop the run.
FlexResult flex_tune(const GcnParams& gnn, const SiviParams& ggm,
                     const DatasetSplit& split, const FlexConfig& cfg);

enum class Ablation { none, no_seal_labels, no_lp_loss, no_sivi };
std::string to_string(Ablation a);
Ablation ablation_from_string(const std::string& s);

/// Applies a switch to the config. no_sivi keeps the pretrained encoder; its
/// noise inputs are fed zeros, so every draw is the same.
void apply_ablation(Ablation a, FlexConfig& cfg);

struct AblationMetrics {
  Ablation ablation = Ablation::none;
  double valid_hits = 0;
  double test_hits = 0;
  FlexResult result;
};

AblationMetrics ablation_run(const GcnParams& gnn, const SiviParams& ggm,
                             const DatasetSplit& split, FlexConfig cfg, Ablation a);

void write_flex_trace_csv(std::ostream& out, const std::vector<CotrainEpoch>& trace);

}  // namespace flex
