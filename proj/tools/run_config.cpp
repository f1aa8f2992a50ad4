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

#include "run_config.hpp"

#include <fstream>

#include "flex/error.hpp"

namespace flex::cli {

using nlohmann::json;

namespace {

json defaults() {
  const SyntheticGraphSpec sy;
  const SplitSpec sp;
  const TrainConfig g;
  const GgmTrainConfig m;
  const NoiseSpec ns;
  const FlexConfig f;
  return {
      {"seed", 0u},
      {"synth",
       {{"family", to_string(sy.family)}, {"n", sy.n}, {"blocks", sy.blocks},
        {"p_in", sy.p_in}, {"p_out", sy.p_out}, {"rings", json::array()}, {"m", sy.m},
        {"p", sy.p}, {"features", sy.features}}},
      {"split",
       {{"heuristic", to_string(sp.heuristic)}, {"direction", to_string(sp.direction)},
        {"t1", sp.t1}, {"t2", sp.t2}, {"neg_ratio", sp.neg_ratio},
        {"min_negatives", sp.min_negatives}, {"full_adjacency", sp.full_adjacency}}},
      {"gnn",
       {{"epochs", g.epochs}, {"patience", g.patience}, {"lr", g.lr}, {"dropout", g.dropout},
        {"hidden", g.hidden}, {"layers", g.layers}, {"batch_size", g.batch_size},
        {"eval_k", g.eval_k}}},
      {"ggm",
       {{"epochs", m.epochs}, {"patience", m.patience}, {"lr", m.lr},
        {"batch_size", m.batch_size}, {"hidden", m.hidden}, {"latent", m.latent},
        {"hops", m.hops}, {"max_nodes", m.max_nodes}, {"noise_dim", ns.noise_dim},
        {"num_psi", ns.num_psi}, {"truncation", ns.truncation}}},
      {"flex",
       {{"alpha", f.alpha}, {"tau", nullptr}, {"tau_offset", 0.0}, {"gamma", f.gamma},
        {"lr_gnn", f.lr_gnn}, {"lr_ggm", f.lr_ggm}, {"epochs", f.epochs},
        {"patience", f.patience}, {"batch_size", f.batch_size},
        {"update_rule", to_string(f.update_rule)}, {"mix_ratio", f.mix_ratio},
        {"hops", f.hops}, {"max_nodes", f.max_nodes}, {"eval_k", f.eval_k},
        {"ablation", "none"}}},
      {"analyze", {{"gamma", nullptr}, {"scan_gamma_low", 0.0}, {"scan_gamma_high", 0.9999}}},
      {"sweep", {{"param", "gamma"}, {"grid", nullptr}, {"seeds", json::array({0, 1, 2})}}},
  };
}

// Keys whose default is null accept these kinds.
bool nullable_accepts(const std::string& key, const json& v) {
  if (v.is_null()) return true;
  if (key == "grid") return v.is_array();
  return v.is_number();
}

void check_type(const std::string& where, const json& def, const json& v) {
  const auto key = where.substr(where.rfind('.') + 1);
  bool ok;
  if (def.is_null()) ok = nullable_accepts(key, v);
  else if (def.is_number_unsigned()) ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  else if (def.is_number()) ok = v.is_number();
  else if (def.is_boolean()) ok = v.is_boolean();
  else if (def.is_string()) ok = v.is_string();
  else if (def.is_array()) ok = v.is_array();
  else ok = false;
  if (!ok) throw ConfigError("config key '" + where + "' has the wrong type (" + v.dump() + ")");
}

template <typename T>
T get(const json& j, const char* section, const char* key) {
  try {
    return j.at(section).at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + section + "." + key + "' is invalid");
  }
}

}  // namespace

RunConfig::RunConfig() : j_(defaults()) {}

RunConfig RunConfig::load(const std::optional<std::string>& path,
                          const std::vector<std::string>& overrides) {
  RunConfig c;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw DependencyError("cannot open config file '" + *path + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file '" + *path + "': " + e.what());
    }
    c.merge(j, *path);
  }
  for (const auto& o : overrides) c.set(o);
  // every section is checked up front, whichever command runs
  (void)c.synth();
  (void)c.split();
  (void)c.gnn();
  (void)c.ggm();
  (void)c.flex();
  (void)c.ablation();
  (void)c.analyze_gamma();
  (void)c.sweep_grid();
  (void)c.sweep_seeds();
  return c;
}

void RunConfig::merge(const json& j, const std::string& origin) {
  if (!j.is_object()) throw ConfigError(origin + ": top level must be an object");
  for (auto& [section, body] : j.items()) {
    if (!j_.contains(section)) throw ConfigError(origin + ": unknown key '" + section + "'");
    if (section == "seed") {
      check_type("seed", j_["seed"], body);
      j_["seed"] = body;
      continue;
    }
    if (!body.is_object()) throw ConfigError(origin + ": section '" + section + "' must be an object");
    for (auto& [key, v] : body.items()) {
      if (!j_[section].contains(key))
        throw ConfigError(origin + ": unknown key '" + section + "." + key + "'");
      check_type(section + "." + key, j_[section][key], v);
      j_[section][key] = v;
    }
  }
}

void RunConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  json v = json::parse(raw, nullptr, false);
  if (v.is_discarded()) v = raw;
  const auto dot = key.find('.');
  json patch;
  if (dot == std::string::npos) patch[key] = v;
  else patch[key.substr(0, dot)][key.substr(dot + 1)] = v;
  merge(patch, "--set " + key);
}

std::uint64_t RunConfig::seed() const { return j_.at("seed").get<std::uint64_t>(); }

SyntheticGraphSpec RunConfig::synth() const {
  SyntheticGraphSpec s;
  s.family = family_from_string(get<std::string>(j_, "synth", "family"));
  s.n = get<std::size_t>(j_, "synth", "n");
  s.blocks = get<std::size_t>(j_, "synth", "blocks");
  s.p_in = get<double>(j_, "synth", "p_in");
  s.p_out = get<double>(j_, "synth", "p_out");
  s.rings = get<std::vector<std::size_t>>(j_, "synth", "rings");
  s.m = get<std::size_t>(j_, "synth", "m");
  s.p = get<double>(j_, "synth", "p");
  s.features = get<std::string>(j_, "synth", "features");
  s.seed = seed();
  s.validate();
  return s;
}

SplitSpec RunConfig::split() const {
  SplitSpec s;
  s.heuristic = heuristic_from_string(get<std::string>(j_, "split", "heuristic"));
  s.direction = direction_from_string(get<std::string>(j_, "split", "direction"));
  s.t1 = get<double>(j_, "split", "t1");
  s.t2 = get<double>(j_, "split", "t2");
  s.neg_ratio = get<double>(j_, "split", "neg_ratio");
  s.min_negatives = get<std::size_t>(j_, "split", "min_negatives");
  s.full_adjacency = get<bool>(j_, "split", "full_adjacency");
  s.seed = seed();
  s.validate();
  return s;
}

TrainConfig RunConfig::gnn() const {
  TrainConfig c;
  c.epochs = get<std::size_t>(j_, "gnn", "epochs");
  c.patience = get<std::size_t>(j_, "gnn", "patience");
  c.lr = get<double>(j_, "gnn", "lr");
  c.dropout = get<double>(j_, "gnn", "dropout");
  c.hidden = get<std::size_t>(j_, "gnn", "hidden");
  c.layers = get<std::size_t>(j_, "gnn", "layers");
  c.batch_size = get<std::size_t>(j_, "gnn", "batch_size");
  c.eval_k = get<std::size_t>(j_, "gnn", "eval_k");
  c.seed = seed();
  c.validate();
  return c;
}

GgmTrainConfig RunConfig::ggm() const {
  GgmTrainConfig c;
  c.epochs = get<std::size_t>(j_, "ggm", "epochs");
  c.patience = get<std::size_t>(j_, "ggm", "patience");
  c.lr = get<double>(j_, "ggm", "lr");
  c.batch_size = get<std::size_t>(j_, "ggm", "batch_size");
  c.hidden = get<std::size_t>(j_, "ggm", "hidden");
  c.latent = get<std::size_t>(j_, "ggm", "latent");
  c.hops = get<std::uint32_t>(j_, "ggm", "hops");
  c.max_nodes = get<std::size_t>(j_, "ggm", "max_nodes");
  c.seed = seed();
  c.validate();
  return c;
}

NoiseSpec RunConfig::ggm_noise() const {
  NoiseSpec n;
  n.noise_dim = get<std::size_t>(j_, "ggm", "noise_dim");
  n.num_psi = get<std::size_t>(j_, "ggm", "num_psi");
  n.truncation = get<std::size_t>(j_, "ggm", "truncation");
  n.validate();
  return n;
}

FlexConfig RunConfig::flex() const {
  FlexConfig c;
  c.alpha = get<double>(j_, "flex", "alpha");
  c.gamma = get<double>(j_, "flex", "gamma");
  c.lr_gnn = get<double>(j_, "flex", "lr_gnn");
  c.lr_ggm = get<double>(j_, "flex", "lr_ggm");
  c.epochs = get<std::size_t>(j_, "flex", "epochs");
  c.patience = get<std::size_t>(j_, "flex", "patience");
  c.batch_size = get<std::size_t>(j_, "flex", "batch_size");
  c.update_rule = update_rule_from_string(get<std::string>(j_, "flex", "update_rule"));
  c.mix_ratio = get<double>(j_, "flex", "mix_ratio");
  c.hops = get<std::uint32_t>(j_, "flex", "hops");
  c.max_nodes = get<std::size_t>(j_, "flex", "max_nodes");
  c.eval_k = get<std::size_t>(j_, "flex", "eval_k");
  c.noise = ggm_noise();
  c.seed = seed();
  c.validate();
  return c;
}

std::optional<double> RunConfig::flex_tau() const {
  const auto& v = j_.at("flex").at("tau");
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

double RunConfig::flex_tau_offset() const { return get<double>(j_, "flex", "tau_offset"); }

Ablation RunConfig::ablation() const {
  return ablation_from_string(get<std::string>(j_, "flex", "ablation"));
}

double RunConfig::analyze_gamma() const {
  const auto& v = j_.at("analyze").at("gamma");
  return v.is_null() ? flex().gamma : v.get<double>();
}

double RunConfig::analyze_scan_low() const {
  return get<double>(j_, "analyze", "scan_gamma_low");
}

double RunConfig::analyze_scan_high() const {
  return get<double>(j_, "analyze", "scan_gamma_high");
}

SweepParam RunConfig::sweep_param() const {
  return sweep_param_from_string(get<std::string>(j_, "sweep", "param"));
}

std::vector<double> RunConfig::sweep_grid() const {
  const auto& v = j_.at("sweep").at("grid");
  if (!v.is_null()) return get<std::vector<double>>(j_, "sweep", "grid");
  switch (sweep_param()) {
    case SweepParam::gamma: return kGammaGrid;
    case SweepParam::lr_gnn: return kLrGrid;
    case SweepParam::alpha: return {0.5, 0.7, 0.95, 1.05};
  }
  return kGammaGrid;
}

std::vector<std::uint64_t> RunConfig::sweep_seeds() const {
  return get<std::vector<std::uint64_t>>(j_, "sweep", "seeds");
}

}  // namespace flex::cli
