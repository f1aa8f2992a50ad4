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

#include "pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "flex/adam.hpp"
#include "flex/error.hpp"
#include "flex/kernels.hpp"

namespace flex::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("missing file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a(buf.str());
  return hex.str();
}

json Manifest::to_json() const {
  json j{{"command", command}, {"config", config}, {"seed", seed},
         {"inputs", json::object()}, {"outputs", json::object()},
         {"metrics", metrics}, {"seconds", seconds}};
  for (const auto& [p, h] : inputs) j["inputs"][p] = h;
  for (const auto& [p, h] : outputs) j["outputs"][p] = h;
  return j;
}

Manifest Manifest::from_json(const json& j) {
  Manifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config");
    m.seed = j.at("seed").get<std::uint64_t>();
    for (auto& [p, h] : j.at("inputs").items()) m.inputs.emplace_back(p, h.get<std::string>());
    for (auto& [p, h] : j.at("outputs").items()) m.outputs.emplace_back(p, h.get<std::string>());
    m.metrics = j.at("metrics");
    m.seconds = j.at("seconds").get<double>();
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

namespace {

// stage directory -> command that produces it
std::string producer(const std::string& stage) {
  if (stage == "graph") return "synth";
  if (stage == "split") return "split";
  if (stage == "gnn") return "pretrain-gnn";
  if (stage == "ggm") return "pretrain-ggm";
  return "flex-tune";
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string exact(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

GcnParams gnn_from(const Checkpoint& c, double dropout) {
  GcnParams p;
  p.params = c.params;
  p.dropout = dropout;
  p.validate();
  return p;
}

NoiseSpec noise_from(const json& j) {
  NoiseSpec n;
  n.noise_dim = j.at("noise_dim").get<std::size_t>();
  n.num_psi = j.at("num_psi").get<std::size_t>();
  n.truncation = j.at("truncation").get<std::size_t>();
  return n;
}

json noise_json(const NoiseSpec& n) {
  return {{"noise_dim", n.noise_dim}, {"num_psi", n.num_psi}, {"truncation", n.truncation}};
}

}  // namespace

Pipeline::Pipeline(std::string workdir, RunConfig cfg, std::ostream& out, std::ostream& err)
    : dir_(std::move(workdir)), cfg_(std::move(cfg)), out_(out), err_(err) {}

std::string Pipeline::path(const std::string& rel) const { return (fs::path(dir_) / rel).string(); }

void Pipeline::record_input(Manifest& m, const std::string& rel) {
  m.inputs.emplace_back(rel, file_hash(path(rel)));
}

Manifest Pipeline::upstream(const std::string& stage, const std::string& needed_by) {
  const auto mpath = path(stage + "/manifest.json");
  std::ifstream in(mpath);
  if (!in)
    throw DependencyError(needed_by + " needs '" + mpath + "', which does not exist (run `" +
                          producer(stage) + "` first)");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("manifest '" + mpath + "': " + e.what());
  }
  auto m = Manifest::from_json(j);
  for (const auto& [rel, hash] : m.outputs) {
    if (!fs::exists(path(rel)))
      throw DependencyError(needed_by + " needs '" + path(rel) + "', which does not exist (run `" +
                            producer(stage) + "` first)");
    if (file_hash(path(rel)) != hash)
      err_ << "warning: " << rel << " changed after " << m.command << " wrote it (stale)\n";
  }
  for (const auto& [rel, hash] : m.inputs)
    if (fs::exists(path(rel)) && file_hash(path(rel)) != hash)
      err_ << "warning: " << stage << " was built from an older " << rel
           << " (stale; re-run `" << producer(stage) << "`)\n";
  return m;
}

void Pipeline::finish(Manifest& m, const std::string& stage,
                      const std::vector<std::string>& outputs, double seconds) {
  m.config = cfg_.values();
  m.seed = cfg_.seed();
  m.seconds = seconds;
  for (const auto& rel : outputs) m.outputs.emplace_back(rel, file_hash(path(rel)));
  std::ofstream f(path(stage + "/manifest.json"));
  f << m.to_json().dump(2) << "\n";
  if (!f) throw InputError("cannot write manifest in '" + path(stage) + "'");
}

Graph Pipeline::load_graph_stage(Manifest& m) {
  if (fs::exists(path("graph/manifest.json"))) {
    upstream("graph", m.command);
  } else if (!fs::exists(path("graph/edges.tsv"))) {
    throw DependencyError(m.command + " needs '" + path("graph/edges.tsv") +
                          "', which does not exist (run `synth` first or provide an edge list)");
  } else {
    err_ << "warning: graph/ has no manifest; provenance starts at the edge list\n";
  }
  record_input(m, "graph/edges.tsv");
  std::string features = "constant:1";
  if (fs::exists(path("graph/features.csv"))) {
    record_input(m, "graph/features.csv");
    features = path("graph/features.csv");
  }
  return load_graph(path("graph/edges.tsv"), features);
}

DatasetSplit Pipeline::load_split_stage(const Graph& g, Manifest& m) {
  upstream("split", m.command);
  record_input(m, "split/split.json");
  return load_split(path("split/split.json"), g);
}

void Pipeline::synth() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = cfg_.synth();
  auto s = synthesize(spec);
  for (const auto& w : s.warnings) err_ << "warning: " << w << "\n";
  fs::create_directories(path("graph"));
  {
    std::ofstream e(path("graph/edges.tsv"));
    write_edge_list(e, s.graph);
    std::ofstream f(path("graph/features.csv"));
    write_feature_csv(f, s.graph.features());
  }
  Manifest m;
  m.command = "synth";
  m.metrics = {{"nodes", s.graph.num_nodes()}, {"edges", s.graph.edge_count()},
               {"warnings", s.warnings}};
  finish(m, "graph", {"graph/edges.tsv", "graph/features.csv"}, since(t0));
  out_ << "graph: " << s.graph.num_nodes() << " nodes, " << s.graph.edge_count() << " edges\n";
}

void Pipeline::split() {
  const auto t0 = std::chrono::steady_clock::now();
  Manifest m;
  m.command = "split";
  const Graph g = load_graph_stage(m);
  const auto spec = cfg_.split();
  auto s = generate_split(g, spec);
  verify_split(g, s);
  fs::create_directories(path("split"));
  save_split(path("split/split.json"), s);
  m.metrics = {{"train", s.train_pos().size()}, {"valid", s.valid_pos().size()},
               {"test", s.test_pos().size()}, {"note", threshold_note(spec)}};
  finish(m, "split", {"split/split.json"}, since(t0));
  out_ << "split: train " << s.train_pos().size() << ", valid " << s.valid_pos().size()
       << ", test " << s.test_pos().size() << "\n";
  if (const auto note = threshold_note(spec); !note.empty()) out_ << "note: " << note << "\n";
}

void Pipeline::pretrain_gnn() {
  const auto t0 = std::chrono::steady_clock::now();
  Manifest m;
  m.command = "pretrain-gnn";
  const Graph g = load_graph_stage(m);
  const auto s = load_split_stage(g, m);
  const auto cfg = cfg_.gnn();
  auto r = flex::pretrain_gnn(s, cfg);
  fs::create_directories(path("gnn"));
  save_checkpoint(path("gnn/gnn.ckpt"), r.params.params);
  {
    std::ofstream t(path("gnn/trace.csv"));
    write_gnn_trace_csv(t, r.trace);
  }
  const double test = evaluate_hits(r.params, s.evaluation, s.test_pos(), s.test_neg(), cfg.eval_k);
  m.metrics = {{"initial_valid", r.initial_valid}, {"best_valid", r.best_valid},
               {"best_epoch", r.best_epoch}, {"epochs_run", r.trace.size()},
               {"test_hits", test}, {"k", cfg.eval_k}};
  finish(m, "gnn", {"gnn/gnn.ckpt", "gnn/trace.csv"}, since(t0));
  out_ << "gnn: best valid Hits@" << cfg.eval_k << " " << exact(r.best_valid) << " (epoch "
       << r.best_epoch << "), test " << exact(test) << "\n";
}

void Pipeline::pretrain_ggm() {
  const auto t0 = std::chrono::steady_clock::now();
  Manifest m;
  m.command = "pretrain-ggm";
  const Graph g = load_graph_stage(m);
  const auto s = load_split_stage(g, m);
  const auto cfg = cfg_.ggm();
  const auto noise = cfg_.ggm_noise();
  auto r = flex::pretrain_ggm(s, cfg, noise);
  fs::create_directories(path("ggm"));
  save_checkpoint(path("ggm/ggm.ckpt"), r.params.params);
  {
    std::ofstream t(path("ggm/trace.csv"));
    write_ggm_trace_csv(t, r.trace);
  }
  m.metrics = {{"best_loss", r.best_loss}, {"best_epoch", r.best_epoch},
               {"epochs_run", r.trace.size()}, {"final_kl", r.final_kl},
               {"noise", noise_json(noise)}, {"use_labels", true}};
  finish(m, "ggm", {"ggm/ggm.ckpt", "ggm/trace.csv"}, since(t0));
  out_ << "ggm: best loss " << exact(r.best_loss) << " (epoch " << r.best_epoch << "), KL "
       << exact(r.final_kl) << "\n";
}

void Pipeline::flex_tune() {
  const auto t0 = std::chrono::steady_clock::now();
  Manifest m;
  m.command = "flex-tune";
  const Graph g = load_graph_stage(m);
  const auto s = load_split_stage(g, m);
  upstream("gnn", "flex-tune");
  const auto ggm_manifest = upstream("ggm", "flex-tune");
  record_input(m, "gnn/gnn.ckpt");
  record_input(m, "ggm/ggm.ckpt");
  const auto gnn = gnn_from(load_checkpoint(path("gnn/gnn.ckpt")), cfg_.gnn().dropout);
  const auto ggm = sivi_from_params(load_checkpoint(path("ggm/ggm.ckpt")).params, g.feature_dim());

  auto cfg = cfg_.flex();
  cfg.noise = noise_from(ggm_manifest.metrics.at("noise"));
  const double pre_kl = ggm_manifest.metrics.at("final_kl").get<double>();
  cfg.tau = cfg_.flex_tau().value_or(default_tau(pre_kl, cfg_.flex_tau_offset()));
  const auto ablation = cfg_.ablation();
  auto r = ablation_run(gnn, ggm, s, cfg, ablation);
  apply_ablation(ablation, cfg);

  const std::string stage = ablation == Ablation::none ? "flex" : "flex-" + to_string(ablation);
  fs::create_directories(path(stage));
  save_checkpoint(path(stage + "/gnn.ckpt"), r.result.gnn.params);
  save_checkpoint(path(stage + "/ggm.ckpt"), r.result.ggm.params);
  {
    std::ofstream t(path(stage + "/trace.csv"));
    write_flex_trace_csv(t, r.result.trace);
  }
  const double baseline =
      evaluate_hits(gnn, s.evaluation, s.test_pos(), s.test_neg(), cfg.eval_k);
  m.metrics = {{"ablation", to_string(ablation)},
               {"tau", cfg.tau},
               {"initial_valid", r.result.initial_valid},
               {"best_valid", r.result.best_valid},
               {"best_epoch", r.result.best_epoch},
               {"epochs_run", r.result.trace.size()},
               {"test_hits", r.test_hits},
               {"baseline_test_hits", baseline},
               {"k", cfg.eval_k},
               {"noise", noise_json(cfg.noise)},
               {"use_labels", cfg.use_labels}};
  finish(m, stage, {stage + "/gnn.ckpt", stage + "/ggm.ckpt", stage + "/trace.csv"}, since(t0));
  out_ << stage << ": valid Hits@" << cfg.eval_k << " " << exact(r.result.initial_valid)
       << " -> " << exact(r.result.best_valid) << " (epoch " << r.result.best_epoch
       << "), test " << exact(baseline) << " -> " << exact(r.test_hits) << "\n";
}

void Pipeline::eval(const std::string& stage) {
  Manifest m;
  m.command = "eval";
  const Graph g = load_graph_stage(m);
  const auto s = load_split_stage(g, m);
  const auto trained = upstream(stage, "eval");
  record_input(m, stage + "/gnn.ckpt");
  const auto gnn = gnn_from(load_checkpoint(path(stage + "/gnn.ckpt")), 0.0);
  const std::size_t k = trained.metrics.value("k", std::size_t{20});
  const double valid = evaluate_hits(gnn, s.evaluation, s.valid_pos(), s.valid_neg(), k);
  const double test = evaluate_hits(gnn, s.evaluation, s.test_pos(), s.test_neg(), k);
  if (trained.metrics.contains("best_valid") &&
      trained.metrics.at("best_valid").get<double>() != valid)
    err_ << "warning: valid Hits@" << k << " " << exact(valid) << " differs from the "
         << exact(trained.metrics.at("best_valid").get<double>()) << " recorded by "
         << trained.command << "\n";
  fs::create_directories(path("eval"));
  std::ofstream csv(path("eval/" + stage + ".csv"));
  csv << "model,k,valid_hits,test_hits\n" << stage << "," << k << "," << exact(valid) << ","
      << exact(test) << "\n";
  out_ << stage << " valid_hits@" << k << " " << exact(valid) << "\n"
       << stage << " test_hits@" << k << " " << exact(test) << "\n";
}

void Pipeline::analyze(const std::string& stage) {
  const auto t0 = std::chrono::steady_clock::now();
  Manifest m;
  m.command = "analyze";
  const Graph g = load_graph_stage(m);
  const auto s = load_split_stage(g, m);
  const auto trained = upstream(stage, "analyze");
  if (!fs::exists(path(stage + "/ggm.ckpt")))
    throw DependencyError("analyze needs a generator checkpoint in '" + path(stage) + "'");
  record_input(m, stage + "/ggm.ckpt");
  const auto ggm = sivi_from_params(load_checkpoint(path(stage + "/ggm.ckpt")).params, g.feature_dim());
  const auto noise = noise_from(trained.metrics.at("noise"));
  const bool use_labels = trained.metrics.value("use_labels", true);
  const auto fc = cfg_.flex();

  SubgraphOptions opts;
  opts.hops = fc.hops;
  opts.max_nodes = fc.max_nodes;
  opts.seed = stream_seed(cfg_.seed(), "analyze.subgraphs");
  const LabeledSubgraphBatch batch(extract_enclosing_subgraphs(s.observed, s.train_pos(), opts));
  auto rng = make_stream(cfg_.seed(), "analyze");
  const auto raw = generate(ggm, batch, noise, 0.0, rng, use_labels);
  const double gamma = cfg_.analyze_gamma();
  const auto gen = threshold_edges(raw, gamma);

  const auto train_h = part_histogram(s, Part::train, Heuristic::cn);
  const auto valid_h = part_histogram(s, Part::valid, Heuristic::cn);
  const auto gen_h = cn_distribution(gen);
  const auto report = alignment_report(train_h, valid_h, gen_h);
  const auto low = degree_bias_scan(threshold_edges(raw, cfg_.analyze_scan_low()));
  const auto high = degree_bias_scan(threshold_edges(raw, cfg_.analyze_scan_high()));

  const std::string out_dir = "analyze/" + stage;
  fs::create_directories(path(out_dir));
  {
    std::ofstream h(path(out_dir + "/histograms.csv"));
    write_histogram_csv(h, {train_h, valid_h, gen_h});
    std::ofstream lo(path(out_dir + "/degree_bias_low.csv"));
    write_degree_bias_csv(lo, low);
    std::ofstream hi(path(out_dir + "/degree_bias_high.csv"));
    write_degree_bias_csv(hi, high);
  }
  json rep{{"gamma", gamma},
           {"train_mean_cn", report.train_mean},
           {"valid_mean_cn", report.valid_mean},
           {"generated_mean_cn", report.generated_mean},
           {"generated_gap", report.generated_gap},
           {"train_gap", report.train_gap},
           {"improvement", report.improvement_str()},
           {"generated_edges", gen.edge_count()},
           {"degree_bias", {{"gamma_low", cfg_.analyze_scan_low()},
                            {"slope_low", low.slope},
                            {"gamma_high", cfg_.analyze_scan_high()},
                            {"slope_high", high.slope}}}};
  {
    std::ofstream r(path(out_dir + "/report.json"));
    r << rep.dump(2) << "\n";
  }
  m.metrics = rep;
  finish(m, out_dir,
         {out_dir + "/report.json", out_dir + "/histograms.csv", out_dir + "/degree_bias_low.csv",
          out_dir + "/degree_bias_high.csv"},
         since(t0));
  out_ << "CN means: train " << exact(report.train_mean) << ", valid " << exact(report.valid_mean)
       << ", generated " << exact(report.generated_mean) << "\n"
       << "gaps: generated " << exact(report.generated_gap) << ", train "
       << exact(report.train_gap) << " (" << report.improvement_str() << ")\n"
       << "degree-bias slope: " << exact(low.slope) << " at gamma " << cfg_.analyze_scan_low()
       << ", " << exact(high.slope) << " at gamma " << cfg_.analyze_scan_high() << "\n";
}

void Pipeline::sweep() {
  const auto t0 = std::chrono::steady_clock::now();
  Manifest m;
  m.command = "sweep";
  const Graph g = load_graph_stage(m);
  const auto s = load_split_stage(g, m);
  upstream("gnn", "sweep");
  const auto ggm_manifest = upstream("ggm", "sweep");
  record_input(m, "gnn/gnn.ckpt");
  record_input(m, "ggm/ggm.ckpt");
  const auto gnn = gnn_from(load_checkpoint(path("gnn/gnn.ckpt")), cfg_.gnn().dropout);
  const auto ggm = sivi_from_params(load_checkpoint(path("ggm/ggm.ckpt")).params, g.feature_dim());
  auto cfg = cfg_.flex();
  cfg.noise = noise_from(ggm_manifest.metrics.at("noise"));
  cfg.tau = cfg_.flex_tau().value_or(
      default_tau(ggm_manifest.metrics.at("final_kl").get<double>(), cfg_.flex_tau_offset()));
  apply_ablation(cfg_.ablation(), cfg);

  std::vector<SweepCase> cases;
  for (auto seed : cfg_.sweep_seeds()) cases.push_back({seed, &s, &gnn, &ggm});
  const auto param = cfg_.sweep_param();
  auto r = run_sweep(param, cfg_.sweep_grid(), cfg, cases);

  fs::create_directories(path("sweep"));
  const std::string base = "sweep/" + to_string(param);
  {
    std::ofstream c(path(base + ".csv"));
    write_sweep_csv(c, r);
  }
  json pts = json::array();
  for (const auto& p : r.points)
    pts.push_back({{"value", p.value}, {"test_hits", p.test_hits}, {"valid_hits", p.valid_hits},
                   {"mean", p.mean}, {"std", p.stddev}, {"errors", p.errors}});
  {
    std::ofstream j(path(base + ".json"));
    j << json{{"param", to_string(param)}, {"points", pts}}.dump(2) << "\n";
  }
  m.metrics = {{"param", to_string(param)}, {"points", pts}};
  finish(m, "sweep", {base + ".csv", base + ".json"}, since(t0));
  write_sweep_csv(out_, r);
  for (const auto& p : r.points)
    for (const auto& e : p.errors) err_ << "run failed at " << p.value << ": " << e << "\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"FLEX link prediction pipeline"};
  app.require_subcommand(1);
  std::string dir = ".";
  std::optional<std::string> config;
  std::vector<std::string> sets;
  app.add_option("-d,--dir", dir, "work directory holding the stage outputs");
  app.add_option("-c,--config", config, "JSON config file");
  app.add_option("-s,--set", sets, "override, e.g. --set flex.gamma=0.75 (repeatable)");

  std::string model = "flex";
  auto* synth = app.add_subcommand("synth", "generate a synthetic graph into graph/");
  auto* split = app.add_subcommand("split", "cut a heuristic-shift split into split/");
  auto* gnn = app.add_subcommand("pretrain-gnn", "pretrain the GCN link predictor");
  auto* ggm = app.add_subcommand("pretrain-ggm", "pretrain the semi-implicit generator");
  auto* flex = app.add_subcommand("flex-tune", "co-train both pretrained models");
  auto* eval = app.add_subcommand("eval", "Hits@K of a stage's GNN checkpoint");
  eval->add_option("-m,--model", model, "stage directory (gnn, flex, flex-<ablation>)");
  auto* analyze = app.add_subcommand("analyze", "CN alignment and degree-bias reports");
  analyze->add_option("-m,--model", model, "stage with a generator (ggm, flex, ...)");
  auto* sweep = app.add_subcommand("sweep", "flex-tune over a parameter grid and seeds");
  for (auto* sub : {synth, split, gnn, ggm, flex, eval, analyze, sweep}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    kernels::configure_threads_from_env();
    Pipeline p(dir, RunConfig::load(config, sets), out, err);
    if (synth->parsed()) p.synth();
    else if (split->parsed()) p.split();
    else if (gnn->parsed()) p.pretrain_gnn();
    else if (ggm->parsed()) p.pretrain_ggm();
    else if (flex->parsed()) p.flex_tune();
    else if (eval->parsed()) p.eval(model);
    else if (analyze->parsed()) p.analyze(model);
    else if (sweep->parsed()) p.sweep();
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace flex::cli
