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

#include "flex/analysis.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include <omp.h>

#include "flex/error.hpp"

namespace flex {

HeuristicHistogram cn_distribution(const GeneratedSample& s, std::string source) {
  if (s.targets.size() != s.layout.count())
    throw InputError("cn_distribution: " + std::to_string(s.layout.count()) + " blocks but " +
                     std::to_string(s.targets.size()) + " targets");
  const auto& l = s.layout;
  std::vector<double> cn(l.count(), 0.0);
  for (std::size_t b = 0; b < l.count(); ++b) {
    const std::size_t n = l.sizes[b], off = l.entry_offsets[b];
    const auto [u, v] = s.targets[b];
    if (u >= n || v >= n) throw InputError("cn_distribution: target outside its block");
    for (std::size_t w = 0; w < n; ++w)
      if (w != u && w != v) cn[b] += s.adjacency[off + u * n + w] && s.adjacency[off + v * n + w];
  }
  return make_histogram(Heuristic::cn, cn, std::move(source));
}

HeuristicHistogram cn_distribution(const std::vector<LabeledSubgraph>& subs,
                                   std::string source) {
  std::vector<double> cn;
  cn.reserve(subs.size());
  for (const auto& s : subs) {
    if (s.size() < 2) throw InputError("cn_distribution: subgraph without targets");
    std::vector<std::uint8_t> nu(s.size(), 0), nv(s.size(), 0);
    for (auto [a, b] : s.edges) {
      if (a == LabeledSubgraph::target_u) nu[b] = 1;
      if (b == LabeledSubgraph::target_u) nu[a] = 1;
      if (a == LabeledSubgraph::target_v) nv[b] = 1;
      if (b == LabeledSubgraph::target_v) nv[a] = 1;
    }
    double c = 0;
    for (std::size_t w = 2; w < s.size(); ++w) c += nu[w] && nv[w];
    cn.push_back(c);
  }
  return make_histogram(Heuristic::cn, cn, std::move(source));
}

Graph full_graph(const DatasetSplit& split) {
  auto edges = split.observed.edge_list();
  for (const auto* part : {&split.valid_pos(), &split.test_pos()})
    for (const auto& e : *part) edges.push_back(e.key());
  return Graph::from_edges(split.observed.num_nodes(), edges, split.observed.features());
}

HeuristicHistogram part_histogram(const DatasetSplit& split, Part part, Heuristic h) {
  static const char* names[] = {"train", "valid", "test"};
  const auto& links = split.pos[static_cast<int>(part)];
  const auto values = heuristic_values(full_graph(split), h, links);
  return make_histogram(h, values, names[static_cast<int>(part)]);
}

std::string AlignmentReport::improvement_str() const {
  if (!improvement) return "exact";
  std::ostringstream s;
  s << *improvement << "x";
  return s.str();
}

AlignmentReport alignment_report(const HeuristicHistogram& train,
                                 const HeuristicHistogram& valid,
                                 const HeuristicHistogram& generated) {
  if (train.heuristic != valid.heuristic || train.heuristic != generated.heuristic)
    throw InputError("alignment_report: histograms of different heuristics (" +
                     train.heuristic + ", " + valid.heuristic + ", " + generated.heuristic +
                     ")");
  AlignmentReport r;
  r.heuristic = train.heuristic;
  r.train_mean = train.mean;
  r.valid_mean = valid.mean;
  r.generated_mean = generated.mean;
  r.generated_gap = std::abs(generated.mean - valid.mean);
  r.train_gap = std::abs(train.mean - valid.mean);
  if (r.generated_gap > 0) r.improvement = r.train_gap / r.generated_gap;
  return r;
}

std::pair<double, double> least_squares_fit(std::span<const double> x,
                                            std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("least_squares_fit", "x and y differ in length");
  if (x.empty()) throw InputError("least_squares_fit: no points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) return {0.0, my};
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

namespace {

void scan_into(const GeneratedSample& s, std::vector<DegreeBiasPoint>& out) {
  const auto& l = s.layout;
  for (std::size_t b = 0; b < l.count(); ++b) {
    const std::size_t n = l.sizes[b], off = l.entry_offsets[b];
    DegreeBiasPoint p;
    p.nodes = n;
    if (n >= 2) {
      // sum over pairs of CN = sum over w of C(deg(w), 2)
      double total = 0;
      for (std::size_t w = 0; w < n; ++w) {
        double d = 0;
        for (std::size_t j = 0; j < n; ++j) d += s.adjacency[off + w * n + j];
        total += d * (d - 1) / 2;
      }
      p.mean_cn = total / (static_cast<double>(n) * static_cast<double>(n - 1) / 2);
    }
    out.push_back(p);
  }
}

DegreeBiasScan fit(std::vector<DegreeBiasPoint> pts) {
  if (pts.empty()) throw InputError("degree_bias_scan: no samples");
  DegreeBiasScan scan;
  std::vector<double> x, y;
  for (const auto& p : pts) {
    x.push_back(static_cast<double>(p.nodes));
    y.push_back(p.mean_cn);
  }
  std::tie(scan.slope, scan.intercept) = least_squares_fit(x, y);
  scan.points = std::move(pts);
  return scan;
}

}  // namespace

DegreeBiasScan degree_bias_scan(const GeneratedSample& s) {
  std::vector<DegreeBiasPoint> pts;
  scan_into(s, pts);
  return fit(std::move(pts));
}

DegreeBiasScan degree_bias_scan(const std::vector<GeneratedSample>& samples) {
  std::vector<DegreeBiasPoint> pts;
  for (const auto& s : samples) scan_into(s, pts);
  return fit(std::move(pts));
}

std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::gamma: return "gamma";
    case SweepParam::lr_gnn: return "lr_gnn";
    case SweepParam::alpha: return "alpha";
  }
  return "gamma";
}

SweepParam sweep_param_from_string(const std::string& s) {
  for (auto p : {SweepParam::gamma, SweepParam::lr_gnn, SweepParam::alpha})
    if (s == to_string(p)) return p;
  throw ConfigError("unknown sweep parameter '" + s + "' (gamma, lr_gnn, alpha)");
}

void set_sweep_param(FlexConfig& cfg, SweepParam p, double value) {
  switch (p) {
    case SweepParam::gamma: cfg.gamma = value; break;
    case SweepParam::lr_gnn: cfg.lr_gnn = value; break;
    case SweepParam::alpha: cfg.alpha = value; break;
  }
}

SweepResult run_sweep(SweepParam param, const std::vector<double>& grid,
                      const FlexConfig& base, const std::vector<SweepCase>& cases) {
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  if (cases.empty()) throw ConfigError("sweep needs at least one seed");
  SweepResult r;
  r.param = param;
  r.points.resize(grid.size());
  const std::size_t jobs = grid.size() * cases.size();
  std::vector<double> valid(jobs), test(jobs);
  std::vector<std::string> error(jobs);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t j = 0; j < jobs; ++j) {
    const auto& c = cases[j % cases.size()];
    FlexConfig cfg = base;
    cfg.seed = c.seed;
    set_sweep_param(cfg, param, grid[j / cases.size()]);
    try {
      auto res = flex_tune(*c.gnn, *c.ggm, *c.split, cfg);
      valid[j] = res.best_valid;
      test[j] = evaluate_hits(res.gnn, c.split->evaluation, c.split->test_pos(),
                              c.split->test_neg(), cfg.eval_k);
    } catch (const std::exception& e) {
      error[j] = "seed " + std::to_string(c.seed) + ": " + e.what();
    }
  }

  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto& p = r.points[i];
    p.value = grid[i];
    for (std::size_t k = 0; k < cases.size(); ++k) {
      const std::size_t j = i * cases.size() + k;
      if (!error[j].empty()) {
        p.errors.push_back(error[j]);
        continue;
      }
      p.valid_hits.push_back(valid[j]);
      p.test_hits.push_back(test[j]);
    }
    if (p.test_hits.empty()) continue;
    const double n = static_cast<double>(p.test_hits.size());
    p.mean = std::accumulate(p.test_hits.begin(), p.test_hits.end(), 0.0) / n;
    double ss = 0;
    for (double v : p.test_hits) ss += (v - p.mean) * (v - p.mean);
    p.stddev = std::sqrt(ss / n);
  }
  return r;
}

void write_histogram_csv(std::ostream& out, const std::vector<HeuristicHistogram>& hs) {
  out << "source,heuristic,lo,hi,count\n";
  for (const auto& h : hs)
    for (std::size_t i = 0; i < h.counts.size(); ++i)
      out << h.source << "," << h.heuristic << "," << h.edges[i] << "," << h.edges[i + 1] << ","
          << h.counts[i] << "\n";
}

void write_degree_bias_csv(std::ostream& out, const DegreeBiasScan& scan) {
  out << "nodes,mean_cn\n";
  out.precision(10);
  for (const auto& p : scan.points) out << p.nodes << "," << p.mean_cn << "\n";
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << to_string(r.param) << ",runs,mean_test_hits,std_test_hits,failures\n";
  out.precision(10);
  for (const auto& p : r.points)
    out << p.value << "," << p.test_hits.size() << "," << p.mean << "," << p.stddev << ","
        << p.errors.size() << "\n";
}

}  // namespace flex
