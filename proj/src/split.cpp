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

#include "flex/split.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "flex/error.hpp"
#include "flex/rng.hpp"

namespace flex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t pair_key(NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

// Deliberately naive re-implementation used to audit splits: ordered sets
// and a plain BFS, sharing no code with the CSR heuristics.
class Oracle {
 public:
  explicit Oracle(const Graph& g) : adj_(g.num_nodes()) {
    for (auto [u, v] : g.edge_list()) {
      adj_[u].insert(v);
      adj_[v].insert(u);
    }
  }

  double value(Heuristic h, NodeId u, NodeId v) const {
    switch (h) {
      case Heuristic::cn: {
        std::size_t c = 0;
        for (NodeId w : adj_[u]) c += adj_[v].count(w);
        return static_cast<double>(c);
      }
      case Heuristic::pa:
        return static_cast<double>(adj_[u].size()) *
               static_cast<double>(adj_[v].size());
      case Heuristic::sp:
        return sp(u, v);
    }
    return 0;
  }

  bool has_edge(NodeId u, NodeId v) const { return adj_[u].count(v) > 0; }

 private:
  double sp(NodeId u, NodeId v) const {
    std::vector<double> dist(adj_.size(), kInf);
    std::deque<NodeId> q{u};
    dist[u] = 0;
    while (!q.empty()) {
      NodeId a = q.front();
      q.pop_front();
      for (NodeId b : adj_[a]) {
        if ((a == u && b == v) || (a == v && b == u)) continue;
        if (dist[b] == kInf) {
          dist[b] = dist[a] + 1;
          q.push_back(b);
        }
      }
    }
    return dist[v];
  }

  std::vector<std::set<NodeId>> adj_;
};

bool is_integral(double x) { return std::floor(x) == x; }

std::vector<std::pair<NodeId, NodeId>> pairs_of(const std::vector<Edge>& e) {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(e.size());
  for (const auto& x : e) out.emplace_back(x.u, x.v);
  return out;
}

}  // namespace

std::string to_string(Direction d) {
  return d == Direction::forward ? "forward" : "backward";
}

Direction direction_from_string(const std::string& s) {
  if (s == "forward") return Direction::forward;
  if (s == "backward") return Direction::backward;
  throw ConfigError("unknown split direction '" + s + "'");
}

std::string to_string(Part p) {
  static const char* names[] = {"train", "valid", "test"};
  return names[static_cast<int>(p)];
}

void SplitSpec::validate() const {
  for (double t : {t1, t2}) {
    if (!std::isfinite(t) || t < 0)
      throw ConfigError("split thresholds must be finite and non-negative");
    if (heuristic != Heuristic::pa && !is_integral(t))
      throw ConfigError("CN/SP split thresholds must be integers");
  }
  if (t1 == t2) throw ConfigError("split thresholds must differ");
  if (!(neg_ratio > 0) || !std::isfinite(neg_ratio))
    throw ConfigError("neg_ratio must be positive");
}

std::array<Bucket, 3> bucket_ranges(const SplitSpec& spec) {
  const double lo = std::min(spec.t1, spec.t2);
  const double hi = std::max(spec.t1, spec.t2);
  if (spec.direction == Direction::forward)
    return {Bucket{0, lo}, Bucket{lo, hi}, Bucket{hi, kInf}};
  return {Bucket{hi, kInf}, Bucket{lo, hi}, Bucket{0, lo}};
}

std::string threshold_note(const SplitSpec& spec) {
  auto b = bucket_ranges(spec);
  auto fmt = [](const Bucket& x) {
    std::ostringstream s;
    s << "[" << x.lo << ", " << x.hi << ")";
    return s.str();
  };
  std::ostringstream s;
  s << to_string(spec.heuristic) << " " << to_string(spec.direction) << " ("
    << spec.t1 << ", " << spec.t2 << "): train " << fmt(b[0]) << ", valid "
    << fmt(b[1]) << ", test " << fmt(b[2]);
  const bool given_ascending = spec.t1 < spec.t2;
  const bool expected_ascending = spec.direction == Direction::forward;
  if (given_ascending != expected_ascending)
    s << "; thresholds were given in the opposite order and read as "
         "(lower, upper) bounds of the valid range";
  return s.str();
}

std::vector<Edge> sample_negatives(const Graph& g, std::size_t count,
                                   std::uint64_t seed) {
  const std::size_t n = g.num_nodes();
  const std::size_t pairs = n < 2 ? 0 : n * (n - 1) / 2;
  const std::size_t available = pairs - g.edge_count();
  if (count > available)
    throw InputError("cannot sample " + std::to_string(count) +
                     " negatives: only " + std::to_string(available) +
                     " non-edges");
  Rng rng(seed);
  std::vector<Edge> out;
  out.reserve(count);
  if (count * 2 <= available) {
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
    std::unordered_set<std::uint64_t> seen;
    while (out.size() < count) {
      NodeId u = pick(rng), v = pick(rng);
      if (u == v || g.has_edge(u, v)) continue;
      if (!seen.insert(pair_key(u, v)).second) continue;
      out.push_back({std::min(u, v), std::max(u, v), LinkLabel::negative});
    }
    return out;
  }
  // dense regime: enumerate and partially shuffle
  std::vector<Edge> all;
  all.reserve(available);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (!g.has_edge(u, v)) all.push_back({u, v, LinkLabel::negative});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> d(i, all.size() - 1);
    std::swap(all[i], all[d(rng)]);
  }
  all.resize(count);
  return all;
}

namespace {

DatasetSplit assemble(const Graph& g, const SplitSpec& spec,
                      std::array<std::vector<Edge>, 3> pos,
                      std::array<std::vector<Edge>, 3> neg) {
  DatasetSplit s;
  s.spec = spec;
  s.pos = std::move(pos);
  s.neg = std::move(neg);
  auto train = pairs_of(s.pos[0]);
  s.observed = g.with_edges(train);
  s.evaluation = spec.full_adjacency ? g : s.observed;
  return s;
}

}  // namespace

DatasetSplit generate_split(const Graph& g, const SplitSpec& spec) {
  spec.validate();
  if (g.edge_count() == 0) throw InputError("cannot split a graph without edges");

  std::vector<Edge> edges;
  for (auto [u, v] : g.edge_list()) edges.push_back({u, v, LinkLabel::positive});
  const auto values = heuristic_values(g, spec.heuristic, edges);
  const auto buckets = bucket_ranges(spec);

  std::array<std::vector<Edge>, 3> pos;
  for (std::size_t i = 0; i < edges.size(); ++i)
    for (int b = 0; b < 3; ++b)
      if (buckets[b].contains(values[i])) {
        pos[b].push_back(edges[i]);
        break;
      }
  for (int b = 0; b < 3; ++b)
    if (pos[b].empty())
      throw DegenerateSplitError(to_string(static_cast<Part>(b)));

  std::array<std::size_t, 3> want{};
  std::size_t total = 0;
  for (int b = 0; b < 3; ++b) {
    want[b] = std::max<std::size_t>(
        spec.min_negatives,
        static_cast<std::size_t>(std::ceil(spec.neg_ratio * pos[b].size())));
    total += want[b];
  }
  auto sampled = sample_negatives(g, total, stream_seed(spec.seed, "negatives"));
  std::array<std::vector<Edge>, 3> neg;
  auto it = sampled.begin();
  for (int b = 0; b < 3; ++b) {
    neg[b].assign(it, it + static_cast<std::ptrdiff_t>(want[b]));
    it += static_cast<std::ptrdiff_t>(want[b]);
  }
  return assemble(g, spec, std::move(pos), std::move(neg));
}

SplitReport audit_split(const Graph& g, const DatasetSplit& split) {
  SplitReport r;
  r.note = threshold_note(split.spec);
  const Oracle oracle(g);
  const auto buckets = bucket_ranges(split.spec);
  std::unordered_set<std::uint64_t> seen_pos, seen_neg;
  const std::size_t n = g.num_nodes();
  auto in_range = [&](const Edge& e) { return e.u < n && e.v < n && e.u != e.v; };

  for (int b = 0; b < 3; ++b) {
    const auto part = to_string(static_cast<Part>(b));
    std::vector<double> values;
    for (const auto& e : split.pos[b]) {
      if (!in_range(e) || !oracle.has_edge(e.u, e.v)) {
        r.violations.push_back({e, part + " positive is not an edge"});
        continue;
      }
      if (!seen_pos.insert(pair_key(e.u, e.v)).second)
        r.violations.push_back({e, part + " positive appears twice"});
      const double v = oracle.value(split.spec.heuristic, e.u, e.v);
      values.push_back(v);
      if (!buckets[b].contains(v))
        r.violations.push_back(
            {e, part + " positive has " + to_string(split.spec.heuristic) + "=" +
                    std::to_string(v) + " outside its bucket"});
    }
    r.pos_counts[b] = split.pos[b].size();
    r.histograms[b] = make_histogram(split.spec.heuristic, values, part);

    if (split.neg[b].empty())
      r.violations.push_back({Edge{}, part + " negative set is empty"});
    for (const auto& e : split.neg[b]) {
      if (!in_range(e)) {
        r.violations.push_back({e, part + " negative has invalid endpoints"});
      } else if (oracle.has_edge(e.u, e.v)) {
        r.violations.push_back({e, part + " negative is an edge"});
      } else if (!seen_neg.insert(pair_key(e.u, e.v)).second) {
        r.violations.push_back({e, part + " negative appears twice"});
      }
    }
    r.neg_counts[b] = split.neg[b].size();
  }
  if (seen_pos.size() != g.edge_count())
    r.violations.push_back(
        {Edge{}, std::to_string(g.edge_count() - std::min(g.edge_count(), seen_pos.size())) +
                     " edges are not assigned to any bucket"});

  std::set<std::uint64_t> train;
  for (const auto& e : split.pos[0]) train.insert(pair_key(e.u, e.v));
  std::set<std::uint64_t> observed;
  for (auto [u, v] : split.observed.edge_list()) observed.insert(pair_key(u, v));
  if (train != observed)
    r.violations.push_back({Edge{}, "observed graph differs from train positives"});
  return r;
}

SplitReport verify_split(const Graph& g, const DatasetSplit& split) {
  auto r = audit_split(g, split);
  if (!r.violations.empty()) {
    std::ostringstream s;
    s << r.violations.size() << " split violation(s):";
    std::size_t shown = 0;
    for (const auto& v : r.violations) {
      if (shown++ == 20) {
        s << " ...";
        break;
      }
      s << " (" << v.edge.u << "," << v.edge.v << ") " << v.what << ";";
    }
    throw ValidationError(s.str());
  }
  return r;
}

namespace {

nlohmann::json edges_json(const std::vector<Edge>& e) {
  auto a = nlohmann::json::array();
  for (const auto& x : e) a.push_back({x.u, x.v});
  return a;
}

std::vector<Edge> edges_from(const nlohmann::json& j, LinkLabel label) {
  std::vector<Edge> out;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2)
      throw InputError("split file: edge entries must be [u, v] pairs");
    out.push_back({p[0].get<NodeId>(), p[1].get<NodeId>(), label});
  }
  return out;
}

const char* kPosKeys[] = {"train_pos", "valid_pos", "test_pos"};
const char* kNegKeys[] = {"train_neg", "valid_neg", "test_neg"};

}  // namespace

void save_split(const std::string& path, const DatasetSplit& split) {
  const auto& sp = split.spec;
  nlohmann::json j;
  j["format"] = "flexlp-split";
  j["version"] = 1;
  j["spec"] = {{"heuristic", to_string(sp.heuristic)},
               {"direction", to_string(sp.direction)},
               {"t1", sp.t1},
               {"t2", sp.t2},
               {"neg_ratio", sp.neg_ratio},
               {"min_negatives", sp.min_negatives},
               {"full_adjacency", sp.full_adjacency}};
  j["seed"] = sp.seed;
  j["note"] = threshold_note(sp);
  for (int b = 0; b < 3; ++b) {
    j[kPosKeys[b]] = edges_json(split.pos[b]);
    j[kNegKeys[b]] = edges_json(split.neg[b]);
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write split file " + path);
  out << j.dump() << "\n";
}

DatasetSplit load_split(const std::string& path, const Graph& g) {
  std::ifstream in(path);
  if (!in) throw DependencyError("split file not found: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    if (j.value("format", "") != "flexlp-split")
      throw InputError("split file: not a flexlp split");
    const auto& s = j.at("spec");
    SplitSpec spec;
    spec.heuristic = heuristic_from_string(s.at("heuristic").get<std::string>());
    spec.direction = direction_from_string(s.at("direction").get<std::string>());
    spec.t1 = s.at("t1").get<double>();
    spec.t2 = s.at("t2").get<double>();
    spec.neg_ratio = s.at("neg_ratio").get<double>();
    spec.min_negatives = s.at("min_negatives").get<std::size_t>();
    spec.full_adjacency = s.at("full_adjacency").get<bool>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.validate();
    std::array<std::vector<Edge>, 3> pos, neg;
    for (int b = 0; b < 3; ++b) {
      pos[b] = edges_from(j.at(kPosKeys[b]), LinkLabel::positive);
      neg[b] = edges_from(j.at(kNegKeys[b]), LinkLabel::negative);
      for (const auto& e : pos[b])
        if (e.u >= g.num_nodes() || e.v >= g.num_nodes() || e.u == e.v)
          throw ValidationError("split file: positive (" + std::to_string(e.u) +
                                "," + std::to_string(e.v) + ") is out of range");
    }
    auto split = assemble(g, spec, std::move(pos), std::move(neg));
    verify_split(g, split);
    return split;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("split file " + path + ": " + e.what());
  }
}

}  // namespace flex
