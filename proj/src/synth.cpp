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

#include "flex/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "flex/error.hpp"

namespace flex {

std::vector<std::pair<NodeId, NodeId>> sbm_edges(
    const std::vector<std::size_t>& sizes,
    const std::vector<std::vector<double>>& prob, Rng& rng) {
  const std::size_t k = sizes.size();
  if (prob.size() != k) throw ConfigError("sbm: probability matrix must be k x k");
  for (std::size_t a = 0; a < k; ++a) {
    if (prob[a].size() != k) throw ConfigError("sbm: probability matrix must be k x k");
    for (std::size_t b = 0; b < k; ++b) {
      if (!(prob[a][b] >= 0 && prob[a][b] <= 1))
        throw ConfigError("sbm: probabilities must lie in [0, 1]");
      if (prob[a][b] != prob[b][a]) throw ConfigError("sbm: matrix must be symmetric");
    }
  }
  std::vector<std::uint32_t> block;
  for (std::size_t b = 0; b < k; ++b) block.insert(block.end(), sizes[b], b);
  const std::size_t n = block.size();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (unit(rng) < prob[block[u]][block[v]]) edges.emplace_back(u, v);
  return edges;
}

std::vector<std::pair<NodeId, NodeId>> barabasi_albert_edges(std::size_t n,
                                                             std::size_t m,
                                                             Rng& rng) {
  if (m < 1 || m >= n) throw ConfigError("barabasi-albert: need 1 <= m < n");
  std::vector<std::pair<NodeId, NodeId>> edges;
  // every endpoint once per incident edge, so uniform picks are degree-biased
  std::vector<NodeId> ends;
  for (NodeId u = 0; u < m; ++u)
    for (NodeId v = u + 1; v < m; ++v) {
      edges.emplace_back(u, v);
      ends.push_back(u);
      ends.push_back(v);
    }
  for (NodeId v = static_cast<NodeId>(m); v < n; ++v) {
    std::set<NodeId> targets;
    if (ends.empty()) {
      // m == 1 seed graph has no edges yet
      targets.insert(0);
    }
    while (targets.size() < m) {
      std::uniform_int_distribution<std::size_t> pick(0, ends.size() - 1);
      targets.insert(ends[pick(rng)]);
    }
    for (NodeId t : targets) {
      edges.emplace_back(t, v);
      ends.push_back(t);
      ends.push_back(v);
    }
  }
  return edges;
}

std::vector<std::pair<NodeId, NodeId>> erdos_renyi_edges(std::size_t n,
                                                         double p, Rng& rng) {
  if (!(p >= 0 && p <= 1)) throw ConfigError("erdos-renyi: p must lie in [0, 1]");
  return sbm_edges({n}, {{p}}, rng);
}

Tensor community_features(const std::vector<std::uint32_t>& community,
                          std::size_t dim, Rng& rng, double separation) {
  if (dim == 0) throw ConfigError("community features need dim >= 1");
  const std::size_t k =
      community.empty() ? 0 : *std::max_element(community.begin(), community.end()) + 1;
  std::normal_distribution<double> nd;
  Tensor centres(k, dim);
  for (auto& c : centres.values()) c = nd(rng);
  Tensor x(community.size(), dim);
  for (std::size_t i = 0; i < community.size(); ++i)
    for (std::size_t j = 0; j < dim; ++j)
      x(i, j) = centres(community[i], j) * separation + nd(rng);
  return x;
}

std::string to_string(Family f) {
  switch (f) {
    case Family::sbm: return "sbm";
    case Family::ba: return "ba";
    case Family::er: return "er";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "sbm") return Family::sbm;
  if (s == "ba") return Family::ba;
  if (s == "er") return Family::er;
  throw ConfigError("unknown graph family '" + s + "' (expected sbm, ba or er)");
}

void SyntheticGraphSpec::validate() const {
  if (n < 10) throw ConfigError("synthetic graphs need n >= 10");
  auto prob_ok = [](double x) { return x >= 0 && x <= 1; };
  switch (family) {
    case Family::sbm:
      if (blocks < 1 || blocks > n) throw ConfigError("sbm: need 1 <= blocks <= n");
      if (!prob_ok(p_in) || !prob_ok(p_out))
        throw ConfigError("sbm: p_in and p_out must lie in [0, 1]");
      if (!rings.empty()) {
        const auto total = std::accumulate(rings.begin(), rings.end(), std::size_t{0});
        if (total != blocks) throw ConfigError("sbm: ring lengths must sum to blocks");
        for (auto r : rings)
          if (r == 0) throw ConfigError("sbm: ring lengths must be positive");
      }
      break;
    case Family::ba:
      if (m < 1 || m >= n) throw ConfigError("ba: need 1 <= m < n");
      break;
    case Family::er:
      if (!prob_ok(p)) throw ConfigError("er: p must lie in [0, 1]");
      break;
  }
  if (features.rfind("community-gaussian:", 0) == 0 && family != Family::sbm)
    throw ConfigError("community-gaussian features need an sbm graph");
}

SyntheticGraph synthesize(const SyntheticGraphSpec& spec) {
  spec.validate();
  auto rng = make_stream(spec.seed, "graph");
  SyntheticGraph out;
  out.community.assign(spec.n, 0);
  std::vector<std::pair<NodeId, NodeId>> edges;
  switch (spec.family) {
    case Family::sbm: {
      std::vector<std::size_t> sizes(spec.blocks, spec.n / spec.blocks);
      for (std::size_t b = 0; b < spec.n % spec.blocks; ++b) ++sizes[b];
      std::vector<std::vector<double>> prob(spec.blocks,
                                            std::vector<double>(spec.blocks, 0.0));
      for (std::size_t a = 0; a < spec.blocks; ++a) prob[a][a] = spec.p_in;
      if (spec.rings.empty()) {
        for (std::size_t a = 0; a < spec.blocks; ++a)
          for (std::size_t b = 0; b < spec.blocks; ++b)
            if (a != b) prob[a][b] = spec.p_out;
      } else {
        std::size_t start = 0;
        for (std::size_t len : spec.rings) {
          for (std::size_t i = 0; len > 1 && i < len; ++i) {
            const std::size_t a = start + i, b = start + (i + 1) % len;
            prob[a][b] = prob[b][a] = spec.p_out;
          }
          start += len;
        }
      }
      edges = sbm_edges(sizes, prob, rng);
      std::size_t node = 0;
      for (std::size_t b = 0; b < spec.blocks; ++b)
        for (std::size_t i = 0; i < sizes[b]; ++i) out.community[node++] = b;
      break;
    }
    case Family::ba:
      edges = barabasi_albert_edges(spec.n, spec.m, rng);
      break;
    case Family::er:
      edges = erdos_renyi_edges(spec.n, spec.p, rng);
      break;
  }
  if (edges.empty()) out.warnings.push_back("generated graph has no edges");

  auto g = Graph::from_edges(spec.n, edges);
  const std::string cg = "community-gaussian:";
  if (spec.features.rfind(cg, 0) == 0) {
    std::size_t dim = 0;
    try {
      dim = std::stoul(spec.features.substr(cg.size()));
    } catch (const std::exception&) {
      throw ConfigError("bad feature mode '" + spec.features + "'");
    }
    auto frng = make_stream(spec.seed, "features");
    out.graph = g.with_features(community_features(out.community, dim, frng));
  } else {
    out.graph = g.with_features(synthetic_features(g, spec.features));
  }
  return out;
}

}  // namespace flex
