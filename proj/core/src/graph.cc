/*
 * Copyright 2026 The fedsln Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fedsln/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace fedsln {

SlnGraph::SlnGraph(std::size_t node_count, std::span<const NodePair> edges,
                   std::vector<std::string> labels)
    : adjacency_(node_count), labels_(std::move(labels)) {
  if (!labels_.empty() && labels_.size() != node_count) {
    throw ValidationError("label count does not match node count");
  }
  for (const NodePair& e : edges) {
    if (e.u == e.v) {
      throw ValidationError("self-loop on node " + LabelOf(e.u));
    }
    if (e.u >= node_count || e.v >= node_count) {
      throw ValidationError("edge endpoint out of range");
    }
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    edge_count_ += list.size();
  }
  edge_count_ /= 2;
}

bool SlnGraph::HasEdge(NodeId a, NodeId b) const {
  if (!IsValidNode(a) || !IsValidNode(b)) return false;
  const auto& list = adjacency_[a];
  return std::binary_search(list.begin(), list.end(), b);
}

std::string SlnGraph::LabelOf(NodeId n) const {
  if (n < labels_.size()) return labels_[n];
  return std::to_string(n);
}

std::vector<NodePair> SlnGraph::Edges() const {
  std::vector<NodePair> out;
  out.reserve(edge_count_);
  for (NodeId u = 0; u < adjacency_.size(); ++u) {
    for (NodeId v : adjacency_[u]) {
      if (u < v) out.push_back({u, v});
    }
  }
  return out;
}

namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> SplitTokens(const std::string& line) {
  std::vector<std::string> tokens;
  if (line.find(',') != std::string::npos) {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) tokens.push_back(Trim(tok));
    if (!line.empty() && line.back() == ',') tokens.emplace_back();
  } else {
    std::stringstream ss(line);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
  }
  return tokens;
}

}  // namespace

SlnGraph LoadEdgeList(std::istream& in) {
  std::unordered_map<std::string, NodeId> ids;
  std::vector<std::string> labels;
  std::vector<NodePair> edges;
  auto intern = [&](const std::string& token) {
    auto [it, inserted] =
        ids.emplace(token, static_cast<NodeId>(labels.size()));
    if (inserted) labels.push_back(token);
    return it->second;
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = Trim(raw.substr(0, hash));
    if (line.empty()) continue;
    const auto tokens = SplitTokens(line);
    if (tokens.size() != 2 || tokens[0].empty() || tokens[1].empty()) {
      throw ParseError("expected two node ids, got \"" + line + "\"",
                       line_no);
    }
    if (tokens[0] == tokens[1]) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": self-loop on node " + tokens[0]);
    }
    const NodeId a = intern(tokens[0]);
    const NodeId b = intern(tokens[1]);
    edges.push_back(NodePair::Of(a, b));
  }
  const std::size_t n = labels.size();
  return SlnGraph(n, edges, std::move(labels));
}

SlnGraph LoadEdgeListFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open edge list " + path);
  return LoadEdgeList(in);
}

void WriteEdgeList(const SlnGraph& graph, std::ostream& out) {
  for (const NodePair& e : graph.Edges()) out << e.u << ',' << e.v << '\n';
}

std::size_t RoundHalfUp(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

void SplitSpec::Validate() const {
  if (!(removal_fraction >= 0.0 && removal_fraction <= 1.0)) {
    throw ValidationError("removal_fraction must lie in [0, 1]");
  }
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    throw ValidationError("train_fraction must lie in [0, 1]");
  }
}

TemporalPair TemporalSplit(const SlnGraph& graph_now,
                           std::vector<NodePair> pair_universe,
                           const SplitSpec& spec) {
  spec.Validate();
  for (NodePair& p : pair_universe) {
    if (!graph_now.IsValidNode(p.u) || !graph_now.IsValidNode(p.v)) {
      throw ValidationError("pair references a node outside the graph");
    }
    if (p.u == p.v) throw ValidationError("pair universe contains a self-pair");
    p = NodePair::Of(p.u, p.v);
  }

  std::vector<std::size_t> order(pair_universe.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.Shuffle(std::span<std::size_t>(order));
  const std::size_t n_selected =
      RoundHalfUp(spec.removal_fraction * pair_universe.size());

  std::vector<NodePair> selected;
  selected.reserve(n_selected);
  for (std::size_t i = 0; i < n_selected; ++i) {
    selected.push_back(pair_universe[order[i]]);
  }
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()),
                 selected.end());

  std::vector<NodePair> kept;
  for (const NodePair& e : graph_now.Edges()) {
    if (!std::binary_search(selected.begin(), selected.end(), e)) {
      kept.push_back(e);
    }
  }

  TemporalPair tp;
  tp.graph_prev = SlnGraph(graph_now.node_count(), kept, graph_now.labels());
  tp.graph_now = graph_now;
  tp.pair_universe = std::move(pair_universe);
  tp.removed_pairs = std::move(selected);
  return tp;
}

void SyntheticSpec::Validate() const {
  if (n_communities < 1) throw ValidationError("n_communities must be >= 1");
  if (!(inter_p >= 0.0 && inter_p <= 1.0 && intra_p >= 0.0 &&
        intra_p <= 1.0)) {
    throw ValidationError("link probabilities must lie in [0, 1]");
  }
  if (inter_p > intra_p) {
    throw ValidationError("inter_p must not exceed intra_p");
  }
}

SlnGraph GenerateSynthetic(const SyntheticSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed);
  std::vector<NodePair> edges;
  const std::size_t n = spec.n_nodes;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      const bool same = (u % spec.n_communities) == (v % spec.n_communities);
      const double p = same ? spec.intra_p : spec.inter_p;
      // Draw unconditionally so the stream does not depend on p.
      if (rng.Uniform() < p) edges.push_back({u, v});
    }
  }
  return SlnGraph(n, edges);
}

std::vector<NodePair> SamplePairUniverse(const SlnGraph& graph,
                                         double negatives_per_positive,
                                         std::uint64_t seed) {
  if (!(negatives_per_positive >= 0.0)) {
    throw ValidationError("negatives_per_positive must be >= 0");
  }
  std::vector<NodePair> universe = graph.Edges();
  const std::size_t n = graph.node_count();
  const std::size_t total_pairs = n < 2 ? 0 : n * (n - 1) / 2;
  const std::size_t available = total_pairs - graph.edge_count();
  const std::size_t wanted =
      RoundHalfUp(negatives_per_positive * graph.edge_count());
  if (wanted > available) {
    throw ValidationError("requested " + std::to_string(wanted) +
                          " negative pairs but only " +
                          std::to_string(available) + " unlinked pairs exist");
  }
  if (wanted == 0) return universe;

  Rng rng(seed);
  if (wanted * 2 <= available) {
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(wanted * 2);
    while (chosen.size() < wanted) {
      const auto a = static_cast<NodeId>(rng.Below(n));
      const auto b = static_cast<NodeId>(rng.Below(n));
      if (a == b || graph.HasEdge(a, b)) continue;
      const NodePair p = NodePair::Of(a, b);
      if (chosen.insert(static_cast<std::uint64_t>(p.u) * n + p.v).second) {
        universe.push_back(p);
      }
    }
  } else {
    std::vector<NodePair> unlinked;
    unlinked.reserve(available);
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (!graph.HasEdge(u, v)) unlinked.push_back({u, v});
      }
    }
    rng.Shuffle(std::span<NodePair>(unlinked));
    universe.insert(universe.end(), unlinked.begin(),
                    unlinked.begin() + static_cast<std::ptrdiff_t>(wanted));
  }
  std::sort(universe.begin(), universe.end());
  return universe;
}

}  // namespace fedsln
