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

// Social learning network graphs: ingestion, snapshots and partitioning.

#ifndef FEDSLN_GRAPH_HPP_
#define FEDSLN_GRAPH_HPP_

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedsln/error.hpp"
#include "fedsln/rng.hpp"

namespace fedsln {

using NodeId = std::uint32_t;

// An unordered student pair, stored canonically with u < v.
struct NodePair {
  NodeId u = 0;
  NodeId v = 0;

  static NodePair Of(NodeId a, NodeId b) {
    return a < b ? NodePair{a, b} : NodePair{b, a};
  }
  auto operator<=>(const NodePair&) const = default;
};

// Undirected simple graph. Immutable after construction; neighbor lists are
// sorted so that set operations are linear merges.
class SlnGraph {
 public:
  SlnGraph() = default;

  // Builds a graph over `node_count` nodes. Duplicate edges are collapsed.
  // Throws ValidationError on self-loops or out-of-range endpoints.
  SlnGraph(std::size_t node_count, std::span<const NodePair> edges,
           std::vector<std::string> labels = {});

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::size_t degree(NodeId n) const { return adjacency_[n].size(); }
  const std::vector<NodeId>& neighbors(NodeId n) const {
    return adjacency_[n];
  }
  bool HasEdge(NodeId a, NodeId b) const;

  // External id of each node; empty for generated graphs.
  const std::vector<std::string>& labels() const { return labels_; }
  std::string LabelOf(NodeId n) const;

  // All edges, sorted, u < v.
  std::vector<NodePair> Edges() const;

  bool IsValidNode(NodeId n) const { return n < adjacency_.size(); }

  friend bool operator==(const SlnGraph&, const SlnGraph&) = default;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<std::string> labels_;
  std::size_t edge_count_ = 0;
};

// Reads "u<sep>v" lines (sep is a comma or whitespace, '#' starts a
// comment). Node tokens are mapped to dense ids in first-seen order.
SlnGraph LoadEdgeList(std::istream& in);
SlnGraph LoadEdgeListFile(const std::string& path);

// Writes sorted "u,v" lines over dense ids.
void WriteEdgeList(const SlnGraph& graph, std::ostream& out);

// Round-half-up used for every fractional count.
std::size_t RoundHalfUp(double x);

struct SplitSpec {
  double removal_fraction = 0.20;
  double train_fraction = 0.80;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Two consecutive snapshots. Edges of graph_prev are a subset of graph_now.
struct TemporalPair {
  SlnGraph graph_prev;
  SlnGraph graph_now;
  std::vector<NodePair> pair_universe;
  std::vector<NodePair> removed_pairs;  // sorted
};

// Selects round(removal_fraction * |universe|) pairs by seeded shuffle and
// deletes any edge between them to form the earlier snapshot.
TemporalPair TemporalSplit(const SlnGraph& graph_now,
                           std::vector<NodePair> pair_universe,
                           const SplitSpec& spec);

// Seeded shuffle then prefix split; |train| = round(train_fraction * n).
template <typename T>
std::pair<std::vector<T>, std::vector<T>> TrainTestSplit(
    std::vector<T> items, double train_fraction, std::uint64_t seed) {
  if (items.empty()) throw ValidationError("train/test split of empty input");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train_fraction must lie in (0, 1)");
  }
  Rng rng(seed);
  rng.Shuffle(std::span<T>(items));
  const std::size_t n_train = RoundHalfUp(train_fraction * items.size());
  std::vector<T> test(std::make_move_iterator(items.begin() + n_train),
                      std::make_move_iterator(items.end()));
  items.resize(n_train);
  return {std::move(items), std::move(test)};
}

struct SyntheticSpec {
  std::size_t n_nodes = 500;
  std::size_t n_communities = 4;
  double intra_p = 0.05;
  double inter_p = 0.005;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Stochastic block model; node i belongs to community i mod n_communities.
SlnGraph GenerateSynthetic(const SyntheticSpec& spec);

// Every linked pair plus round(ratio * #links) distinct unlinked pairs drawn
// uniformly without replacement. Returned sorted.
std::vector<NodePair> SamplePairUniverse(const SlnGraph& graph,
                                         double negatives_per_positive,
                                         std::uint64_t seed);

}  // namespace fedsln

#endif  // FEDSLN_GRAPH_HPP_
