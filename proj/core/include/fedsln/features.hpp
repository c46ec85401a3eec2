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

// Neighborhood similarity features for link prediction, and the two-sample
// Kolmogorov-Smirnov statistic used to compare feature distributions.

#ifndef FEDSLN_FEATURES_HPP_
#define FEDSLN_FEATURES_HPP_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "fedsln/graph.hpp"

namespace fedsln {

inline constexpr std::size_t kNumFeatures = 6;

enum FeatureIndex : std::size_t {
  kJaccard = 0,
  kAdamicAdar,
  kResourceAllocation,
  kPreferentialAttachment,
  kCosine,
  kDice,
};

inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "jaccard", "adamic_adar",       "resource_allocation",
    "preferential_attachment", "cosine", "dice"};

using FeatureVector = std::array<double, kNumFeatures>;

// All six functions require u != v and valid node ids (ValidationError
// otherwise). 0/0 cases resolve to 0.
double Jaccard(const SlnGraph& g, NodeId u, NodeId v);
double AdamicAdar(const SlnGraph& g, NodeId u, NodeId v);
double ResourceAllocation(const SlnGraph& g, NodeId u, NodeId v);
double PreferentialAttachment(const SlnGraph& g, NodeId u, NodeId v);
double Cosine(const SlnGraph& g, NodeId u, NodeId v);
double Dice(const SlnGraph& g, NodeId u, NodeId v);

// All six features with a single neighbor-list merge.
FeatureVector ComputeFeatures(const SlnGraph& g, NodeId u, NodeId v);

struct PairExample {
  NodeId u = 0;
  NodeId v = 0;
  FeatureVector features{};
  int label = 0;
};

// Features from graph_prev, label from graph_now, order preserved. Every
// pair must belong to tp.pair_universe.
std::vector<PairExample> BuildExamples(const TemporalPair& tp,
                                       std::span<const NodePair> pairs);

// CSV: u,v,<six features>,label with a header row.
void WriteExamplesCsv(std::span<const PairExample> examples, std::ostream& out);
std::vector<PairExample> ReadExamplesCsv(std::istream& in);

// sup_x |F_a(x) - F_b(x)| over the pooled sample points.
double KsStatistic(std::span<const double> a, std::span<const double> b);

// Per-feature z-scoring. Zero-variance columns keep unit scale.
struct Standardizer {
  FeatureVector mean{};
  FeatureVector scale{1, 1, 1, 1, 1, 1};

  static Standardizer Fit(std::span<const PairExample> examples);
  FeatureVector Apply(const FeatureVector& x) const;
  bool operator==(const Standardizer&) const = default;
};

}  // namespace fedsln

#endif  // FEDSLN_FEATURES_HPP_
