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

#include "fedsln/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "fedsln/format.hpp"

namespace fedsln {
namespace {

void CheckPair(const SlnGraph& g, NodeId u, NodeId v) {
  if (!g.IsValidNode(u) || !g.IsValidNode(v)) {
    throw ValidationError("feature query on an invalid node");
  }
  if (u == v) throw ValidationError("feature query on a self-pair");
}

// Calls fn(n) for each common neighbor n of u and v.
template <typename Fn>
std::size_t ForEachCommonNeighbor(const SlnGraph& g, NodeId u, NodeId v,
                                  Fn&& fn) {
  const auto& a = g.neighbors(u);
  const auto& b = g.neighbors(v);
  std::size_t count = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      fn(*i);
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

std::size_t UnionSize(const SlnGraph& g, NodeId u, NodeId v,
                      std::size_t common) {
  return g.degree(u) + g.degree(v) - common;
}

}  // namespace

double Jaccard(const SlnGraph& g, NodeId u, NodeId v) {
  CheckPair(g, u, v);
  const std::size_t common = ForEachCommonNeighbor(g, u, v, [](NodeId) {});
  const std::size_t uni = UnionSize(g, u, v, common);
  return uni == 0 ? 0.0 : static_cast<double>(common) / uni;
}

double AdamicAdar(const SlnGraph& g, NodeId u, NodeId v) {
  CheckPair(g, u, v);
  double sum = 0.0;
  // A common neighbor has degree >= 2, so the log is positive.
  ForEachCommonNeighbor(g, u, v, [&](NodeId n) {
    sum += 1.0 / std::log(static_cast<double>(g.degree(n)));
  });
  return sum;
}

double ResourceAllocation(const SlnGraph& g, NodeId u, NodeId v) {
  CheckPair(g, u, v);
  double sum = 0.0;
  ForEachCommonNeighbor(g, u, v, [&](NodeId n) {
    sum += 1.0 / static_cast<double>(g.degree(n));
  });
  return sum;
}

double PreferentialAttachment(const SlnGraph& g, NodeId u, NodeId v) {
  CheckPair(g, u, v);
  return static_cast<double>(g.degree(u)) * static_cast<double>(g.degree(v));
}

double Cosine(const SlnGraph& g, NodeId u, NodeId v) {
  CheckPair(g, u, v);
  const std::size_t common = ForEachCommonNeighbor(g, u, v, [](NodeId) {});
  const double du = static_cast<double>(g.degree(u));
  const double dv = static_cast<double>(g.degree(v));
  if (du == 0.0 || dv == 0.0) return 0.0;
  return static_cast<double>(common) / std::sqrt(du * dv);
}

double Dice(const SlnGraph& g, NodeId u, NodeId v) {
  CheckPair(g, u, v);
  const std::size_t common = ForEachCommonNeighbor(g, u, v, [](NodeId) {});
  const std::size_t total = g.degree(u) + g.degree(v);
  return total == 0 ? 0.0 : 2.0 * static_cast<double>(common) / total;
}

FeatureVector ComputeFeatures(const SlnGraph& g, NodeId u, NodeId v) {
  CheckPair(g, u, v);
  double aa = 0.0;
  double ra = 0.0;
  const std::size_t common = ForEachCommonNeighbor(g, u, v, [&](NodeId n) {
    const double d = static_cast<double>(g.degree(n));
    aa += 1.0 / std::log(d);
    ra += 1.0 / d;
  });
  const double du = static_cast<double>(g.degree(u));
  const double dv = static_cast<double>(g.degree(v));
  const double c = static_cast<double>(common);
  const std::size_t uni = UnionSize(g, u, v, common);

  FeatureVector f{};
  f[kJaccard] = uni == 0 ? 0.0 : c / static_cast<double>(uni);
  f[kAdamicAdar] = aa;
  f[kResourceAllocation] = ra;
  f[kPreferentialAttachment] = du * dv;
  f[kCosine] = (du == 0.0 || dv == 0.0) ? 0.0 : c / std::sqrt(du * dv);
  f[kDice] = (du + dv) == 0.0 ? 0.0 : 2.0 * c / (du + dv);
  return f;
}

std::vector<PairExample> BuildExamples(const TemporalPair& tp,
                                       std::span<const NodePair> pairs) {
  std::vector<PairExample> out;
  out.reserve(pairs.size());
  std::vector<NodePair> universe = tp.pair_universe;
  std::sort(universe.begin(), universe.end());
  for (const NodePair& raw : pairs) {
    const NodePair p = NodePair::Of(raw.u, raw.v);
    if (!std::binary_search(universe.begin(), universe.end(), p)) {
      throw ValidationError("pair (" + std::to_string(p.u) + "," +
                            std::to_string(p.v) +
                            ") is outside the pair universe");
    }
    PairExample ex;
    ex.u = p.u;
    ex.v = p.v;
    ex.features = ComputeFeatures(tp.graph_prev, p.u, p.v);
    ex.label = tp.graph_now.HasEdge(p.u, p.v) ? 1 : 0;
    out.push_back(ex);
  }
  return out;
}

void WriteExamplesCsv(std::span<const PairExample> examples,
                      std::ostream& out) {
  out << "u,v";
  for (auto name : kFeatureNames) out << ',' << name;
  out << ",label\n";
  for (const PairExample& ex : examples) {
    out << ex.u << ',' << ex.v;
    for (double x : ex.features) out << ',' << FormatDouble(x);
    out << ',' << ex.label << '\n';
  }
}

std::vector<PairExample> ReadExamplesCsv(std::istream& in) {
  std::vector<PairExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 || line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != kNumFeatures + 3) {
      throw ParseError("expected 9 columns", line_no);
    }
    try {
      PairExample ex;
      ex.u = static_cast<NodeId>(std::stoul(cells[0]));
      ex.v = static_cast<NodeId>(std::stoul(cells[1]));
      for (std::size_t f = 0; f < kNumFeatures; ++f) {
        ex.features[f] = ParseDouble(cells[2 + f]);
      }
      ex.label = std::stoi(cells.back());
      if (ex.label != 0 && ex.label != 1) {
        throw ValidationError("label must be 0 or 1");
      }
      out.push_back(ex);
    } catch (const std::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

double KsStatistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw ValidationError("KS statistic needs two non-empty samples");
  }
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double best = 0.0;
  // Step through pooled points; ties are consumed from both sides before
  // comparing so the CDFs are evaluated right-continuously.
  while (i < x.size() || j < y.size()) {
    double t;
    if (j == y.size() || (i < x.size() && x[i] <= y[j])) {
      t = x[i];
    } else {
      t = y[j];
    }
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    best = std::max(best, std::abs(i / na - j / nb));
  }
  return best;
}

Standardizer Standardizer::Fit(std::span<const PairExample> examples) {
  Standardizer s;
  if (examples.empty()) return s;
  const double n = static_cast<double>(examples.size());
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    double sum = 0.0;
    for (const auto& ex : examples) sum += ex.features[f];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& ex : examples) {
      const double d = ex.features[f] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    s.mean[f] = mean;
    s.scale[f] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

FeatureVector Standardizer::Apply(const FeatureVector& x) const {
  FeatureVector z;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    z[f] = (x[f] - mean[f]) / scale[f];
  }
  return z;
}

}  // namespace fedsln
