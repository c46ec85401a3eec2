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

// Independent reference implementations shared by the unit tests and the
// acceptance binary. Each recomputes a library result the slow, obvious way.

#ifndef FEDSLN_ORACLES_HPP_
#define FEDSLN_ORACLES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <span>
#include <vector>

#include "fedsln/analysis.hpp"
#include "fedsln/features.hpp"
#include "fedsln/graph.hpp"
#include "fedsln/neural.hpp"

namespace fedsln::testing {

// Four nodes: triangle 0-1-2 plus pendant 3 on node 2.
inline SlnGraph G4() {
  const std::vector<NodePair> edges = {{0, 1}, {0, 2}, {1, 2}, {2, 3}};
  return SlnGraph(4, edges);
}

// Set-based recomputation of the six features.
inline FeatureVector BruteForceFeatures(const SlnGraph& g, NodeId u, NodeId v) {
  const std::set<NodeId> a(g.neighbors(u).begin(), g.neighbors(u).end());
  const std::set<NodeId> b(g.neighbors(v).begin(), g.neighbors(v).end());
  std::set<NodeId> both, either = a;
  for (NodeId n : b) {
    if (a.count(n)) both.insert(n);
    either.insert(n);
  }
  FeatureVector f{};
  const double inter = static_cast<double>(both.size());
  f[kJaccard] = either.empty() ? 0.0 : inter / either.size();
  for (NodeId n : both) {
    f[kAdamicAdar] += 1.0 / std::log(static_cast<double>(g.degree(n)));
    f[kResourceAllocation] += 1.0 / g.degree(n);
  }
  f[kPreferentialAttachment] = static_cast<double>(a.size()) * b.size();
  f[kCosine] =
      (a.empty() || b.empty())
          ? 0.0
          : inter / std::sqrt(static_cast<double>(a.size()) * b.size());
  f[kDice] = (a.size() + b.size()) == 0
                 ? 0.0
                 : 2.0 * inter / static_cast<double>(a.size() + b.size());
  return f;
}

inline double AucOracle(const std::vector<double>& s,
                        const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Forward-mode dual number: value plus one directional derivative.
struct Dual {
  double v = 0.0;
  double d = 0.0;
};
inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator*(Dual a, Dual b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d};
}
inline Dual operator*(double s, Dual a) { return {s * a.v, s * a.d}; }
inline Dual Exp(Dual a) {
  const double e = std::exp(a.v);
  return {e, e * a.d};
}
inline Dual Sig(Dual a) {
  const double s = 1.0 / (1.0 + std::exp(-a.v));
  return {s, s * (1.0 - s) * a.d};
}
inline Dual Softplus(Dual a) {
  return {std::log1p(std::exp(a.v)), a.d / (1.0 + std::exp(-a.v))};
}

// Mean BCE gradient of a softplus network evaluated at params + eps * dir,
// returned as duals: .v is the gradient, .d its derivative along dir, which
// is exactly the Hessian-vector product.
inline std::vector<Dual> DualGradient(const ModelParams& params,
                                      const ModelParams& dir,
                                      std::span<const LabeledSample> batch) {
  const std::size_t L = params.layer_count();
  std::vector<Dual> w(params.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k] = {params.values()[k], dir.values()[k]};
  }
  std::vector<Dual> grad(w.size());
  for (const auto& s : batch) {
    std::vector<std::vector<Dual>> act(L + 1), pre(L);
    for (double x : s.x) act[0].push_back({x, 0.0});
    for (std::size_t l = 0; l < L; ++l) {
      const auto& sh = params.shape(l);
      const std::size_t off = params.layer_offset(l);
      for (std::size_t o = 0; o < sh.out; ++o) {
        Dual z = w[off + sh.out * sh.in + o];
        for (std::size_t i = 0; i < sh.in; ++i) {
          z = z + w[off + o * sh.in + i] * act[l][i];
        }
        pre[l].push_back(z);
        act[l + 1].push_back(l + 1 == L ? Sig(z) : Softplus(z));
      }
    }
    std::vector<Dual> delta = {act[L][0] - Dual{double(s.label), 0.0}};
    for (std::size_t l = L; l-- > 0;) {
      const auto& sh = params.shape(l);
      const std::size_t off = params.layer_offset(l);
      for (std::size_t o = 0; o < sh.out; ++o) {
        for (std::size_t i = 0; i < sh.in; ++i) {
          grad[off + o * sh.in + i] =
              grad[off + o * sh.in + i] + delta[o] * act[l][i];
        }
        grad[off + sh.out * sh.in + o] =
            grad[off + sh.out * sh.in + o] + delta[o];
      }
      if (l == 0) break;
      std::vector<Dual> prev(sh.in);
      for (std::size_t o = 0; o < sh.out; ++o) {
        for (std::size_t i = 0; i < sh.in; ++i) {
          prev[i] = prev[i] + w[off + o * sh.in + i] * delta[o];
        }
      }
      for (std::size_t i = 0; i < sh.in; ++i) {
        prev[i] = prev[i] * Sig(pre[l - 1][i]);
      }
      delta = std::move(prev);
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& g : grad) g = inv * g;
  return grad;
}

// Average of marginal contributions over all 720 feature orderings.
inline FeatureVector PermutationOracle(const ValueModel& model,
                                       const FeatureVector& x,
                                       const std::vector<FeatureVector>& bg) {
  auto value = [&](unsigned mask) {
    double s = 0.0;
    for (const auto& row : bg) {
      FeatureVector m = row;
      for (std::size_t f = 0; f < kNumFeatures; ++f) {
        if (mask & (1u << f)) m[f] = x[f];
      }
      s += model(m);
    }
    return s / bg.size();
  };
  std::array<std::size_t, kNumFeatures> order;
  std::iota(order.begin(), order.end(), std::size_t{0});
  FeatureVector phi{};
  int count = 0;
  do {
    unsigned mask = 0;
    for (std::size_t f : order) {
      const double before = value(mask);
      mask |= 1u << f;
      phi[f] += value(mask) - before;
    }
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& p : phi) p /= count;
  return phi;
}

}  // namespace fedsln::testing

#endif  // FEDSLN_ORACLES_HPP_
