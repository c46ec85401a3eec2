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

#include "fedsln/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "fedsln/error.hpp"
#include "fedsln/format.hpp"

namespace fedsln {

ConfusionRates ComputeRates(const ConfusionCounts& c) {
  ConfusionRates r;
  if (c.tp + c.fn > 0) {
    r.tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  if (c.fp + c.tn > 0) {
    r.fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
  }
  return r;
}

ConfusionRates ComputeRates(std::span<const double> scores,
                            std::span<const int> labels, double threshold) {
  return ComputeRates(CountConfusion(scores, labels, threshold));
}

namespace {

double Range(std::span<const ConfusionRates> rates,
             std::optional<double> ConfusionRates::*field) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& r : rates) {
    if (const auto& v = r.*field) {
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
  }
  return lo > hi ? std::nan("") : hi - lo;
}

}  // namespace

FairnessReport MakeFairnessReport(std::span<const ConfusionRates> per_client) {
  FairnessReport report;
  report.per_client.assign(per_client.begin(), per_client.end());
  report.tpr_range = Range(per_client, &ConfusionRates::tpr);
  report.fpr_range = Range(per_client, &ConfusionRates::fpr);
  return report;
}

TTestResult PairedTTest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("paired t-test needs samples of equal length");
  }
  const std::size_t n = a.size();
  if (n < 2) throw ValidationError("paired t-test needs at least two pairs");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const bool constant =
      std::all_of(d.begin(), d.end(), [&](double x) { return x == d[0]; });
  if (constant || ss == 0.0) {
    throw ValidationError("degenerate: constant difference");
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return {mean * std::sqrt(static_cast<double>(n)) / sd, n - 1};
}

namespace {

constexpr std::array<double, 7> kAlphas = {0.2,  0.1,   0.05, 0.02,
                                           0.01, 0.002, 0.001};

// Two-sided critical values t_{1 - alpha/2, dof}.
constexpr double kTTable[30][7] = {
    {3.0777, 6.3138, 12.7062, 31.8205, 63.6567, 318.3088, 636.6192},
    {1.8856, 2.9200, 4.3027, 6.9646, 9.9248, 22.3271, 31.5991},
    {1.6377, 2.3534, 3.1824, 4.5407, 5.8409, 10.2145, 12.9240},
    {1.5332, 2.1318, 2.7764, 3.7469, 4.6041, 7.1732, 8.6103},
    {1.4759, 2.0150, 2.5706, 3.3649, 4.0321, 5.8934, 6.8688},
    {1.4398, 1.9432, 2.4469, 3.1427, 3.7074, 5.2076, 5.9588},
    {1.4149, 1.8946, 2.3646, 2.9980, 3.4995, 4.7853, 5.4079},
    {1.3968, 1.8595, 2.3060, 2.8965, 3.3554, 4.5008, 5.0413},
    {1.3830, 1.8331, 2.2622, 2.8214, 3.2498, 4.2968, 4.7809},
    {1.3722, 1.8125, 2.2281, 2.7638, 3.1693, 4.1437, 4.5869},
    {1.3634, 1.7959, 2.2010, 2.7181, 3.1058, 4.0247, 4.4370},
    {1.3562, 1.7823, 2.1788, 2.6810, 3.0545, 3.9296, 4.3178},
    {1.3502, 1.7709, 2.1604, 2.6503, 3.0123, 3.8520, 4.2208},
    {1.3450, 1.7613, 2.1448, 2.6245, 2.9768, 3.7874, 4.1405},
    {1.3406, 1.7531, 2.1314, 2.6025, 2.9467, 3.7328, 4.0728},
    {1.3368, 1.7459, 2.1199, 2.5835, 2.9208, 3.6862, 4.0150},
    {1.3334, 1.7396, 2.1098, 2.5669, 2.8982, 3.6458, 3.9651},
    {1.3304, 1.7341, 2.1009, 2.5524, 2.8784, 3.6105, 3.9216},
    {1.3277, 1.7291, 2.0930, 2.5395, 2.8609, 3.5794, 3.8834},
    {1.3253, 1.7247, 2.0860, 2.5280, 2.8453, 3.5518, 3.8495},
    {1.3232, 1.7207, 2.0796, 2.5176, 2.8314, 3.5272, 3.8193},
    {1.3212, 1.7171, 2.0739, 2.5083, 2.8188, 3.5050, 3.7921},
    {1.3195, 1.7139, 2.0687, 2.4999, 2.8073, 3.4850, 3.7676},
    {1.3178, 1.7109, 2.0639, 2.4922, 2.7969, 3.4668, 3.7454},
    {1.3163, 1.7081, 2.0595, 2.4851, 2.7874, 3.4502, 3.7251},
    {1.3150, 1.7056, 2.0555, 2.4786, 2.7787, 3.4350, 3.7066},
    {1.3137, 1.7033, 2.0518, 2.4727, 2.7707, 3.4210, 3.6896},
    {1.3125, 1.7011, 2.0484, 2.4671, 2.7633, 3.4082, 3.6739},
    {1.3114, 1.6991, 2.0452, 2.4620, 2.7564, 3.3962, 3.6594},
    {1.3104, 1.6973, 2.0423, 2.4573, 2.7500, 3.3852, 3.6460},
};

const double* TableRow(std::size_t dof) {
  if (dof == 0) throw ValidationError("degrees of freedom must be positive");
  return kTTable[std::min<std::size_t>(dof, 30) - 1];
}

}  // namespace

double TCriticalValue(std::size_t dof, double two_sided_alpha) {
  const double* row = TableRow(dof);
  for (std::size_t j = 0; j < kAlphas.size(); ++j) {
    if (kAlphas[j] == two_sided_alpha) return row[j];
  }
  throw ValidationError("alpha not in the shipped t table");
}

PValueBracket TwoSidedPValue(double t, std::size_t dof) {
  const double* row = TableRow(dof);
  const double at = std::abs(t);
  PValueBracket b;
  for (std::size_t j = 0; j < kAlphas.size(); ++j) {
    if (at >= row[j]) {
      b.upper = kAlphas[j];
    } else {
      b.lower = kAlphas[j];
      break;
    }
  }
  if (at >= row[kAlphas.size() - 1]) b.lower = 0.0;
  return b;
}

bool SignificantAt(double t, std::size_t dof, double two_sided_alpha) {
  return std::abs(t) >= TCriticalValue(dof, two_sided_alpha);
}

ShapleyExplanation ShapleyValues(const ValueModel& model,
                                 const FeatureVector& x,
                                 std::span<const FeatureVector> background) {
  if (background.empty()) {
    throw ValidationError("Shapley values need a non-empty background set");
  }
  constexpr std::size_t n = kNumFeatures;
  constexpr std::size_t n_subsets = std::size_t{1} << n;

  std::array<double, n_subsets> value{};
  for (std::size_t mask = 0; mask < n_subsets; ++mask) {
    double sum = 0.0;
    for (const FeatureVector& row : background) {
      FeatureVector mixed = row;
      for (std::size_t f = 0; f < n; ++f) {
        if (mask & (std::size_t{1} << f)) mixed[f] = x[f];
      }
      sum += model(mixed);
    }
    value[mask] = sum / static_cast<double>(background.size());
  }

  // |S|! (n - |S| - 1)! / n!
  std::array<double, n> weight{};
  for (std::size_t s = 0; s < n; ++s) {
    double w = 1.0;
    for (std::size_t k = 2; k <= s; ++k) w *= static_cast<double>(k);
    for (std::size_t k = 2; k <= n - s - 1; ++k) w *= static_cast<double>(k);
    double nf = 1.0;
    for (std::size_t k = 2; k <= n; ++k) nf *= static_cast<double>(k);
    weight[s] = w / nf;
  }

  ShapleyExplanation out;
  out.base_value = value[0];
  out.predicted = value[n_subsets - 1];
  for (std::size_t f = 0; f < n; ++f) {
    const std::size_t bit = std::size_t{1} << f;
    double phi = 0.0;
    for (std::size_t mask = 0; mask < n_subsets; ++mask) {
      if (mask & bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(mask));
      phi += weight[size] * (value[mask | bit] - value[mask]);
    }
    out.phi[f] = phi;
  }
  return out;
}

FeatureImportance GlobalImportance(
    std::span<const ShapleyExplanation> explanations) {
  if (explanations.empty()) {
    throw ValidationError("global importance of no explanations");
  }
  FeatureImportance imp;
  for (const auto& e : explanations) {
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      imp.mean_abs_phi[f] += std::abs(e.phi[f]);
    }
  }
  for (double& v : imp.mean_abs_phi) {
    v /= static_cast<double>(explanations.size());
  }
  std::iota(imp.ranking.begin(), imp.ranking.end(), std::size_t{0});
  std::stable_sort(imp.ranking.begin(), imp.ranking.end(),
                   [&](std::size_t a, std::size_t b) {
                     return imp.mean_abs_phi[a] > imp.mean_abs_phi[b];
                   });
  return imp;
}

void WriteImportanceSvg(const FeatureImportance& importance,
                        const std::string& title, std::ostream& out) {
  constexpr int kLabelWidth = 190;
  constexpr int kBarWidth = 360;
  constexpr int kRowHeight = 28;
  constexpr int kTop = 40;
  const int height = kTop + kRowHeight * static_cast<int>(kNumFeatures) + 20;
  const int width = kLabelWidth + kBarWidth + 90;
  const double top = importance.mean_abs_phi[importance.ranking[0]];
  const double scale = top > 0.0 ? kBarWidth / top : 0.0;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" "
      << "font-size=\"13\">\n";
  out << "  <text x=\"10\" y=\"22\" font-size=\"15\">" << title
      << ": mean |SHAP value|</text>\n";
  for (std::size_t r = 0; r < kNumFeatures; ++r) {
    const std::size_t f = importance.ranking[r];
    const double v = importance.mean_abs_phi[f];
    const int y = kTop + static_cast<int>(r) * kRowHeight;
    const int bar = static_cast<int>(std::lround(v * scale));
    out << "  <text x=\"" << kLabelWidth - 8 << "\" y=\"" << y + 17
        << "\" text-anchor=\"end\">" << kFeatureNames[f] << "</text>\n";
    out << "  <rect x=\"" << kLabelWidth << "\" y=\"" << y + 4
        << "\" width=\"" << bar << "\" height=\"" << kRowHeight - 8
        << "\" fill=\"#1e88e5\"/>\n";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    out << "  <text x=\"" << kLabelWidth + bar + 6 << "\" y=\"" << y + 17
        << "\">" << buf << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace fedsln
