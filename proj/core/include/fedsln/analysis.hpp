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

// Cross-client fairness, paired significance testing and exact Shapley
// feature attribution.

#ifndef FEDSLN_ANALYSIS_HPP_
#define FEDSLN_ANALYSIS_HPP_

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedsln/features.hpp"
#include "fedsln/neural.hpp"

namespace fedsln {

// TPR is unset without positives, FPR without negatives.
struct ConfusionRates {
  std::optional<double> tpr;
  std::optional<double> fpr;
};

ConfusionRates ComputeRates(const ConfusionCounts& counts);
ConfusionRates ComputeRates(std::span<const double> scores,
                            std::span<const int> labels,
                            double threshold = kDecisionThreshold);

// Ranges are max - min over the clients whose rate is defined (NaN when no
// client defines it). Equalized odds is judged from the two ranges; no
// verdict is derived here.
struct FairnessReport {
  std::vector<ConfusionRates> per_client;
  double tpr_range = 0.0;
  double fpr_range = 0.0;
};

FairnessReport MakeFairnessReport(std::span<const ConfusionRates> per_client);

struct TTestResult {
  double t_statistic = 0.0;
  std::size_t dof = 0;
};

// Paired t-test on a - b with the n - 1 sample standard deviation. Throws
// ValidationError on unequal lengths, n < 2, or constant differences.
TTestResult PairedTTest(std::span<const double> a, std::span<const double> b);

// Two-sided p-value bounds read off a Student-t critical-value table
// (dof 1..30, two-sided alpha 0.2, 0.1, 0.05, 0.02, 0.01, 0.002, 0.001).
// Degrees of freedom above 30 use the dof = 30 row, which only makes the
// bracket conservative.
struct PValueBracket {
  double lower = 0.0;  // p > lower (0 when beyond the last column)
  double upper = 1.0;  // p <= upper
};

PValueBracket TwoSidedPValue(double t, std::size_t dof);
double TCriticalValue(std::size_t dof, double two_sided_alpha);
bool SignificantAt(double t, std::size_t dof, double two_sided_alpha = 0.05);

// ---------------------------------------------------------------------------
// Shapley attribution

using ValueModel = std::function<double(const FeatureVector&)>;

struct ShapleyExplanation {
  double base_value = 0.0;
  FeatureVector phi{};
  double predicted = 0.0;
};

// Exact Shapley values over all 2^6 feature subsets. The value of a subset S
// is the mean model output over `background`, taking features in S from `x`
// and the rest from the background row.
ShapleyExplanation ShapleyValues(const ValueModel& model,
                                 const FeatureVector& x,
                                 std::span<const FeatureVector> background);

inline ShapleyExplanation ShapleyValues(
    const Classifier& model, const FeatureVector& x,
    std::span<const FeatureVector> background) {
  return ShapleyValues(
      [&model](const FeatureVector& f) { return model.Predict(f); }, x,
      background);
}

struct FeatureImportance {
  FeatureVector mean_abs_phi{};
  std::array<std::size_t, kNumFeatures> ranking{};  // most important first
};

FeatureImportance GlobalImportance(
    std::span<const ShapleyExplanation> explanations);

// Horizontal bar chart of mean |phi|, most important feature on top.
void WriteImportanceSvg(const FeatureImportance& importance,
                        const std::string& title, std::ostream& out);

}  // namespace fedsln

#endif  // FEDSLN_ANALYSIS_HPP_
