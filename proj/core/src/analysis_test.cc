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
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace fedsln {
namespace {

using testing::PermutationOracle;

double Round2(double x) { return std::round(x * 100.0) / 100.0; }

FairnessReport FromTprs(const std::vector<double>& tpr,
                        const std::vector<double>& fpr) {
  std::vector<ConfusionRates> rates;
  for (std::size_t i = 0; i < tpr.size(); ++i)
    rates.push_back({tpr[i], fpr[i]});
  return MakeFairnessReport(rates);
}

TEST(ConfusionRates, Fixtures) {
  const std::vector<int> labels = {1, 0, 1, 0};
  const auto perfect =
      ComputeRates(std::vector<double>{0.9, 0.1, 0.8, 0.2}, labels);
  EXPECT_EQ(*perfect.tpr, 1.0);
  EXPECT_EQ(*perfect.fpr, 0.0);
  const auto constant =
      ComputeRates(std::vector<double>{0.5, 0.5, 0.5, 0.5}, labels);
  EXPECT_EQ(*constant.tpr, 1.0);
  EXPECT_EQ(*constant.fpr, 1.0);
  const auto half =
      ComputeRates(std::vector<double>{0.9, 0.6, 0.4, 0.1}, labels);
  EXPECT_EQ(*half.tpr, 0.5);
  EXPECT_EQ(*half.fpr, 0.5);
}

TEST(ConfusionRates, MissingClassLeavesRateUndefined) {
  const auto only_neg =
      ComputeRates(std::vector<double>{0.9, 0.1}, std::vector<int>{0, 0});
  EXPECT_FALSE(only_neg.tpr.has_value());
  EXPECT_EQ(*only_neg.fpr, 0.5);
}

TEST(ConfusionRates, AgreesWithEvaluateCounts) {
  Rng rng(3);
  std::vector<double> scores(200);
  std::vector<int> labels(200);
  for (std::size_t i = 0; i < 200; ++i) {
    scores[i] = rng.Uniform();
    labels[i] = rng.Uniform() < 0.3;
  }
  const ConfusionCounts c = CountConfusion(scores, labels);
  const ConfusionRates a = ComputeRates(scores, labels);
  const ConfusionRates b = ComputeRates(c);
  EXPECT_EQ(*a.tpr, *b.tpr);
  EXPECT_EQ(*a.fpr, *b.fpr);
  EXPECT_EQ(*a.tpr, double(c.tp) / double(c.tp + c.fn));
}

TEST(FairnessReport, PublishedRatesReproduceRanges) {
  const auto centralized =
      FromTprs({0.83, 0.72, 0.72, 0.81, 0.28}, {0.03, 0.04, 0.05, 0.1, 0.02});
  const auto fedavg =
      FromTprs({0.81, 0.76, 0.77, 0.71, 0.37}, {0.05, 0.05, 0.07, 0.08, 0.03});
  const auto fedala =
      FromTprs({0.84, 0.74, 0.68, 0.85, 0.68}, {0.03, 0.04, 0.04, 0.11, 0.05});
  EXPECT_NEAR(centralized.tpr_range, 0.55, 1e-12);
  EXPECT_NEAR(fedavg.tpr_range, 0.44, 1e-12);
  EXPECT_NEAR(fedala.tpr_range, 0.17, 1e-12);
  EXPECT_EQ(Round2(centralized.tpr_range), 0.55);
  EXPECT_EQ(Round2(fedavg.tpr_range), 0.44);
  EXPECT_EQ(Round2(fedala.tpr_range), 0.17);
  EXPECT_LT(fedala.tpr_range, fedavg.tpr_range);
  EXPECT_LT(fedavg.tpr_range, centralized.tpr_range);
  EXPECT_NEAR(fedavg.fpr_range, 0.05, 1e-12);
}

TEST(FairnessReport, IdenticalRatesAndPermutation) {
  const auto same = FromTprs({0.6, 0.6, 0.6}, {0.1, 0.1, 0.1});
  EXPECT_EQ(same.tpr_range, 0.0);
  EXPECT_EQ(same.fpr_range, 0.0);
  const auto a = FromTprs({0.1, 0.9, 0.4}, {0.3, 0.2, 0.25});
  const auto b = FromTprs({0.4, 0.1, 0.9}, {0.25, 0.3, 0.2});
  EXPECT_EQ(a.tpr_range, b.tpr_range);
  EXPECT_EQ(a.fpr_range, b.fpr_range);
}

TEST(FairnessReport, UndefinedRatesAreSkipped) {
  std::vector<ConfusionRates> rates = {
      {0.5, 0.1}, {std::nullopt, 0.3}, {0.7, std::nullopt}};
  const auto r = MakeFairnessReport(rates);
  EXPECT_NEAR(r.tpr_range, 0.2, 1e-15);
  EXPECT_NEAR(r.fpr_range, 0.2, 1e-15);
  std::vector<ConfusionRates> none = {{std::nullopt, 0.3}};
  EXPECT_TRUE(std::isnan(MakeFairnessReport(none).tpr_range));
}

TEST(PairedTTest, Fixtures) {
  const auto zero =
      PairedTTest(std::vector<double>{1, -1, 0}, std::vector<double>{0, 0, 0});
  EXPECT_EQ(zero.t_statistic, 0.0);
  EXPECT_EQ(zero.dof, 2u);
  EXPECT_THROW(
      PairedTTest(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}),
      ValidationError);
  try {
    PairedTTest(std::vector<double>{2, 4, 6}, std::vector<double>{1, 3, 5});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_STREQ(e.what(), "degenerate: constant difference");
  }
  EXPECT_THROW(PairedTTest(std::vector<double>{1}, std::vector<double>{2}),
               ValidationError);
}

TEST(PairedTTest, MatchesDirectFormula) {
  const std::vector<double> a = {1, 2, 3, 4}, b = {0, 0, 1, 1};
  // d = {1, 2, 2, 3}: mean 2, sample sd sqrt(2/3).
  const auto r = PairedTTest(a, b);
  EXPECT_NEAR(r.t_statistic, 2.0 * 2.0 / std::sqrt(2.0 / 3.0), 1e-12);
  EXPECT_EQ(r.dof, 3u);
}

TEST(StudentT, TableValuesAndBrackets) {
  // The shipped table has four decimals.
  EXPECT_NEAR(TCriticalValue(4, 0.05), 2.7764451051977987, 5e-5);
  EXPECT_NEAR(TCriticalValue(1, 0.05), 12.706204736432095, 5e-5);
  EXPECT_NEAR(TCriticalValue(30, 0.01), 2.749995653567, 5e-5);
  EXPECT_THROW(TCriticalValue(0, 0.05), ValidationError);
  EXPECT_THROW(TCriticalValue(4, 0.07), ValidationError);
  const PValueBracket p = TwoSidedPValue(3.0, 4);
  EXPECT_EQ(p.lower, 0.02);
  EXPECT_EQ(p.upper, 0.05);
  EXPECT_TRUE(SignificantAt(3.0, 4));
  EXPECT_FALSE(SignificantAt(2.0, 4));
  const PValueBracket tiny = TwoSidedPValue(0.1, 4);
  EXPECT_EQ(tiny.lower, 0.2);
  EXPECT_EQ(tiny.upper, 1.0);
  const PValueBracket huge = TwoSidedPValue(-100.0, 4);
  EXPECT_EQ(huge.lower, 0.0);
  EXPECT_EQ(huge.upper, 0.001);
}

struct RandomNet {
  ModelParams params;
  double operator()(const FeatureVector& x) const { return Forward(params, x); }
};

std::vector<FeatureVector> RandomRows(Rng& rng, std::size_t n) {
  std::vector<FeatureVector> rows(n);
  for (auto& r : rows) {
    for (double& x : r) x = rng.Uniform(-2.0, 2.0);
  }
  return rows;
}

TEST(Shapley, EfficiencyOnRandomCases) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(42);
  const std::size_t widths[] = {kNumFeatures, 8, 4, 1};
  for (int trial = 0; trial < 100; ++trial) {
    const RandomNet net{ModelParams::Initialize(widths, rng.NextU64())};
    const auto bg = RandomRows(rng, 1 + rng.Below(30));
    const FeatureVector x = RandomRows(rng, 1)[0];
    const ShapleyExplanation e = ShapleyValues(net, x, bg);
    double total = e.base_value;
    for (double p : e.phi) total += p;
    EXPECT_LT(std::abs(total - e.predicted), 1e-9);
    EXPECT_NEAR(e.predicted, net(x), 1e-12);
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  EXPECT_LT(seconds, 10.0);
}

TEST(Shapley, MatchesPermutationOracle) {
  Rng rng(7);
  const std::size_t widths[] = {kNumFeatures, 6, 1};
  for (int trial = 0; trial < 10; ++trial) {
    const RandomNet net{ModelParams::Initialize(widths, rng.NextU64())};
    const auto bg = RandomRows(rng, 5);
    const FeatureVector x = RandomRows(rng, 1)[0];
    const FeatureVector want = PermutationOracle(net, x, bg);
    const ShapleyExplanation got = ShapleyValues(net, x, bg);
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      EXPECT_NEAR(got.phi[f], want[f], 1e-9);
    }
  }
}

TEST(Shapley, DummyFeatureGetsExactlyZero) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t widths[] = {kNumFeatures, 5, 1};
    const RandomNet net{ModelParams::Initialize(widths, rng.NextU64())};
    const ValueModel ignores_pa = [&](const FeatureVector& x) {
      FeatureVector y = x;
      y[kPreferentialAttachment] = 0.0;
      return net(y);
    };
    const auto bg = RandomRows(rng, 8);
    const auto e = ShapleyValues(ignores_pa, RandomRows(rng, 1)[0], bg);
    EXPECT_EQ(e.phi[kPreferentialAttachment], 0.0);
  }
}

TEST(Shapley, SymmetricFeaturesShareCredit) {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const double w = rng.Uniform(-1, 1);
    const ValueModel sym = [w](const FeatureVector& x) {
      return std::tanh(w * (x[0] + x[1]) + x[2] * x[0] * x[1] + 0.3 * x[4]);
    };
    auto bg = RandomRows(rng, 6);
    for (auto& r : bg) r[1] = r[0];
    FeatureVector x = RandomRows(rng, 1)[0];
    x[1] = x[0];
    const auto e = ShapleyValues(sym, x, bg);
    EXPECT_NEAR(e.phi[0], e.phi[1], 1e-9);
  }
}

TEST(Shapley, LinearityOverModels) {
  Rng rng(11);
  const std::size_t widths[] = {kNumFeatures, 4, 1};
  for (int trial = 0; trial < 20; ++trial) {
    const RandomNet f{ModelParams::Initialize(widths, rng.NextU64())};
    const RandomNet g{ModelParams::Initialize(widths, rng.NextU64())};
    const ValueModel sum = [&](const FeatureVector& x) {
      return 2.0 * f(x) + g(x);
    };
    const auto bg = RandomRows(rng, 7);
    const FeatureVector x = RandomRows(rng, 1)[0];
    const auto ef = ShapleyValues(f, x, bg);
    const auto eg = ShapleyValues(g, x, bg);
    const auto es = ShapleyValues(sum, x, bg);
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      EXPECT_NEAR(es.phi[k], 2.0 * ef.phi[k] + eg.phi[k], 1e-9);
    }
  }
}

TEST(Shapley, LinearModelClosedForm) {
  Rng rng(12);
  const FeatureVector w = {0.5, -1.0, 2.0, 0.25, -0.75, 1.5};
  const ValueModel linear = [&](const FeatureVector& x) {
    double s = 0.0;
    for (std::size_t f = 0; f < kNumFeatures; ++f) s += w[f] * x[f];
    return s;
  };
  const auto bg = RandomRows(rng, 25);
  const FeatureVector x = RandomRows(rng, 1)[0];
  const auto e = ShapleyValues(linear, x, bg);
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    double mean = 0.0;
    for (const auto& r : bg) mean += r[f];
    mean /= bg.size();
    EXPECT_NEAR(e.phi[f], w[f] * (x[f] - mean), 1e-12);
  }
}

TEST(Shapley, ConstantModelAndErrors) {
  const ValueModel constant = [](const FeatureVector&) { return 0.3; };
  Rng rng(1);
  const auto e =
      ShapleyValues(constant, RandomRows(rng, 1)[0], RandomRows(rng, 4));
  for (double p : e.phi) EXPECT_EQ(p, 0.0);
  EXPECT_EQ(e.base_value, 0.3);
  EXPECT_EQ(e.predicted, 0.3);
  EXPECT_THROW(ShapleyValues(constant, FeatureVector{}, {}), ValidationError);
}

TEST(GlobalImportance, Fixtures) {
  ShapleyExplanation a;
  a.phi = {0.1, -0.5, 0.0, 0.2, -0.05, 0.3};
  const auto single = GlobalImportance(std::vector<ShapleyExplanation>{a});
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    EXPECT_EQ(single.mean_abs_phi[f], std::abs(a.phi[f]));
  }
  const std::array<std::size_t, kNumFeatures> order = {1, 5, 3, 0, 4, 2};
  EXPECT_EQ(single.ranking, order);
  const auto doubled = GlobalImportance(std::vector<ShapleyExplanation>{a, a});
  EXPECT_EQ(doubled.mean_abs_phi, single.mean_abs_phi);

  ShapleyExplanation plus, minus;
  plus.phi[2] = 1.0;
  minus.phi[2] = -1.0;
  EXPECT_EQ(GlobalImportance(std::vector<ShapleyExplanation>{plus, minus})
                .mean_abs_phi[2],
            1.0);
  EXPECT_THROW(GlobalImportance({}), ValidationError);
}

TEST(ImportanceSvg, ListsFeaturesInRankOrder) {
  ShapleyExplanation a;
  a.phi = {0.1, -0.5, 0.0, 0.2, -0.05, 0.3};
  const auto imp = GlobalImportance(std::vector<ShapleyExplanation>{a});
  std::ostringstream out;
  WriteImportanceSvg(imp, "fedala_algo", out);
  const std::string svg = out.str();
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_LT(svg.find("adamic_adar"), svg.find("dice"));
  EXPECT_LT(svg.find("dice"), svg.find("preferential_attachment"));
}

}  // namespace
}  // namespace fedsln
