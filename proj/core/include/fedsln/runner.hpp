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

// End-to-end experiments: data preparation per client, every training
// regime, evaluation, fairness, explanations and report files.

#ifndef FEDSLN_RUNNER_HPP_
#define FEDSLN_RUNNER_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fedsln/analysis.hpp"
#include "fedsln/config.hpp"
#include "fedsln/federation.hpp"
#include "fedsln/graph.hpp"

namespace fedsln {

// One client's examples for one seed.
struct PreparedClient {
  std::string name;
  TemporalPair temporal;
  std::vector<PairExample> train;
  std::vector<PairExample> test;
};

// Builds universe, temporal snapshots, examples and the train/test split of
// every client for `seed`. Graphs are loaded or generated once and passed in.
std::vector<PreparedClient> PrepareClients(const ExperimentConfig& cfg,
                                           std::span<const SlnGraph> graphs,
                                           std::uint64_t seed);
std::vector<SlnGraph> LoadClientGraphs(const ExperimentConfig& cfg);

struct CellResult {
  Method method;
  std::size_t client = 0;
  std::uint64_t seed = 0;
  MetricsReport metrics;
};

struct SummaryRow {
  Method method;
  std::size_t client = 0;
  std::size_t n_seeds = 0;
  double accuracy_mean = 0.0, accuracy_std = 0.0;
  double loss_mean = 0.0, loss_std = 0.0;
  double auc_mean = 0.0, auc_std = 0.0;
};

struct ExplanationRecord {
  Method method;
  std::size_t client = 0;
  NodePair pair;
  FeatureVector features{};
  ShapleyExplanation explanation;
};

struct KsRecord {
  std::size_t client_a = 0;
  std::size_t client_b = 0;
  std::size_t feature = 0;
  double statistic = 0.0;
};

struct SignificanceRecord {
  Method method;
  Method baseline;
  std::optional<TTestResult> test;  // unset when degenerate
  PValueBracket p;
};

// A file produced by the run, relative to the output directory.
struct Artifact {
  std::string path;
  std::string content;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<std::string> client_names;
  std::vector<CellResult> cells;  // method-major, then seed, then client
  std::vector<SummaryRow> summary;
  std::map<Method, FairnessReport> fairness;  // rates averaged over seeds
  std::vector<ExplanationRecord> explanations;
  std::map<std::pair<Method, std::size_t>, FeatureImportance> importance;
  std::vector<KsRecord> ks;  // first seed, every client pair and feature
  std::vector<SignificanceRecord> significance;
  std::vector<Artifact> artifacts;  // checkpoints, histories, ALA weights
  audit::Counters access;           // data-access audit over the run
};

// Mean and n-1 standard deviation; a single value has std 0.
std::pair<double, double> MeanStd(std::span<const double> xs);

RunReport RunExperiment(const ExperimentConfig& cfg);

// Writes metrics.csv, summary.csv, fairness.csv, ks.csv, significance.csv,
// run_manifest.json, the artifacts, and (when explanations exist)
// importance.csv, shap_summary.csv, explanations.json and one SVG chart per
// explained (method, client). Files written before a failure are removed.
std::vector<std::string> EmitReports(const RunReport& report,
                                     const std::string& dir);

// Individual report bodies, exposed for golden tests.
std::string MetricsCsv(const RunReport& report);
std::string SummaryCsv(const RunReport& report);
std::string FairnessCsv(const RunReport& report);
std::string ExplanationsJson(const RunReport& report);

}  // namespace fedsln

#endif  // FEDSLN_RUNNER_HPP_
