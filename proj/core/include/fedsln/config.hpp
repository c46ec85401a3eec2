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

// Experiment configuration and its two serializations.
//
// Text grammar (one item per line):
//
//   line     := blank | comment | section | entry
//   comment  := ('#' | ';') any*
//   section  := '[' name ']'          e.g. [experiment], [client.0], [fedala]
//   entry    := key '=' value         whitespace around key and value ignored
//
// A '#' after a value starts a trailing comment. Lists are comma separated.
// Every entry must follow a section header; duplicate keys and unknown
// sections or keys are errors.
//
// Sections and keys:
//   [experiment]  seeds, methods, output_dir, widths, activation,
//                 negatives_per_positive, concurrent
//   [split]       removal_fraction, train_fraction
//   [client.N]    name, and either edge_list or the synthetic generator keys
//                 n_nodes, communities, intra_p, inter_p, graph_seed
//   [explain]     enabled, methods, pairs, background
//   [centralized] [fedavg] [fedavg_ft] [perfedavg_hf] [fedala]
//                 learning_rate, batch_size, local_steps, global_rounds,
//                 epochs, positive_weight, meta_inner, meta_outer, hf_delta,
//                 ala_top_layers, ala_data_percent, ala_weight_lr,
//                 ala_convergence_tol, ala_window, ala_max_updates,
//                 ala_freeze_weights
//
// The JSON manifest form is {"format": "fedsln-manifest-1", "config":
// {section: {key: value-string}}} and holds every resolved key.

#ifndef FEDSLN_CONFIG_HPP_
#define FEDSLN_CONFIG_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fedsln/graph.hpp"
#include "fedsln/neural.hpp"

namespace fedsln {

enum class Method { kCentralized, kFedAvg, kFedAvgFt, kPerFedAvgHf, kFedAla };

inline constexpr Method kAllMethods[] = {
    Method::kCentralized, Method::kFedAvg, Method::kFedAvgFt,
    Method::kPerFedAvgHf, Method::kFedAla};

std::string ToString(Method m);
Method MethodFromString(const std::string& s);

// Per-method defaults of the reference hyperparameter table.
TrainConfig DefaultTrainConfig(Method m);

struct ClientSource {
  std::string name;
  std::string edge_list;                  // path, or empty
  std::optional<SyntheticSpec> synthetic;  // used when edge_list is empty
};

struct ExplainConfig {
  bool enabled = false;
  std::vector<Method> methods = {Method::kCentralized, Method::kFedAla};
  std::size_t pairs = 20;
  std::size_t background = 100;
};

struct ExperimentConfig {
  std::vector<ClientSource> clients;
  SplitSpec split;  // seed is derived per run
  double negatives_per_positive = 5.0;
  std::vector<std::size_t> widths = {kNumFeatures, 32, 16, 1};
  Activation activation = Activation::kSoftplus;
  std::map<Method, TrainConfig> train;
  std::vector<Method> methods;
  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir = "fedsln_out";
  bool concurrent = false;
  ExplainConfig explain;

  const TrainConfig& Train(Method m) const;
  bool Runs(Method m) const;
  void Validate() const;
};

// All five methods with reference hyperparameters; no clients.
ExperimentConfig DefaultExperimentConfig();

// Ordered (section.key, value) pairs.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues ParseConfigText(std::istream& in);
KeyValues ParseManifestJson(const std::string& text);

// Applies entries on top of the defaults, then validates.
ExperimentConfig ConfigFromKeyValues(const KeyValues& entries);
// Applies a single "section.key=value" override in place.
void ApplyOverride(ExperimentConfig& cfg, const std::string& assignment);

KeyValues ConfigToKeyValues(const ExperimentConfig& cfg);
std::string ConfigToText(const ExperimentConfig& cfg);
std::string ConfigToManifestJson(const ExperimentConfig& cfg);

// Reads either the text grammar or a JSON manifest (detected by a leading
// '{').
ExperimentConfig LoadConfigFile(const std::string& path);

}  // namespace fedsln

#endif  // FEDSLN_CONFIG_HPP_
