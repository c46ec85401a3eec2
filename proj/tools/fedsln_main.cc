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

// fedsln command-line tool.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fedsln/config.hpp"
#include "fedsln/error.hpp"
#include "fedsln/features.hpp"
#include "fedsln/format.hpp"
#include "fedsln/graph.hpp"
#include "fedsln/rng.hpp"
#include "fedsln/runner.hpp"

namespace {

using fedsln::ExperimentConfig;

// Options shared by every subcommand that runs an experiment.
struct ExperimentFlags {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  std::string seeds;
  std::string methods;
  std::string widths;
  std::string activation;
  double negatives = -1.0;
  double removal_fraction = -1.0;
  double train_fraction = -1.0;
  bool concurrent = false;
  bool quiet = false;
};

void AddExperimentFlags(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("-c,--config", f.config_path,
                  "Config file (text grammar or run_manifest.json)")
      ->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", f.overrides,
                  "Override one entry, e.g. fedala.global_rounds=5");
  cmd->add_option("-o,--out", f.output_dir, "Output directory");
  cmd->add_option("--seeds", f.seeds, "Comma-separated seeds");
  cmd->add_option("--methods", f.methods,
                  "Comma-separated subset of centralized,fedavg,fedavg_ft,"
                  "perfedavg_hf,fedala");
  cmd->add_option("--widths", f.widths, "Layer widths, e.g. 6,32,16,1");
  cmd->add_option("--activation", f.activation, "softplus or tanh");
  cmd->add_option("--negatives", f.negatives, "Negatives per positive pair");
  cmd->add_option("--removal-fraction", f.removal_fraction,
                  "Fraction of universe pairs removed from the earlier "
                  "snapshot");
  cmd->add_option("--train-fraction", f.train_fraction,
                  "Fraction of examples used for training");
  cmd->add_flag("--concurrent", f.concurrent, "One thread per client");
  cmd->add_flag("-q,--quiet", f.quiet, "Print only the written files");
}

ExperimentConfig ResolveConfig(const ExperimentFlags& f) {
  ExperimentConfig cfg = f.config_path.empty()
                             ? fedsln::DefaultExperimentConfig()
                             : fedsln::LoadConfigFile(f.config_path);
  std::vector<std::string> sets;
  auto add = [&sets](const std::string& key, const std::string& value) {
    sets.push_back(key + "=" + value);
  };
  if (!f.output_dir.empty()) add("experiment.output_dir", f.output_dir);
  if (!f.seeds.empty()) add("experiment.seeds", f.seeds);
  if (!f.methods.empty()) add("experiment.methods", f.methods);
  if (!f.widths.empty()) add("experiment.widths", f.widths);
  if (!f.activation.empty()) add("experiment.activation", f.activation);
  if (f.negatives >= 0.0) {
    add("experiment.negatives_per_positive", fedsln::FormatDouble(f.negatives));
  }
  if (f.removal_fraction >= 0.0) {
    add("split.removal_fraction", fedsln::FormatDouble(f.removal_fraction));
  }
  if (f.train_fraction >= 0.0) {
    add("split.train_fraction", fedsln::FormatDouble(f.train_fraction));
  }
  if (f.concurrent) add("experiment.concurrent", "true");
  sets.insert(sets.end(), f.overrides.begin(), f.overrides.end());
  for (const auto& s : sets) fedsln::ApplyOverride(cfg, s);
  cfg.Validate();
  return cfg;
}

fedsln::RunReport RunAndEmit(const ExperimentConfig& cfg, bool quiet) {
  fedsln::RunReport report = fedsln::RunExperiment(cfg);
  const auto files = fedsln::EmitReports(report, cfg.output_dir);
  if (quiet) {
    for (const auto& f : files) std::cout << f << '\n';
  } else {
    std::cout << "wrote " << files.size() << " files to " << cfg.output_dir
              << '\n';
  }
  return report;
}

std::string Fixed(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

void PrintSummary(const fedsln::RunReport& report) {
  std::cout << "method         client        accuracy          auc\n";
  for (const auto& r : report.summary) {
    std::string method = fedsln::ToString(r.method);
    method.resize(std::max<std::size_t>(method.size(), 14), ' ');
    std::string client = report.client_names[r.client];
    client.resize(std::max<std::size_t>(client.size(), 12), ' ');
    std::cout << method << ' ' << client << ' ' << Fixed(r.accuracy_mean)
              << " +- " << Fixed(r.accuracy_std) << "  " << Fixed(r.auc_mean)
              << '\n';
  }
}

void PrintFairness(const fedsln::RunReport& report) {
  for (const auto& [m, f] : report.fairness) {
    std::cout << fedsln::ToString(m) << ": tpr_range "
              << fedsln::FormatDouble(f.tpr_range) << ", fpr_range "
              << fedsln::FormatDouble(f.fpr_range) << '\n';
  }
}

// Writes to stdout for "" or "-", else to `out`, creating its directory.
template <typename Fn>
void WriteOutput(const std::string& out, Fn&& write) {
  if (out.empty() || out == "-") {
    write(std::cout);
    return;
  }
  const std::filesystem::path path(out);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream file(path);
  if (!file) throw fedsln::Error("cannot write " + out);
  write(file);
  if (!file.flush()) throw fedsln::Error("failed writing " + out);
}

int Generate(const fedsln::SyntheticSpec& spec, const std::string& out) {
  const fedsln::SlnGraph graph = fedsln::GenerateSynthetic(spec);
  WriteOutput(out, [&](std::ostream& o) { fedsln::WriteEdgeList(graph, o); });
  std::cerr << graph.node_count() << " nodes, " << graph.edge_count()
            << " edges\n";
  return 0;
}

int Featurize(const std::string& edges, double negatives,
              const fedsln::SplitSpec& split, const std::string& out) {
  const fedsln::SlnGraph graph = fedsln::LoadEdgeListFile(edges);
  auto universe = fedsln::SamplePairUniverse(
      graph, negatives, fedsln::DeriveSeed(split.seed, "universe"));
  fedsln::SplitSpec s = split;
  s.seed = fedsln::DeriveSeed(split.seed, "temporal");
  const fedsln::TemporalPair tp =
      fedsln::TemporalSplit(graph, std::move(universe), s);
  const auto examples = fedsln::BuildExamples(tp, tp.pair_universe);
  WriteOutput(out,
              [&](std::ostream& o) { fedsln::WriteExamplesCsv(examples, o); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fedsln: federated link prediction on social learning networks"};
  app.require_subcommand(1);

  fedsln::SyntheticSpec synth;
  std::string generate_out;
  auto* generate = app.add_subcommand("generate", "Write a synthetic graph");
  generate->add_option("--nodes", synth.n_nodes, "Node count");
  generate->add_option("--communities", synth.n_communities, "Communities");
  generate->add_option("--intra-p", synth.intra_p,
                       "Link probability within a community");
  generate->add_option("--inter-p", synth.inter_p,
                       "Link probability across communities");
  generate->add_option("--seed", synth.seed, "Generator seed");
  generate->add_option("-o,--out", generate_out, "Edge list path (- = stdout)");

  std::string edges_path, featurize_out;
  double featurize_negatives = 5.0;
  fedsln::SplitSpec featurize_split;
  auto* featurize =
      app.add_subcommand("featurize", "Turn an edge list into example rows");
  featurize->add_option("edges", edges_path, "Edge list")
      ->required()
      ->check(CLI::ExistingFile);
  featurize->add_option("--negatives", featurize_negatives,
                        "Negatives per positive pair");
  featurize->add_option("--removal-fraction", featurize_split.removal_fraction,
                        "Fraction of pairs removed from the earlier snapshot");
  featurize->add_option("--seed", featurize_split.seed, "Seed");
  featurize->add_option("-o,--out", featurize_out, "CSV path (- = stdout)");

  ExperimentFlags train_flags, fairness_flags, explain_flags, report_flags;
  auto* train = app.add_subcommand("train", "Run the configured methods");
  AddExperimentFlags(train, train_flags);
  auto* fairness = app.add_subcommand(
      "fairness", "Run the experiment and print TPR/FPR ranges");
  AddExperimentFlags(fairness, fairness_flags);
  auto* explain = app.add_subcommand(
      "explain", "Run the experiment with Shapley explanations enabled");
  AddExperimentFlags(explain, explain_flags);
  auto* report = app.add_subcommand(
      "report", "Run the experiment and print the summary and fairness");
  AddExperimentFlags(report, report_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return Generate(synth, generate_out);
    if (featurize->parsed()) {
      featurize_split.Validate();
      return Featurize(edges_path, featurize_negatives, featurize_split,
                       featurize_out);
    }
    if (train->parsed()) {
      const auto r = RunAndEmit(ResolveConfig(train_flags), train_flags.quiet);
      if (!train_flags.quiet) PrintSummary(r);
    } else if (fairness->parsed()) {
      const auto r =
          RunAndEmit(ResolveConfig(fairness_flags), fairness_flags.quiet);
      if (!fairness_flags.quiet) PrintFairness(r);
    } else if (explain->parsed()) {
      ExperimentConfig cfg = ResolveConfig(explain_flags);
      cfg.explain.enabled = true;
      RunAndEmit(cfg, explain_flags.quiet);
    } else if (report->parsed()) {
      const auto r =
          RunAndEmit(ResolveConfig(report_flags), report_flags.quiet);
      if (!report_flags.quiet) {
        PrintSummary(r);
        PrintFairness(r);
      }
    }
  } catch (const fedsln::Error& e) {
    std::cerr << "fedsln: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "fedsln: unexpected error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
