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

#include "fedsln/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fedsln/error.hpp"
#include "fedsln/format.hpp"
#include "fedsln/personalization.hpp"
#include "fedsln/rng.hpp"

namespace fedsln {

std::vector<SlnGraph> LoadClientGraphs(const ExperimentConfig& cfg) {
  std::vector<SlnGraph> graphs;
  for (const auto& c : cfg.clients) {
    if (!c.edge_list.empty()) {
      graphs.push_back(LoadEdgeListFile(c.edge_list));
    } else {
      graphs.push_back(GenerateSynthetic(*c.synthetic));
    }
  }
  return graphs;
}

std::vector<PreparedClient> PrepareClients(const ExperimentConfig& cfg,
                                           std::span<const SlnGraph> graphs,
                                           std::uint64_t seed) {
  std::vector<PreparedClient> out;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    PreparedClient pc;
    pc.name = cfg.clients[i].name;
    auto universe = SamplePairUniverse(graphs[i], cfg.negatives_per_positive,
                                       DeriveSeed(seed, "universe", i));
    SplitSpec split = cfg.split;
    split.seed = DeriveSeed(seed, "temporal", i);
    pc.temporal = TemporalSplit(graphs[i], std::move(universe), split);
    auto examples = BuildExamples(pc.temporal, pc.temporal.pair_universe);
    auto [train, test] = TrainTestSplit(std::move(examples),
                                        cfg.split.train_fraction,
                                        DeriveSeed(seed, "split", i));
    if (test.empty()) {
      throw ValidationError("client " + pc.name + " has an empty test split");
    }
    pc.train = std::move(train);
    pc.test = std::move(test);
    out.push_back(std::move(pc));
  }
  return out;
}

std::pair<double, double> MeanStd(std::span<const double> xs) {
  if (xs.empty()) return {std::nan(""), std::nan("")};
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

namespace {

template <typename Fn>
auto Stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw Error("[" + stage + "] " + e.what());
  }
}

std::string CheckpointText(const Classifier& c) {
  std::ostringstream out;
  SaveCheckpoint(c, out);
  return out.str();
}

// Final per-client classifiers of one method for one seed.
struct MethodOutcome {
  std::vector<Classifier> models;
  std::vector<MetricsReport> reports;
};

std::vector<ClientState> MakeStates(const std::vector<ClientData>& data,
                                    std::uint64_t seed) {
  std::vector<ClientState> states;
  for (const auto& d : data) states.emplace_back(d, seed);
  return states;
}

MethodOutcome RunCentralized(const ExperimentConfig& cfg,
                             const std::vector<ClientData>& data,
                             const ModelParams& initial, std::uint64_t seed) {
  const TrainConfig& tc = cfg.Train(Method::kCentralized);
  audit::ActorScope scope(audit::kPooling);
  std::vector<PairExample> pooled;
  for (const auto& d : data) {
    const auto rows = d.raw_train();
    pooled.insert(pooled.end(), rows.begin(), rows.end());
  }
  // The pooled dataset occupies the first client's stream slot, so that with
  // a single client the baseline sees exactly that client's batch sequence.
  ClientData pooled_data(data.front().id(), std::move(pooled), {});
  ClientState state(pooled_data, seed);
  state.BeginRun(tc.batch_size);
  const std::size_t steps = tc.epochs * state.stream->batches_per_pass();
  ModelParams trained =
      TrainSteps(initial, pooled_data.train(), tc.learning_rate, steps,
                 *state.stream, tc.positive_weight);

  MethodOutcome out;
  const Standardizer& standardizer = pooled_data.standardizer();
  for (const auto& d : data) {
    const auto test = Standardize(d.raw_test(), standardizer);
    out.reports.push_back(Evaluate(trained, test));
    out.models.push_back({trained, standardizer});
  }
  return out;
}

MethodOutcome FromModels(std::vector<ModelParams> models,
                         std::vector<MetricsReport> reports,
                         const std::vector<ClientData>& data) {
  MethodOutcome out;
  out.reports = std::move(reports);
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.models.push_back({std::move(models[i]), data[i].standardizer()});
  }
  return out;
}

std::string HistoryText(const std::vector<RoundRecord>& history,
                        std::span<const ClientState> states) {
  std::ostringstream out;
  WriteHistoryCsv(history, states, out);
  return out.str();
}

void ExplainClients(const ExperimentConfig& cfg, Method method,
                    const MethodOutcome& outcome,
                    const std::vector<ClientData>& data, std::uint64_t seed,
                    RunReport& report) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    audit::ActorScope scope(data[i].id());
    const auto train = data[i].raw_train();
    const auto test = data[i].raw_test();

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(DeriveSeed(seed, "background", i));
    rng.Shuffle(std::span<std::size_t>(order));
    std::vector<FeatureVector> background;
    for (std::size_t k = 0; k < std::min(cfg.explain.background, order.size());
         ++k) {
      background.push_back(train[order[k]].features);
    }

    std::vector<std::size_t> picks(test.size());
    std::iota(picks.begin(), picks.end(), std::size_t{0});
    Rng pick_rng(DeriveSeed(seed, "explain", i));
    pick_rng.Shuffle(std::span<std::size_t>(picks));
    picks.resize(std::min(cfg.explain.pairs, picks.size()));

    std::vector<ShapleyExplanation> explanations;
    for (std::size_t k : picks) {
      ExplanationRecord rec;
      rec.method = method;
      rec.client = i;
      rec.pair = {test[k].u, test[k].v};
      rec.features = test[k].features;
      rec.explanation =
          ShapleyValues(outcome.models[i], test[k].features, background);
      explanations.push_back(rec.explanation);
      report.explanations.push_back(std::move(rec));
    }
    if (!explanations.empty()) {
      report.importance[{method, i}] = GlobalImportance(explanations);
    }
  }
}

}  // namespace

RunReport RunExperiment(const ExperimentConfig& cfg) {
  Stage("config", [&] { cfg.Validate(); });
  RunReport report;
  report.config = cfg;
  for (const auto& c : cfg.clients) report.client_names.push_back(c.name);
  audit::Reset();

  const std::vector<SlnGraph> graphs =
      Stage("data", [&] { return LoadClientGraphs(cfg); });
  const ExecutionOptions exec{cfg.concurrent};

  // per method -> per seed -> per client
  std::map<Method, std::vector<MethodOutcome>> outcomes;

  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    const std::uint64_t seed = cfg.seeds[s];
    const std::string tag = "seed" + std::to_string(seed);
    auto prepared =
        Stage("data", [&] { return PrepareClients(cfg, graphs, seed); });

    if (s == 0) {
      for (std::size_t a = 0; a < prepared.size(); ++a) {
        for (std::size_t b = a + 1; b < prepared.size(); ++b) {
          for (std::size_t f = 0; f < kNumFeatures; ++f) {
            std::vector<double> xa, xb;
            for (const auto* rows : {&prepared[a].train, &prepared[a].test}) {
              for (const auto& ex : *rows) xa.push_back(ex.features[f]);
            }
            for (const auto* rows : {&prepared[b].train, &prepared[b].test}) {
              for (const auto& ex : *rows) xb.push_back(ex.features[f]);
            }
            report.ks.push_back({a, b, f, KsStatistic(xa, xb)});
          }
        }
      }
    }

    std::vector<ClientData> data;
    Stage("data", [&] {
      for (std::size_t i = 0; i < prepared.size(); ++i) {
        data.emplace_back(static_cast<int>(i), std::move(prepared[i].train),
                          std::move(prepared[i].test));
      }
    });
    const ModelParams initial = ModelParams::Initialize(
        cfg.widths, DeriveSeed(seed, "init"), cfg.activation);

    std::optional<ModelParams> fedavg_global;
    for (Method m : cfg.methods) {
      const std::string stage = "train:" + ToString(m);
      MethodOutcome outcome = Stage(stage, [&]() -> MethodOutcome {
        switch (m) {
          case Method::kCentralized:
            return RunCentralized(cfg, data, initial, seed);
          case Method::kFedAvg:
          case Method::kFedAvgFt: {
            auto states = MakeStates(data, seed);
            if (!fedavg_global) {
              auto fed = RunFedAvg(states, initial, cfg.Train(Method::kFedAvg),
                                   exec);
              report.artifacts.push_back(
                  {"history/fedavg_" + tag + ".csv",
                   HistoryText(fed.history, states)});
              fedavg_global = std::move(fed.global);
            }
            std::vector<ModelParams> models;
            if (m == Method::kFedAvg) {
              models.assign(data.size(), *fedavg_global);
            } else {
              const TrainConfig& ft = cfg.Train(Method::kFedAvgFt);
              for (auto& st : states) {
                audit::ActorScope scope(st.id());
                models.push_back(FineTune(*fedavg_global, st, ft.learning_rate,
                                          ft.batch_size, ft.positive_weight));
              }
            }
            auto reports = EvaluatePerClient(models, states);
            return FromModels(std::move(models), std::move(reports), data);
          }
          case Method::kPerFedAvgHf: {
            auto states = MakeStates(data, seed);
            auto res = RunPerFedAvgHf(states, initial,
                                      cfg.Train(Method::kPerFedAvgHf), exec);
            report.artifacts.push_back({"history/perfedavg_hf_" + tag + ".csv",
                                        HistoryText(res.history, states)});
            return FromModels(std::move(res.models), std::move(res.reports),
                              data);
          }
          case Method::kFedAla: {
            auto states = MakeStates(data, seed);
            auto res =
                RunFedAla(states, initial, cfg.Train(Method::kFedAla), exec);
            report.artifacts.push_back({"history/fedala_" + tag + ".csv",
                                        HistoryText(res.history, states)});
            for (std::size_t i = 0; i < states.size(); ++i) {
              std::ostringstream w;
              WriteAlaWeightsCsv(states[i].ala_weights, initial, w);
              report.artifacts.push_back({"ala_weights/" + tag + "_" +
                                              cfg.clients[i].name + ".csv",
                                          w.str()});
            }
            return FromModels(std::move(res.models), std::move(res.reports),
                              data);
          }
        }
        throw Error("unhandled method");
      });

      for (std::size_t i = 0; i < data.size(); ++i) {
        report.cells.push_back({m, i, seed, outcome.reports[i]});
        report.artifacts.push_back({"models/" + tag + "/" + ToString(m) +
                                        "_" + cfg.clients[i].name + ".ckpt",
                                    CheckpointText(outcome.models[i])});
      }
      if (s == 0 && cfg.explain.enabled &&
          std::find(cfg.explain.methods.begin(), cfg.explain.methods.end(),
                    m) != cfg.explain.methods.end()) {
        Stage("explain", [&] {
          ExplainClients(cfg, m, outcome, data, seed, report);
        });
      }
      outcomes[m].push_back(std::move(outcome));
    }
  }

  // Order cells method-major, then seed, then client.
  std::stable_sort(report.cells.begin(), report.cells.end(),
                   [](const CellResult& a, const CellResult& b) {
                     return a.method < b.method;
                   });

  std::map<Method, std::vector<double>> client_accuracy;
  for (Method m : cfg.methods) {
    std::vector<ConfusionRates> rates(cfg.clients.size());
    for (std::size_t i = 0; i < cfg.clients.size(); ++i) {
      std::vector<double> acc, loss, auc, tpr, fpr;
      for (const auto& c : report.cells) {
        if (c.method != m || c.client != i) continue;
        acc.push_back(c.metrics.accuracy);
        loss.push_back(c.metrics.mean_loss);
        auc.push_back(c.metrics.auc);
        const ConfusionRates r = ComputeRates(c.metrics.counts);
        if (r.tpr) tpr.push_back(*r.tpr);
        if (r.fpr) fpr.push_back(*r.fpr);
      }
      SummaryRow row;
      row.method = m;
      row.client = i;
      row.n_seeds = acc.size();
      std::tie(row.accuracy_mean, row.accuracy_std) = MeanStd(acc);
      std::tie(row.loss_mean, row.loss_std) = MeanStd(loss);
      std::tie(row.auc_mean, row.auc_std) = MeanStd(auc);
      report.summary.push_back(row);
      client_accuracy[m].push_back(row.accuracy_mean);
      if (!tpr.empty()) rates[i].tpr = MeanStd(tpr).first;
      if (!fpr.empty()) rates[i].fpr = MeanStd(fpr).first;
    }
    report.fairness[m] = MakeFairnessReport(rates);
  }

  if (cfg.Runs(Method::kCentralized) && cfg.clients.size() >= 2) {
    for (Method m : cfg.methods) {
      if (m == Method::kCentralized) continue;
      SignificanceRecord rec{m, Method::kCentralized, std::nullopt, {}};
      try {
        rec.test = PairedTTest(client_accuracy[m],
                               client_accuracy[Method::kCentralized]);
        rec.p = TwoSidedPValue(rec.test->t_statistic, rec.test->dof);
      } catch (const ValidationError&) {
        rec.p = {std::nan(""), std::nan("")};
      }
      report.significance.push_back(rec);
    }
  }

  report.access = audit::Snapshot();
  return report;
}

std::string MetricsCsv(const RunReport& report) {
  std::ostringstream out;
  out << "method,client,seed,accuracy,loss,auc\n";
  for (const auto& c : report.cells) {
    out << ToString(c.method) << ',' << report.client_names[c.client] << ','
        << c.seed << ',' << FormatDouble(c.metrics.accuracy) << ','
        << FormatDouble(c.metrics.mean_loss) << ','
        << FormatDouble(c.metrics.auc) << '\n';
  }
  return out.str();
}

std::string SummaryCsv(const RunReport& report) {
  std::ostringstream out;
  out << "method,client,n_seeds,accuracy_mean,accuracy_std,loss_mean,"
         "loss_std,auc_mean,auc_std\n";
  for (const auto& r : report.summary) {
    out << ToString(r.method) << ',' << report.client_names[r.client] << ','
        << r.n_seeds << ',' << FormatDouble(r.accuracy_mean) << ','
        << FormatDouble(r.accuracy_std) << ',' << FormatDouble(r.loss_mean)
        << ',' << FormatDouble(r.loss_std) << ',' << FormatDouble(r.auc_mean)
        << ',' << FormatDouble(r.auc_std) << '\n';
  }
  return out.str();
}

std::string FairnessCsv(const RunReport& report) {
  std::ostringstream out;
  auto opt = [](const std::optional<double>& v) {
    return v ? FormatDouble(*v) : std::string("nan");
  };
  out << "method,client,tpr,fpr\n";
  for (const auto& [m, f] : report.fairness) {
    for (std::size_t i = 0; i < f.per_client.size(); ++i) {
      out << ToString(m) << ',' << report.client_names[i] << ','
          << opt(f.per_client[i].tpr) << ',' << opt(f.per_client[i].fpr)
          << '\n';
    }
    out << ToString(m) << ",range," << FormatDouble(f.tpr_range) << ','
        << FormatDouble(f.fpr_range) << '\n';
  }
  return out.str();
}

std::string ExplanationsJson(const RunReport& report) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& e : report.explanations) {
    nlohmann::json rec;
    rec["method"] = ToString(e.method);
    rec["client"] = report.client_names[e.client];
    rec["u"] = e.pair.u;
    rec["v"] = e.pair.v;
    rec["base"] = e.explanation.base_value;
    rec["phi"] = std::vector<double>(e.explanation.phi.begin(),
                                     e.explanation.phi.end());
    rec["predicted"] = e.explanation.predicted;
    records.push_back(std::move(rec));
  }
  return records.dump(2) + "\n";
}

namespace {

std::string KsCsv(const RunReport& report) {
  std::ostringstream out;
  out << "client_a,client_b,feature,statistic\n";
  for (const auto& k : report.ks) {
    out << report.client_names[k.client_a] << ','
        << report.client_names[k.client_b] << ','
        << kFeatureNames[k.feature] << ',' << FormatDouble(k.statistic)
        << '\n';
  }
  return out.str();
}

std::string SignificanceCsv(const RunReport& report) {
  std::ostringstream out;
  out << "method,baseline,t,dof,p_lower,p_upper,significant_05\n";
  for (const auto& r : report.significance) {
    out << ToString(r.method) << ',' << ToString(r.baseline) << ',';
    if (r.test) {
      out << FormatDouble(r.test->t_statistic) << ',' << r.test->dof << ','
          << FormatDouble(r.p.lower) << ',' << FormatDouble(r.p.upper) << ','
          << (SignificantAt(r.test->t_statistic, r.test->dof) ? "true"
                                                              : "false");
    } else {
      out << "nan,0,nan,nan,degenerate";
    }
    out << '\n';
  }
  return out.str();
}

std::string ImportanceCsv(const RunReport& report) {
  std::ostringstream out;
  out << "method,client,feature,importance,rank\n";
  for (const auto& [key, imp] : report.importance) {
    for (std::size_t r = 0; r < kNumFeatures; ++r) {
      const std::size_t f = imp.ranking[r];
      out << ToString(key.first) << ',' << report.client_names[key.second]
          << ',' << kFeatureNames[f] << ','
          << FormatDouble(imp.mean_abs_phi[f]) << ',' << r + 1 << '\n';
    }
  }
  return out.str();
}

std::string ShapSummaryCsv(const RunReport& report) {
  std::ostringstream out;
  out << "method,client,u,v,feature,value,phi\n";
  for (const auto& e : report.explanations) {
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      out << ToString(e.method) << ',' << report.client_names[e.client] << ','
          << e.pair.u << ',' << e.pair.v << ',' << kFeatureNames[f] << ','
          << FormatDouble(e.features[f]) << ','
          << FormatDouble(e.explanation.phi[f]) << '\n';
    }
  }
  return out.str();
}

}  // namespace

std::vector<std::string> EmitReports(const RunReport& report,
                                     const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<Artifact> files = {
      {"metrics.csv", MetricsCsv(report)},
      {"summary.csv", SummaryCsv(report)},
      {"fairness.csv", FairnessCsv(report)},
      {"ks.csv", KsCsv(report)},
      {"significance.csv", SignificanceCsv(report)},
      {"run_manifest.json", ConfigToManifestJson(report.config)},
  };
  if (!report.explanations.empty()) {
    files.push_back({"importance.csv", ImportanceCsv(report)});
    files.push_back({"shap_summary.csv", ShapSummaryCsv(report)});
    files.push_back({"explanations.json", ExplanationsJson(report)});
    for (const auto& [key, imp] : report.importance) {
      const std::string name =
          ToString(key.first) + "_" + report.client_names[key.second];
      std::ostringstream svg;
      WriteImportanceSvg(imp, name, svg);
      files.push_back({"importance_" + name + ".svg", svg.str()});
    }
  }
  files.insert(files.end(), report.artifacts.begin(), report.artifacts.end());

  std::vector<std::string> written;
  try {
    fs::create_directories(dir);
    for (const auto& f : files) {
      const fs::path path = fs::path(dir) / f.path;
      fs::create_directories(path.parent_path());
      std::ofstream out(path, std::ios::binary);
      if (!out) throw Error("cannot write " + path.string());
      out << f.content;
      out.close();
      if (!out) throw Error("failed writing " + path.string());
      written.push_back(path.string());
    }
  } catch (const std::exception& e) {
    for (const auto& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    throw Error(std::string("[emit] ") + e.what());
  }
  return written;
}

}  // namespace fedsln
