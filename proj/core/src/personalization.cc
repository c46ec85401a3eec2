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

#include "fedsln/personalization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "fedsln/error.hpp"
#include "fedsln/format.hpp"
#include "fedsln/graph.hpp"
#include "fedsln/rng.hpp"

namespace fedsln {

std::vector<MetricsReport> EvaluatePerClient(
    std::span<const ModelParams> models, std::span<const ClientState> clients) {
  if (models.size() != clients.size()) {
    throw ValidationError("one model per client required");
  }
  std::vector<MetricsReport> out;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    audit::ActorScope scope(clients[i].id());
    out.push_back(Evaluate(models[i], clients[i].data->test()));
  }
  return out;
}

ModelParams FineTune(const ModelParams& global, const ClientState& client,
                     double learning_rate, std::size_t batch_size,
                     double positive_weight) {
  BatchStream stream(client.train_size(), batch_size,
                     DeriveSeed(client.seed, "finetune"));
  return TrainSteps(global, client.data->train(), learning_rate,
                    stream.batches_per_pass(), stream, positive_weight);
}

namespace {

std::vector<ModelParams> FineTuneAll(std::span<ClientState> clients,
                                     const ModelParams& global, double lr,
                                     std::size_t batch_size,
                                     double positive_weight) {
  std::vector<ModelParams> out;
  for (auto& c : clients) {
    audit::ActorScope scope(c.id());
    out.push_back(FineTune(global, c, lr, batch_size, positive_weight));
  }
  return out;
}

}  // namespace

PersonalizedOutcome RunFedAvgFineTune(std::span<ClientState> clients,
                                      const ModelParams& initial_global,
                                      const TrainConfig& fedavg,
                                      const TrainConfig& fine_tune,
                                      const ExecutionOptions& exec) {
  fine_tune.Validate();
  FederatedResult fed = RunFedAvg(clients, initial_global, fedavg, exec);
  PersonalizedOutcome out;
  out.method = "fedavg_ft";
  out.models = FineTuneAll(clients, fed.global, fine_tune.learning_rate,
                           fine_tune.batch_size, fine_tune.positive_weight);
  out.reports = EvaluatePerClient(out.models, clients);
  out.global = std::move(fed.global);
  out.history = std::move(fed.history);
  return out;
}

std::vector<double> HessianFreeMetaStep(std::span<const double> w,
                                        const FlatGradientFn& grad1,
                                        const FlatGradientFn& grad2,
                                        const FlatGradientFn& grad3,
                                        double alpha, double beta,
                                        double delta) {
  if (!(delta > 0.0)) throw ValidationError("hf_delta must be positive");
  const std::size_t n = w.size();
  const std::vector<double> g1 = grad1(w);
  std::vector<double> inner(n);
  for (std::size_t i = 0; i < n; ++i) inner[i] = w[i] - alpha * g1[i];
  const std::vector<double> g2 = grad2(inner);

  std::vector<double> plus(n);
  std::vector<double> minus(n);
  for (std::size_t i = 0; i < n; ++i) {
    plus[i] = w[i] + delta * g2[i];
    minus[i] = w[i] - delta * g2[i];
  }
  const std::vector<double> gp = grad3(plus);
  const std::vector<double> gm = grad3(minus);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (gp[i] - gm[i]) / (2.0 * delta);
    out[i] = w[i] - beta * (g2[i] - alpha * d);
  }
  return out;
}

ModelParams FiniteDifferenceHvp(const ModelParams& params,
                                const ModelParams& direction,
                                std::span<const LabeledSample> batch,
                                double delta, double positive_weight) {
  if (!params.SameShape(direction))
    throw ShapeError("direction shape mismatch");
  if (!(delta > 0.0)) throw ValidationError("hf_delta must be positive");
  ModelParams plus = params;
  ModelParams minus = params;
  auto p = plus.values();
  auto m = minus.values();
  auto v = direction.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] += delta * v[i];
    m[i] -= delta * v[i];
  }
  const ModelParams gp = Gradient(plus, batch, positive_weight);
  const ModelParams gm = Gradient(minus, batch, positive_weight);
  ModelParams out = params.ZerosLike();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    o[i] = (gp.values()[i] - gm.values()[i]) / (2.0 * delta);
  }
  return out;
}

ModelParams PerFedAvgHfStep(const ModelParams& params,
                            std::span<const LabeledSample> b1,
                            std::span<const LabeledSample> b2,
                            std::span<const LabeledSample> b3, double alpha,
                            double beta, double delta, double positive_weight) {
  if (b1.empty() || b2.empty() || b3.empty()) {
    throw ValidationError("meta step needs three non-empty batches");
  }
  ModelParams scratch = params;
  auto grad_on = [&](std::span<const LabeledSample> batch) {
    return [&, batch](std::span<const double> w) {
      std::copy(w.begin(), w.end(), scratch.values().begin());
      const ModelParams g = Gradient(scratch, batch, positive_weight);
      return std::vector<double>(g.values().begin(), g.values().end());
    };
  };
  const std::vector<double> next =
      HessianFreeMetaStep(params.values(), grad_on(b1), grad_on(b2),
                          grad_on(b3), alpha, beta, delta);
  ModelParams out = params;
  std::copy(next.begin(), next.end(), out.values().begin());
  return out;
}

PersonalizedOutcome RunPerFedAvgHf(std::span<ClientState> clients,
                                   const ModelParams& initial_global,
                                   const TrainConfig& config,
                                   const ExecutionOptions& exec) {
  config.Validate();
  for (auto& c : clients) c.BeginRun(config.batch_size);
  const double alpha = config.alpha();
  const double beta = config.beta();
  FederatedResult fed = RunFederated(
      clients, initial_global, config.global_rounds,
      [&](ClientState& client, const ModelParams& global, std::size_t) {
        Synchronize(client, global);
        ModelParams w = *client.local;
        const auto data = client.data->train();
        std::vector<LabeledSample> b1, b2, b3;
        for (std::size_t e = 0; e < config.local_steps; ++e) {
          GatherBatch(data, client.aux_stream->Next(), b1);
          GatherBatch(data, client.stream->Next(), b2);
          GatherBatch(data, client.aux_stream->Next(), b3);
          w = PerFedAvgHfStep(w, b1, b2, b3, alpha, beta, config.hf_delta,
                              config.positive_weight);
        }
        return w;
      },
      exec);

  PersonalizedOutcome out;
  out.method = "perfedavg_hf";
  out.models = FineTuneAll(clients, fed.global, config.learning_rate,
                           config.batch_size, config.positive_weight);
  out.reports = EvaluatePerClient(out.models, clients);
  out.global = std::move(fed.global);
  out.history = std::move(fed.history);
  return out;
}

AlaWeights OnesAlaWeights(const ModelParams& like, std::size_t top_layers) {
  if (top_layers > like.layer_count()) {
    throw ValidationError("ala_top_layers exceeds the layer count");
  }
  AlaWeights w;
  w.first_layer = like.layer_count() - top_layers;
  const std::size_t begin =
      top_layers == 0 ? like.size() : like.layer_offset(w.first_layer);
  w.values.assign(like.size() - begin, 1.0);
  return w;
}

namespace {

std::size_t TopOffset(const ModelParams& like, std::size_t top_layers) {
  if (top_layers == 0) return like.size();
  return like.layer_offset(like.layer_count() - top_layers);
}

}  // namespace

ModelParams AlaInit(const ModelParams& local_prev, const ModelParams& global,
                    const AlaWeights& weights, std::size_t top_layers) {
  if (top_layers > global.layer_count()) {
    throw ValidationError("ala_top_layers exceeds the layer count");
  }
  if (!local_prev.SameShape(global)) {
    throw ShapeError("local and global models differ in shape");
  }
  const std::size_t begin = TopOffset(global, top_layers);
  if (weights.values.size() != global.size() - begin) {
    throw ShapeError("aggregation weights do not match the top layers");
  }
  ModelParams out = global;
  auto o = out.values();
  auto g = global.values();
  auto l = local_prev.values();
  for (std::size_t i = begin; i < o.size(); ++i) {
    const double w = weights.values[i - begin];
    o[i] = w * g[i] + (1.0 - w) * l[i];
  }
  return out;
}

void AlaWeightUpdate(std::span<double> weights,
                     std::span<const double> grad_theta,
                     std::span<const double> global_minus_local, double lr) {
  if (weights.size() != grad_theta.size() ||
      weights.size() != global_minus_local.size()) {
    throw ShapeError("aggregation weight update size mismatch");
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double step = lr * grad_theta[i] * global_minus_local[i];
    weights[i] = std::clamp(weights[i] - step, 0.0, 1.0);
  }
}

namespace {

double SampleStd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) /
                      static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

AlaWeights LearnAlaWeights(const ModelParams& global,
                           const ModelParams& local_prev, AlaWeights start,
                           std::span<const LabeledSample> subsample,
                           std::size_t top_layers, double lr, double tol,
                           std::size_t window, std::size_t max_updates,
                           AlaLearningTrace* trace, double positive_weight) {
  if (subsample.empty()) {
    throw ValidationError("aggregation-weight learning on an empty subsample");
  }
  if (window == 0) throw ValidationError("ala_window must be positive");
  const std::size_t begin = TopOffset(global, top_layers);
  if (start.values.size() != global.size() - begin) {
    throw ShapeError("aggregation weights do not match the top layers");
  }
  std::vector<double> diff(global.size() - begin);
  for (std::size_t i = begin; i < global.size(); ++i) {
    diff[i - begin] = global.values()[i] - local_prev.values()[i];
  }

  AlaWeights w = std::move(start);
  std::vector<double> losses;
  ModelParams grad = global.ZerosLike();
  bool converged = false;
  for (std::size_t update = 0; update < max_updates; ++update) {
    const ModelParams theta = AlaInit(local_prev, global, w, top_layers);
    const double loss =
        AccumulateGradient(theta, subsample, grad, positive_weight);
    AlaWeightUpdate(w.values, grad.values().subspan(begin), diff, lr);
    losses.push_back(loss);
    if (losses.size() >= window &&
        SampleStd(std::span<const double>(losses).last(window)) < tol) {
      converged = true;
      break;
    }
  }
  if (trace != nullptr) {
    trace->losses = std::move(losses);
    trace->converged = converged;
  }
  return w;
}

std::vector<LabeledSample> AlaSubsample(const ClientState& client,
                                        double percent, std::size_t round) {
  const auto data = client.data->train();
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(DeriveSeed(client.seed, "ala", round));
  rng.Shuffle(std::span<std::size_t>(order));
  const std::size_t take = std::clamp<std::size_t>(
      RoundHalfUp(percent / 100.0 * static_cast<double>(data.size())), 1,
      data.size());
  std::vector<LabeledSample> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(data[order[i]]);
  return out;
}

ModelParams AlaSynchronize(ClientState& client, const ModelParams& global,
                           const TrainConfig& config, std::size_t round) {
  const std::size_t p = config.ala_top_layers;
  if (!client.local) {
    // No previous local model yet: plain copy.
    Synchronize(client, global);
    return *client.local;
  }
  if (!client.local->SameShape(global)) {
    throw ShapeError("client model shape differs from the global model");
  }
  if (client.ala_weights.empty()) {
    client.ala_weights = OnesAlaWeights(global, p);
  }
  if (!config.ala_freeze_weights) {
    const bool first = client.ala_rounds == 0;
    const auto subsample = AlaSubsample(client, config.ala_data_percent, round);
    if (first) client.ala_weights = OnesAlaWeights(global, p);
    client.ala_weights = LearnAlaWeights(
        global, *client.local, std::move(client.ala_weights), subsample, p,
        config.ala_weight_lr, config.ala_convergence_tol, config.ala_window,
        first ? config.ala_max_updates : 1, nullptr, config.positive_weight);
    ++client.ala_rounds;
  }
  return AlaInit(*client.local, global, client.ala_weights, p);
}

PersonalizedOutcome RunFedAla(std::span<ClientState> clients,
                              const ModelParams& initial_global,
                              const TrainConfig& config,
                              const ExecutionOptions& exec) {
  config.Validate();
  if (config.ala_top_layers > initial_global.layer_count()) {
    throw ValidationError("ala_top_layers exceeds the layer count");
  }
  for (auto& c : clients) c.BeginRun(config.batch_size);
  FederatedResult fed = RunFederated(
      clients, initial_global, config.global_rounds,
      [&](ClientState& client, const ModelParams& global, std::size_t round) {
        client.local = AlaSynchronize(client, global, config, round);
        return LocalRound(client, config);
      },
      exec);

  PersonalizedOutcome out;
  out.method = "fedala";
  for (auto& c : clients) {
    out.models.push_back(c.local ? *c.local : initial_global);
  }
  out.reports = EvaluatePerClient(out.models, clients);
  out.global = std::move(fed.global);
  out.history = std::move(fed.history);
  return out;
}

void WriteAlaWeightsCsv(const AlaWeights& weights, const ModelParams& like,
                        std::ostream& out) {
  out << "layer,index,weight\n";
  if (weights.empty()) return;
  std::size_t k = 0;
  for (std::size_t l = weights.first_layer; l < like.layer_count(); ++l) {
    for (std::size_t i = 0; i < like.shape(l).size(); ++i, ++k) {
      out << l << ',' << i << ',' << FormatDouble(weights.values[k]) << '\n';
    }
  }
}

}  // namespace fedsln
