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

// Personalized federated learning: local fine-tuning of the global model,
// Hessian-free meta-learning local updates, and adaptive local aggregation.

#ifndef FEDSLN_PERSONALIZATION_HPP_
#define FEDSLN_PERSONALIZATION_HPP_

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fedsln/federation.hpp"
#include "fedsln/neural.hpp"

namespace fedsln {

struct PersonalizedOutcome {
  std::string method;
  std::vector<ModelParams> models;     // one per client
  std::vector<MetricsReport> reports;  // on each client's own test split
  ModelParams global;                  // final aggregated model
  std::vector<RoundRecord> history;
};

// Evaluates models[i] on clients[i]'s test split.
std::vector<MetricsReport> EvaluatePerClient(
    std::span<const ModelParams> models, std::span<const ClientState> clients);

// ---------------------------------------------------------------------------
// Fine-tuning

// Exactly one pass over the client's training split in mini-batches of
// `batch_size`, drawn from the client's dedicated fine-tuning stream.
ModelParams FineTune(const ModelParams& global, const ClientState& client,
                     double learning_rate, std::size_t batch_size,
                     double positive_weight = 1.0);

// FedAvg with `fedavg`, then one fine-tuning epoch per client with the
// learning rate and batch size of `fine_tune`.
PersonalizedOutcome RunFedAvgFineTune(std::span<ClientState> clients,
                                      const ModelParams& initial_global,
                                      const TrainConfig& fedavg,
                                      const TrainConfig& fine_tune,
                                      const ExecutionOptions& exec = {});

// ---------------------------------------------------------------------------
// Hessian-free meta-learning

using FlatGradientFn =
    std::function<std::vector<double>(std::span<const double> w)>;

// Generic meta step over flat parameters:
//   g1 = grad1(w); w' = w - alpha g1; g2 = grad2(w');
//   d  = [grad3(w + delta g2) - grad3(w - delta g2)] / (2 delta);
//   return w - beta (g2 - alpha d).
std::vector<double> HessianFreeMetaStep(std::span<const double> w,
                                        const FlatGradientFn& grad1,
                                        const FlatGradientFn& grad2,
                                        const FlatGradientFn& grad3,
                                        double alpha, double beta,
                                        double delta);

// Central-difference Hessian-vector product of the batch loss at `params`.
ModelParams FiniteDifferenceHvp(const ModelParams& params,
                                const ModelParams& direction,
                                std::span<const LabeledSample> batch,
                                double delta, double positive_weight = 1.0);

// The meta step on the network, with batches b1, b2, b3.
ModelParams PerFedAvgHfStep(const ModelParams& params,
                            std::span<const LabeledSample> b1,
                            std::span<const LabeledSample> b2,
                            std::span<const LabeledSample> b3, double alpha,
                            double beta, double delta,
                            double positive_weight = 1.0);

// K rounds of e_max meta steps per client plus aggregation, then one
// fine-tuning epoch per client at the method's learning rate. b2 comes from
// the client's primary batch stream, b1 and b3 from its auxiliary stream.
PersonalizedOutcome RunPerFedAvgHf(std::span<ClientState> clients,
                                   const ModelParams& initial_global,
                                   const TrainConfig& config,
                                   const ExecutionOptions& exec = {});

// ---------------------------------------------------------------------------
// Adaptive local aggregation

// Number of adapted layers must not exceed the layer count.
AlaWeights OnesAlaWeights(const ModelParams& like, std::size_t top_layers);

// Bottom layers copied from global; on the top layers
//   W * global + (1 - W) * local_prev,
// which equals local_prev + (global - local_prev) * W and is exact at W = 0
// and W = 1.
ModelParams AlaInit(const ModelParams& local_prev, const ModelParams& global,
                    const AlaWeights& weights, std::size_t top_layers);

// W <- clip(W - lr * grad_theta * (global - local), 0, 1) elementwise.
void AlaWeightUpdate(std::span<double> weights,
                     std::span<const double> grad_theta,
                     std::span<const double> global_minus_local, double lr);

struct AlaLearningTrace {
  std::vector<double> losses;  // loss before each update
  bool converged = false;
};

// Gradient descent on W over `subsample` with the model parameters frozen.
// Stops when the sample standard deviation of the last `window` losses drops
// below `tol`, or after `max_updates` updates.
AlaWeights LearnAlaWeights(const ModelParams& global,
                           const ModelParams& local_prev, AlaWeights start,
                           std::span<const LabeledSample> subsample,
                           std::size_t top_layers, double lr, double tol,
                           std::size_t window, std::size_t max_updates,
                           AlaLearningTrace* trace = nullptr,
                           double positive_weight = 1.0);

// Seeded zeta-percent subsample of the client's training split.
std::vector<LabeledSample> AlaSubsample(const ClientState& client,
                                        double percent, std::size_t round);

// The client-side synchronization step of FedALA for round `round`.
ModelParams AlaSynchronize(ClientState& client, const ModelParams& global,
                           const TrainConfig& config, std::size_t round);

PersonalizedOutcome RunFedAla(std::span<ClientState> clients,
                              const ModelParams& initial_global,
                              const TrainConfig& config,
                              const ExecutionOptions& exec = {});

// layer,index,weight
void WriteAlaWeightsCsv(const AlaWeights& weights, const ModelParams& like,
                        std::ostream& out);

}  // namespace fedsln

#endif  // FEDSLN_PERSONALIZATION_HPP_
