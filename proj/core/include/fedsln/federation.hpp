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

// In-process federated averaging. Clients own their data exclusively; the
// server only ever sees parameter structures and training-set sizes.

#ifndef FEDSLN_FEDERATION_HPP_
#define FEDSLN_FEDERATION_HPP_

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fedsln/features.hpp"
#include "fedsln/neural.hpp"

namespace fedsln {

// Data-access instrumentation. Code acting on behalf of a client (or the
// server, or the centralized pooling baseline) opens an ActorScope; every
// read of a client's dataset is checked against the current actor.
namespace audit {

inline constexpr int kUnscoped = -1;
inline constexpr int kServer = -2;
inline constexpr int kPooling = -3;

class ActorScope {
 public:
  explicit ActorScope(int actor);
  ~ActorScope();
  ActorScope(const ActorScope&) = delete;
  ActorScope& operator=(const ActorScope&) = delete;

 private:
  int previous_;
};

int CurrentActor();

struct Counters {
  std::size_t foreign_reads = 0;  // a client or the server read another's data
  std::size_t pooled_reads = 0;   // the centralized baseline pooled data
};

Counters Snapshot();
void Reset();
void RecordRead(int owner);

}  // namespace audit

// A client's private dataset, already split and standardized with statistics
// of its own training split.
class ClientData {
 public:
  ClientData(int id, std::vector<PairExample> train,
             std::vector<PairExample> test);
  ClientData(int id, std::vector<PairExample> train,
             std::vector<PairExample> test, const Standardizer& standardizer);

  int id() const { return id_; }
  std::size_t train_size() const { return train_.size(); }
  std::size_t test_size() const { return test_.size(); }
  const Standardizer& standardizer() const { return standardizer_; }

  // Audited accessors.
  std::span<const LabeledSample> train() const;
  std::span<const LabeledSample> test() const;
  std::span<const PairExample> raw_train() const;
  std::span<const PairExample> raw_test() const;

 private:
  int id_;
  std::vector<PairExample> raw_train_;
  std::vector<PairExample> raw_test_;
  Standardizer standardizer_;
  std::vector<LabeledSample> train_;
  std::vector<LabeledSample> test_;
};

// Elementwise aggregation weights for the top layers of a model.
struct AlaWeights {
  std::size_t first_layer = 0;  // index of the lowest adapted layer
  std::vector<double> values;   // flat, aligned with those layers' slices
  bool empty() const { return values.empty(); }
};

// Mutable per-run state of one client.
struct ClientState {
  ClientState(const ClientData& data, std::uint64_t master_seed);

  const ClientData* data;
  std::uint64_t seed;                 // derived from (master_seed, client id)
  std::optional<ModelParams> local;   // w_i, absent before the first round
  std::optional<BatchStream> stream;  // primary mini-batch stream
  std::optional<BatchStream> aux_stream;
  AlaWeights ala_weights;
  std::size_t ala_rounds = 0;         // rounds in which W_i was learned
  bool batch_clamped = false;

  int id() const { return data->id(); }
  std::size_t train_size() const { return data->train_size(); }

  // Fresh streams of the given batch size; called at the start of a run.
  void BeginRun(std::size_t batch_size);
};

struct RoundRecord {
  std::size_t round = 0;
  std::vector<double> client_train_loss;  // indexed like the client list
  std::uint64_t global_checksum = 0;
  double wall_seconds = 0.0;
};

struct FederatedResult {
  ModelParams global;
  std::vector<RoundRecord> history;
};

// FNV-1a over the bit patterns of all parameter values.
std::uint64_t Checksum(const ModelParams& params);

// w_i <- copy of global. Throws ShapeError when the client already holds
// parameters of a different shape.
void Synchronize(ClientState& client, const ModelParams& global);

// e_max SGD steps from the client's current parameters. Requires BeginRun.
ModelParams LocalRound(ClientState& client, const TrainConfig& config);

// sum_i (n_i / N) w_i, accumulated as a running weighted mean so that
// identical inputs are a fixed point.
ModelParams Aggregate(std::span<const ModelParams> locals,
                      std::span<const std::size_t> sizes);

// One client's contribution to a round: receives the current global model and
// returns its updated local parameters.
using LocalUpdate = std::function<ModelParams(ClientState& client,
                                              const ModelParams& global,
                                              std::size_t round)>;

struct ExecutionOptions {
  bool concurrent = false;  // one thread per client within a round
};

// Generic synchronous loop: `rounds` x (local updates, aggregation).
FederatedResult RunFederated(std::span<ClientState> clients,
                             ModelParams initial_global, std::size_t rounds,
                             const LocalUpdate& update,
                             const ExecutionOptions& exec = {});

FederatedResult RunFedAvg(std::span<ClientState> clients,
                          const ModelParams& initial_global,
                          const TrainConfig& config,
                          const ExecutionOptions& exec = {});

// round,client_id,train_loss
void WriteHistoryCsv(std::span<const RoundRecord> history,
                     std::span<const ClientState> clients, std::ostream& out);

}  // namespace fedsln

#endif  // FEDSLN_FEDERATION_HPP_
