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

#include "fedsln/federation.hpp"

#include <chrono>
#include <cstring>
#include <exception>
#include <ostream>
#include <thread>

#include "fedsln/error.hpp"
#include "fedsln/format.hpp"
#include "fedsln/rng.hpp"

namespace fedsln {
namespace audit {
namespace {

thread_local int current_actor = kUnscoped;
std::atomic<std::size_t> foreign_reads{0};
std::atomic<std::size_t> pooled_reads{0};

}  // namespace

ActorScope::ActorScope(int actor) : previous_(current_actor) {
  current_actor = actor;
}
ActorScope::~ActorScope() { current_actor = previous_; }

int CurrentActor() { return current_actor; }

Counters Snapshot() { return {foreign_reads.load(), pooled_reads.load()}; }

void Reset() {
  foreign_reads = 0;
  pooled_reads = 0;
}

void RecordRead(int owner) {
  const int actor = current_actor;
  if (actor == kUnscoped || actor == owner) return;
  if (actor == kPooling) {
    ++pooled_reads;
  } else {
    ++foreign_reads;
  }
}

}  // namespace audit

ClientData::ClientData(int id, std::vector<PairExample> train,
                       std::vector<PairExample> test)
    : ClientData(id, train, std::move(test), Standardizer::Fit(train)) {}

ClientData::ClientData(int id, std::vector<PairExample> train,
                       std::vector<PairExample> test,
                       const Standardizer& standardizer)
    : id_(id),
      raw_train_(std::move(train)),
      raw_test_(std::move(test)),
      standardizer_(standardizer),
      train_(Standardize(raw_train_, standardizer_)),
      test_(Standardize(raw_test_, standardizer_)) {
  if (raw_train_.empty()) {
    throw ValidationError("client " + std::to_string(id) +
                          " has an empty training split");
  }
}

std::span<const LabeledSample> ClientData::train() const {
  audit::RecordRead(id_);
  return train_;
}
std::span<const LabeledSample> ClientData::test() const {
  audit::RecordRead(id_);
  return test_;
}
std::span<const PairExample> ClientData::raw_train() const {
  audit::RecordRead(id_);
  return raw_train_;
}
std::span<const PairExample> ClientData::raw_test() const {
  audit::RecordRead(id_);
  return raw_test_;
}

ClientState::ClientState(const ClientData& d, std::uint64_t master_seed)
    : data(&d),
      seed(DeriveSeed(master_seed, "client",
                      static_cast<std::uint64_t>(d.id()))) {}

void ClientState::BeginRun(std::size_t batch_size) {
  local.reset();
  ala_weights = {};
  ala_rounds = 0;
  stream.emplace(train_size(), batch_size, DeriveSeed(seed, "train"));
  aux_stream.emplace(train_size(), batch_size, DeriveSeed(seed, "aux"));
  batch_clamped = stream->clamped();
}

std::uint64_t Checksum(const ModelParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : params.values()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

void Synchronize(ClientState& client, const ModelParams& global) {
  if (client.local && !client.local->SameShape(global)) {
    throw ShapeError("client " + std::to_string(client.id()) +
                     " model shape differs from the global model");
  }
  client.local = global;
}

ModelParams LocalRound(ClientState& client, const TrainConfig& config) {
  if (!client.stream) throw ValidationError("local round before BeginRun");
  if (!client.local) throw ValidationError("local round before synchronize");
  return TrainSteps(*client.local, client.data->train(), config.learning_rate,
                    config.local_steps, *client.stream,
                    config.positive_weight);
}

ModelParams Aggregate(std::span<const ModelParams> locals,
                      std::span<const std::size_t> sizes) {
  if (locals.empty()) throw ValidationError("aggregate of no models");
  if (locals.size() != sizes.size()) {
    throw ValidationError("one size per local model required");
  }
  std::size_t total = 0;
  for (std::size_t i = 0; i < locals.size(); ++i) {
    if (!locals[i].SameShape(locals[0])) {
      throw ShapeError("local models differ in shape");
    }
    total += sizes[i];
  }
  if (total == 0) throw ValidationError("aggregate with zero total size");

  ModelParams out = locals[0];
  double cumulative = static_cast<double>(sizes[0]);
  for (std::size_t i = 1; i < locals.size(); ++i) {
    if (sizes[i] == 0) continue;
    cumulative += static_cast<double>(sizes[i]);
    const double t = static_cast<double>(sizes[i]) / cumulative;
    auto acc = out.values();
    auto w = locals[i].values();
    for (std::size_t j = 0; j < acc.size(); ++j) {
      acc[j] += (w[j] - acc[j]) * t;
    }
  }
  return out;
}

namespace {

double TrainLoss(const ClientState& client, const ModelParams& params) {
  const auto data = client.data->train();
  const std::vector<double> scores = Predict(params, data);
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    sum += BceLoss(scores[i], data[i].label);
  }
  return sum / static_cast<double>(data.size());
}

}  // namespace

FederatedResult RunFederated(std::span<ClientState> clients,
                             ModelParams initial_global, std::size_t rounds,
                             const LocalUpdate& update,
                             const ExecutionOptions& exec) {
  if (clients.empty()) throw ValidationError("federation without clients");
  FederatedResult result;
  result.global = std::move(initial_global);
  std::vector<std::size_t> sizes;
  for (const auto& c : clients) sizes.push_back(c.train_size());

  for (std::size_t k = 0; k < rounds; ++k) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<ModelParams> locals(clients.size());
    std::vector<double> losses(clients.size());
    auto work = [&](std::size_t i) {
      audit::ActorScope scope(clients[i].id());
      locals[i] = update(clients[i], result.global, k);
      clients[i].local = locals[i];
      losses[i] = TrainLoss(clients[i], locals[i]);
    };

    if (exec.concurrent && clients.size() > 1) {
      std::vector<std::thread> threads;
      std::vector<std::exception_ptr> errors(clients.size());
      for (std::size_t i = 0; i < clients.size(); ++i) {
        threads.emplace_back([&, i] {
          try {
            work(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        });
      }
      for (auto& t : threads) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    } else {
      for (std::size_t i = 0; i < clients.size(); ++i) work(i);
    }

    {
      audit::ActorScope scope(audit::kServer);
      result.global = Aggregate(locals, sizes);
    }
    RoundRecord record;
    record.round = k;
    record.client_train_loss = std::move(losses);
    record.global_checksum = Checksum(result.global);
    record.wall_seconds = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
    result.history.push_back(std::move(record));
  }
  return result;
}

FederatedResult RunFedAvg(std::span<ClientState> clients,
                          const ModelParams& initial_global,
                          const TrainConfig& config,
                          const ExecutionOptions& exec) {
  config.Validate();
  for (auto& c : clients) c.BeginRun(config.batch_size);
  return RunFederated(
      clients, initial_global, config.global_rounds,
      [&config](ClientState& client, const ModelParams& global, std::size_t) {
        Synchronize(client, global);
        return LocalRound(client, config);
      },
      exec);
}

void WriteHistoryCsv(std::span<const RoundRecord> history,
                     std::span<const ClientState> clients, std::ostream& out) {
  out << "round,client_id,train_loss\n";
  for (const auto& r : history) {
    for (std::size_t i = 0; i < r.client_train_loss.size(); ++i) {
      out << r.round << ',' << clients[i].id() << ','
          << FormatDouble(r.client_train_loss[i]) << '\n';
    }
  }
}

}  // namespace fedsln
