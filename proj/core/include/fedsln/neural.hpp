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

// Fully connected binary classifier over the six pair features, trained with
// mini-batch SGD on binary cross-entropy.

#ifndef FEDSLN_NEURAL_HPP_
#define FEDSLN_NEURAL_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedsln/features.hpp"
#include "fedsln/rng.hpp"

namespace fedsln {

enum class Activation { kSoftplus, kTanh };

std::string ToString(Activation a);
Activation ActivationFromString(const std::string& s);

struct LayerShape {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t size() const { return out * (in + 1); }
  bool operator==(const LayerShape&) const = default;
};

// Parameters of a layered network, stored as one flat vector. Layer i holds
// its out x in weights (row-major) followed by its out biases. Hidden layers
// use `hidden_activation`; the last layer is squashed by a sigmoid.
//
// The same type doubles as the gradient structure.
class ModelParams {
 public:
  ModelParams() = default;

  // Zero-filled parameters. Dimensions must chain, start at kNumFeatures and
  // end at a single output.
  explicit ModelParams(std::vector<LayerShape> shapes,
                       Activation hidden = Activation::kSoftplus);

  // Uniform(+-sqrt(6 / (in + out))) weights, zero biases.
  static ModelParams Initialize(std::span<const std::size_t> widths,
                                std::uint64_t seed,
                                Activation hidden = Activation::kSoftplus);

  std::size_t layer_count() const { return shapes_.size(); }
  const LayerShape& shape(std::size_t layer) const { return shapes_[layer]; }
  const std::vector<LayerShape>& shapes() const { return shapes_; }
  Activation hidden_activation() const { return hidden_; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  // Contiguous slice of one layer (weights then biases).
  std::span<double> layer(std::size_t i);
  std::span<const double> layer(std::size_t i) const;
  std::size_t layer_offset(std::size_t i) const { return offsets_[i]; }

  std::span<double> weights(std::size_t i);
  std::span<const double> weights(std::size_t i) const;
  std::span<double> bias(std::size_t i);
  std::span<const double> bias(std::size_t i) const;

  bool SameShape(const ModelParams& other) const {
    return shapes_ == other.shapes_;
  }
  // Zero-valued structure of the same shape.
  ModelParams ZerosLike() const;
  bool AllFinite() const;

  bool operator==(const ModelParams&) const = default;

 private:
  std::vector<LayerShape> shapes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
  Activation hidden_ = Activation::kSoftplus;
};

inline constexpr std::size_t kDefaultWidths[] = {kNumFeatures, 32, 16, 1};

// A standardized training or evaluation row.
struct LabeledSample {
  FeatureVector x{};
  int label = 0;
};

std::vector<LabeledSample> Standardize(std::span<const PairExample> examples,
                                       const Standardizer& standardizer);

double Sigmoid(double z);

// Output probability in (0, 1). `x` must have the model's input width.
double Forward(const ModelParams& params, std::span<const double> x);
inline double Forward(const ModelParams& params, const FeatureVector& x) {
  return Forward(params, std::span<const double>(x));
}

inline constexpr double kLossEpsilon = 1e-12;

// Binary cross-entropy with p clamped to [eps, 1 - eps].
double BceLoss(double p, int y);

// Mean gradient of the (optionally positive-weighted) loss over `batch`.
// Writes into `grad` (reshaped as needed) and returns the mean loss.
double AccumulateGradient(const ModelParams& params,
                          std::span<const LabeledSample> batch,
                          ModelParams& grad, double positive_weight = 1.0);

ModelParams Gradient(const ModelParams& params,
                     std::span<const LabeledSample> batch,
                     double positive_weight = 1.0);

// params - lr * grad, elementwise.
ModelParams SgdStep(const ModelParams& params, const ModelParams& grad,
                    double lr);
void SgdStepInPlace(ModelParams& params, const ModelParams& grad, double lr);

// Hyperparameters shared by every training regime. Fields a regime does not
// use are ignored.
struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 256;
  std::size_t local_steps = 200;   // e_max
  std::size_t global_rounds = 30;  // K
  std::size_t epochs = 200;        // E, centralized only
  double positive_weight = 1.0;

  // Meta-learning step. Unset rates fall back to learning_rate.
  std::optional<double> meta_inner;  // alpha
  std::optional<double> meta_outer;  // beta
  double hf_delta = 1e-3;

  // Adaptive local aggregation.
  std::size_t ala_top_layers = 2;    // p
  double ala_data_percent = 80.0;    // zeta
  double ala_weight_lr = 1.0;
  double ala_convergence_tol = 1e-3;
  std::size_t ala_window = 10;
  std::size_t ala_max_updates = 50;
  bool ala_freeze_weights = false;

  double alpha() const { return meta_inner.value_or(learning_rate); }
  double beta() const { return meta_outer.value_or(learning_rate); }

  void Validate() const;
};

// Endless stream of mini-batch index sets. Each pass visits every index once
// in a seeded random order (the final batch of a pass may be short); the
// order is reshuffled when a pass is exhausted.
class BatchStream {
 public:
  BatchStream(std::size_t n, std::size_t batch_size, std::uint64_t seed);

  std::span<const std::size_t> Next();

  std::size_t batch_size() const { return batch_size_; }
  std::size_t batches_per_pass() const;
  // True when the requested batch size exceeded the data size.
  bool clamped() const { return clamped_; }

 private:
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t batch_size_;
  std::size_t pos_ = 0;
  bool clamped_ = false;
};

// Gathers the rows selected by `indices` into `out`.
void GatherBatch(std::span<const LabeledSample> data,
                 std::span<const std::size_t> indices,
                 std::vector<LabeledSample>& out);

// `steps` SGD updates on batches drawn from `stream`.
ModelParams TrainSteps(ModelParams params, std::span<const LabeledSample> data,
                       double learning_rate, std::size_t steps,
                       BatchStream& stream, double positive_weight = 1.0);

// (#{s_p > s_n} + 0.5 #{s_p = s_n}) / (P N). Throws UndefinedStatistic when
// either class is absent.
double Auc(std::span<const double> scores, std::span<const int> labels);

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

inline constexpr double kDecisionThreshold = 0.5;

// Predictions at or above the threshold count as positive.
ConfusionCounts CountConfusion(std::span<const double> scores,
                               std::span<const int> labels,
                               double threshold = kDecisionThreshold);

struct MetricsReport {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  double auc = 0.0;  // NaN when only one class is present
  ConfusionCounts counts;
};

std::vector<double> Predict(const ModelParams& params,
                            std::span<const LabeledSample> data);
MetricsReport Evaluate(const ModelParams& params,
                       std::span<const LabeledSample> data);

// A trained network together with the feature standardization it expects.
struct Classifier {
  ModelParams params;
  Standardizer standardizer;

  double Predict(const FeatureVector& raw) const {
    return Forward(params, standardizer.Apply(raw));
  }
  bool operator==(const Classifier&) const = default;
};

// Line-oriented text checkpoint:
//   fedsln-checkpoint 1
//   activation <softplus|tanh>
//   layers <L>
//   layer <in> <out>        (L times, each followed by)
//   w <out*in values, row-major>
//   b <out values>
//   mean <6 values>
//   scale <6 values>
// Values use shortest round-trip decimal form, so save/load is exact.
void SaveCheckpoint(const Classifier& model, std::ostream& out);
Classifier LoadCheckpoint(std::istream& in);

}  // namespace fedsln

#endif  // FEDSLN_NEURAL_HPP_
