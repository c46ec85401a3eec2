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

#include "fedsln/neural.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>
#include <utility>

#include "fedsln/error.hpp"
#include "fedsln/format.hpp"

namespace fedsln {

std::string ToString(Activation a) {
  switch (a) {
    case Activation::kSoftplus:
      return "softplus";
    case Activation::kTanh:
      return "tanh";
  }
  return "softplus";
}

Activation ActivationFromString(const std::string& s) {
  if (s == "softplus") return Activation::kSoftplus;
  if (s == "tanh") return Activation::kTanh;
  throw ValidationError("unknown activation \"" + s + "\"");
}

ModelParams::ModelParams(std::vector<LayerShape> shapes, Activation hidden)
    : shapes_(std::move(shapes)), hidden_(hidden) {
  if (shapes_.empty()) throw ShapeError("model needs at least one layer");
  if (shapes_.front().in != kNumFeatures) {
    throw ShapeError("first layer must take " + std::to_string(kNumFeatures) +
                     " inputs");
  }
  if (shapes_.back().out != 1)
    throw ShapeError("last layer must have 1 output");
  std::size_t offset = 0;
  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    if (shapes_[i].in == 0 || shapes_[i].out == 0) {
      throw ShapeError("layer dimensions must be positive");
    }
    if (i > 0 && shapes_[i].in != shapes_[i - 1].out) {
      throw ShapeError("layer " + std::to_string(i) +
                       " input does not match previous output");
    }
    offsets_.push_back(offset);
    offset += shapes_[i].size();
  }
  values_.assign(offset, 0.0);
}

ModelParams ModelParams::Initialize(std::span<const std::size_t> widths,
                                    std::uint64_t seed, Activation hidden) {
  if (widths.size() < 2) throw ShapeError("need at least two widths");
  std::vector<LayerShape> shapes;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    shapes.push_back({widths[i], widths[i + 1]});
  }
  ModelParams params(std::move(shapes), hidden);
  Rng rng(seed);
  for (std::size_t i = 0; i < params.layer_count(); ++i) {
    const auto& s = params.shape(i);
    const double limit = std::sqrt(6.0 / static_cast<double>(s.in + s.out));
    for (double& w : params.weights(i)) w = rng.Uniform(-limit, limit);
  }
  return params;
}

std::span<double> ModelParams::layer(std::size_t i) {
  return std::span<double>(values_).subspan(offsets_[i], shapes_[i].size());
}
std::span<const double> ModelParams::layer(std::size_t i) const {
  return std::span<const double>(values_).subspan(offsets_[i],
                                                  shapes_[i].size());
}
std::span<double> ModelParams::weights(std::size_t i) {
  return layer(i).first(shapes_[i].in * shapes_[i].out);
}
std::span<const double> ModelParams::weights(std::size_t i) const {
  return layer(i).first(shapes_[i].in * shapes_[i].out);
}
std::span<double> ModelParams::bias(std::size_t i) {
  return layer(i).last(shapes_[i].out);
}
std::span<const double> ModelParams::bias(std::size_t i) const {
  return layer(i).last(shapes_[i].out);
}

ModelParams ModelParams::ZerosLike() const {
  ModelParams z = *this;
  std::fill(z.values_.begin(), z.values_.end(), 0.0);
  return z;
}

bool ModelParams::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::vector<LabeledSample> Standardize(std::span<const PairExample> examples,
                                       const Standardizer& standardizer) {
  std::vector<LabeledSample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    out.push_back({standardizer.Apply(ex.features), ex.label});
  }
  return out;
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// Activation value and its derivative at pre-activation z.
std::pair<double, double> Activate(Activation act, double z) {
  switch (act) {
    case Activation::kSoftplus: {
      const double e = std::exp(-std::abs(z));
      const double sig = z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
      return {std::max(z, 0.0) + std::log1p(e), sig};
    }
    case Activation::kTanh: {
      const double t = std::tanh(z);
      return {t, 1.0 - t * t};
    }
  }
  return {z, 1.0};
}

// Per-thread buffers for one forward/backward pass.
struct Workspace {
  std::vector<std::vector<double>> wt;  // per layer weights, transposed
  std::vector<std::vector<double>> dz;  // activation derivative per layer
  std::vector<std::vector<double>> a;   // a[0] = input, a[l+1] = layer l output
  std::vector<double> delta;
  std::vector<double> delta_prev;

  // Sizes the buffers and transposes the weights of `params`; required
  // before ForwardInto whenever the parameters change.
  void Prepare(const ModelParams& params) {
    const std::size_t L = params.layer_count();
    wt.resize(L);
    dz.resize(L);
    a.resize(L + 1);
    a[0].resize(params.shape(0).in);
    for (std::size_t l = 0; l < L; ++l) {
      const auto& s = params.shape(l);
      const auto w = params.weights(l);
      dz[l].resize(s.out);
      a[l + 1].resize(s.out);
      wt[l].resize(s.in * s.out);
      for (std::size_t o = 0; o < s.out; ++o) {
        for (std::size_t i = 0; i < s.in; ++i) {
          wt[l][i * s.out + o] = w[o * s.in + i];
        }
      }
    }
  }
};

Workspace& ThreadWorkspace() {
  thread_local Workspace ws;
  return ws;
}

// Returns the output probability; leaves activations in `ws`. Each output
// accumulates bias first and then inputs in ascending order.
double ForwardInto(const ModelParams& params, std::span<const double> x,
                   Workspace& ws) {
  std::copy(x.begin(), x.end(), ws.a[0].begin());
  const std::size_t L = params.layer_count();
  for (std::size_t l = 0; l < L; ++l) {
    const auto& s = params.shape(l);
    const auto b = params.bias(l);
    const double* in = ws.a[l].data();
    const double* wt = ws.wt[l].data();
    double* out = ws.a[l + 1].data();
    const std::size_t n_out = s.out;
    std::copy(b.begin(), b.end(), out);
    for (std::size_t i = 0; i < s.in; ++i) {
      const double xi = in[i];
      const double* col = wt + i * n_out;
      for (std::size_t o = 0; o < n_out; ++o) out[o] += col[o] * xi;
    }
    if (l + 1 == L) {
      for (std::size_t o = 0; o < n_out; ++o) out[o] = Sigmoid(out[o]);
    } else {
      auto& dz = ws.dz[l];
      for (std::size_t o = 0; o < n_out; ++o) {
        std::tie(out[o], dz[o]) = Activate(params.hidden_activation(), out[o]);
      }
    }
  }
  return ws.a[L][0];
}

void CheckInput(const ModelParams& params, std::size_t width) {
  if (params.layer_count() == 0) throw ShapeError("empty model");
  if (width != params.shape(0).in) {
    throw ShapeError("input has " + std::to_string(width) +
                     " features, model expects " +
                     std::to_string(params.shape(0).in));
  }
}

}  // namespace

double Forward(const ModelParams& params, std::span<const double> x) {
  CheckInput(params, x.size());
  Workspace& ws = ThreadWorkspace();
  ws.Prepare(params);
  return ForwardInto(params, x, ws);
}

double BceLoss(double p, int y) {
  const double q = std::clamp(p, kLossEpsilon, 1.0 - kLossEpsilon);
  return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

double AccumulateGradient(const ModelParams& params,
                          std::span<const LabeledSample> batch,
                          ModelParams& grad, double positive_weight) {
  if (batch.empty()) throw ValidationError("gradient of an empty batch");
  if (!grad.SameShape(params)) {
    grad = params.ZerosLike();
  } else {
    std::fill(grad.values().begin(), grad.values().end(), 0.0);
  }
  CheckInput(params, kNumFeatures);
  Workspace& ws = ThreadWorkspace();
  ws.Prepare(params);
  const std::size_t L = params.layer_count();
  double loss_sum = 0.0;

  for (const LabeledSample& sample : batch) {
    const double p = ForwardInto(params, sample.x, ws);
    const double weight = sample.label == 1 ? positive_weight : 1.0;
    loss_sum += weight * BceLoss(p, sample.label);

    ws.delta.assign(1, weight * (p - static_cast<double>(sample.label)));
    for (std::size_t l = L; l-- > 0;) {
      const auto& s = params.shape(l);
      const auto& in = ws.a[l];
      auto gw = grad.weights(l);
      auto gb = grad.bias(l);
      for (std::size_t o = 0; o < s.out; ++o) {
        const double d = ws.delta[o];
        double* row = gw.data() + o * s.in;
        for (std::size_t i = 0; i < s.in; ++i) row[i] += d * in[i];
        gb[o] += d;
      }
      if (l == 0) break;
      const auto w = params.weights(l);
      ws.delta_prev.assign(s.in, 0.0);
      for (std::size_t o = 0; o < s.out; ++o) {
        const double d = ws.delta[o];
        const double* row = w.data() + o * s.in;
        for (std::size_t i = 0; i < s.in; ++i) ws.delta_prev[i] += row[i] * d;
      }
      const auto& dz = ws.dz[l - 1];
      for (std::size_t i = 0; i < s.in; ++i) ws.delta_prev[i] *= dz[i];
      std::swap(ws.delta, ws.delta_prev);
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad.values()) g *= inv;
  return loss_sum * inv;
}

ModelParams Gradient(const ModelParams& params,
                     std::span<const LabeledSample> batch,
                     double positive_weight) {
  ModelParams grad = params.ZerosLike();
  AccumulateGradient(params, batch, grad, positive_weight);
  return grad;
}

void SgdStepInPlace(ModelParams& params, const ModelParams& grad, double lr) {
  if (!params.SameShape(grad)) throw ShapeError("gradient shape mismatch");
  auto w = params.values();
  auto g = grad.values();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] - lr * g[i];
}

ModelParams SgdStep(const ModelParams& params, const ModelParams& grad,
                    double lr) {
  ModelParams out = params;
  SgdStepInPlace(out, grad, lr);
  return out;
}

void TrainConfig::Validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string(name) + " must be positive");
    }
  };
  if (!(learning_rate >= 0.0)) {
    throw ValidationError("learning_rate must be non-negative");
  }
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  positive(positive_weight, "positive_weight");
  positive(hf_delta, "hf_delta");
  if (!(ala_data_percent > 0.0 && ala_data_percent <= 100.0)) {
    throw ValidationError("ala_data_percent must lie in (0, 100]");
  }
  if (ala_window == 0) throw ValidationError("ala_window must be positive");
  if (!(ala_weight_lr >= 0.0)) {
    throw ValidationError("ala_weight_lr must be non-negative");
  }
}

BatchStream::BatchStream(std::size_t n, std::size_t batch_size,
                         std::uint64_t seed)
    : rng_(seed), order_(n), batch_size_(batch_size) {
  if (n == 0) throw ValidationError("batch stream over empty data");
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  if (batch_size_ > n) {
    batch_size_ = n;
    clamped_ = true;
  }
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  rng_.Shuffle(std::span<std::size_t>(order_));
}

std::span<const std::size_t> BatchStream::Next() {
  if (pos_ == order_.size()) {
    rng_.Shuffle(std::span<std::size_t>(order_));
    pos_ = 0;
  }
  const std::size_t take = std::min(batch_size_, order_.size() - pos_);
  std::span<const std::size_t> out(order_.data() + pos_, take);
  pos_ += take;
  return out;
}

std::size_t BatchStream::batches_per_pass() const {
  return (order_.size() + batch_size_ - 1) / batch_size_;
}

void GatherBatch(std::span<const LabeledSample> data,
                 std::span<const std::size_t> indices,
                 std::vector<LabeledSample>& out) {
  out.clear();
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(data[i]);
}

ModelParams TrainSteps(ModelParams params, std::span<const LabeledSample> data,
                       double learning_rate, std::size_t steps,
                       BatchStream& stream, double positive_weight) {
  std::vector<LabeledSample> batch;
  ModelParams grad = params.ZerosLike();
  for (std::size_t step = 0; step < steps; ++step) {
    GatherBatch(data, stream.Next(), batch);
    AccumulateGradient(params, batch, grad, positive_weight);
    SgdStepInPlace(params, grad, learning_rate);
  }
  return params;
}

double Auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError("scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  // Twice the Mann-Whitney count, kept integral so ties are exact.
  unsigned long long twice_wins = 0;
  unsigned long long negatives_below = 0;
  unsigned long long positives = 0;
  unsigned long long negatives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    unsigned long long pos_group = 0;
    unsigned long long neg_group = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pos_group : neg_group) += 1;
      ++j;
    }
    twice_wins += 2 * pos_group * negatives_below + pos_group * neg_group;
    negatives_below += neg_group;
    positives += pos_group;
    negatives += neg_group;
    i = j;
  }
  if (positives == 0 || negatives == 0) {
    throw UndefinedStatistic("AUC undefined: only one class present");
  }
  return static_cast<double>(twice_wins) /
         (2.0 * static_cast<double>(positives) *
          static_cast<double>(negatives));
}

ConfusionCounts CountConfusion(std::span<const double> scores,
                               std::span<const int> labels, double threshold) {
  if (scores.size() != labels.size()) {
    throw ValidationError("scores and labels differ in length");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      (predicted ? c.tp : c.fn) += 1;
    } else {
      (predicted ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

std::vector<double> Predict(const ModelParams& params,
                            std::span<const LabeledSample> data) {
  std::vector<double> out;
  out.reserve(data.size());
  CheckInput(params, kNumFeatures);
  Workspace& ws = ThreadWorkspace();
  ws.Prepare(params);
  for (const auto& s : data) out.push_back(ForwardInto(params, s.x, ws));
  return out;
}

MetricsReport Evaluate(const ModelParams& params,
                       std::span<const LabeledSample> data) {
  if (data.empty()) throw ValidationError("evaluation on an empty dataset");
  const std::vector<double> scores = Predict(params, data);
  std::vector<int> labels;
  labels.reserve(data.size());
  for (const auto& s : data) labels.push_back(s.label);

  MetricsReport r;
  r.counts = CountConfusion(scores, labels);
  r.accuracy = static_cast<double>(r.counts.tp + r.counts.tn) /
               static_cast<double>(data.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    loss += BceLoss(scores[i], labels[i]);
  }
  r.mean_loss = loss / static_cast<double>(data.size());
  try {
    r.auc = Auc(scores, labels);
  } catch (const UndefinedStatistic&) {
    r.auc = std::nan("");
  }
  return r;
}

namespace {

void WriteRow(std::ostream& out, const char* tag, std::span<const double> xs) {
  out << tag;
  for (double x : xs) out << ' ' << FormatDouble(x);
  out << '\n';
}

std::vector<double> ReadRow(std::istream& in, const std::string& tag,
                            std::size_t count) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("checkpoint truncated before \"" + tag + "\"");
  }
  std::istringstream ss(line);
  std::string got;
  ss >> got;
  if (got != tag) {
    throw ValidationError("checkpoint: expected \"" + tag + "\", got \"" + got +
                          "\"");
  }
  std::vector<double> xs;
  std::string tok;
  while (ss >> tok) xs.push_back(ParseDouble(tok));
  if (xs.size() != count) {
    throw ValidationError("checkpoint: \"" + tag + "\" has wrong length");
  }
  return xs;
}

}  // namespace

void SaveCheckpoint(const Classifier& model, std::ostream& out) {
  const ModelParams& p = model.params;
  out << "fedsln-checkpoint 1\n";
  out << "activation " << ToString(p.hidden_activation()) << '\n';
  out << "layers " << p.layer_count() << '\n';
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    out << "layer " << p.shape(l).in << ' ' << p.shape(l).out << '\n';
    WriteRow(out, "w", p.weights(l));
    WriteRow(out, "b", p.bias(l));
  }
  WriteRow(out, "mean", model.standardizer.mean);
  WriteRow(out, "scale", model.standardizer.scale);
}

Classifier LoadCheckpoint(std::istream& in) {
  std::string line;
  auto expect_line = [&](const std::string& what) {
    if (!std::getline(in, line)) {
      throw ValidationError("checkpoint truncated before " + what);
    }
    return std::istringstream(line);
  };
  {
    auto ss = expect_line("header");
    std::string magic;
    int version = 0;
    ss >> magic >> version;
    if (magic != "fedsln-checkpoint" || version != 1) {
      throw ValidationError("not a fedsln checkpoint");
    }
  }
  std::string tag;
  std::string act;
  expect_line("activation") >> tag >> act;
  if (tag != "activation") throw ValidationError("checkpoint: bad activation");
  std::size_t n_layers = 0;
  expect_line("layers") >> tag >> n_layers;
  if (tag != "layers" || n_layers == 0) {
    throw ValidationError("checkpoint: bad layer count");
  }
  std::vector<LayerShape> shapes;
  std::vector<std::vector<double>> ws;
  std::vector<std::vector<double>> bs;
  for (std::size_t l = 0; l < n_layers; ++l) {
    LayerShape s;
    expect_line("layer") >> tag >> s.in >> s.out;
    if (tag != "layer") throw ValidationError("checkpoint: bad layer header");
    shapes.push_back(s);
    ws.push_back(ReadRow(in, "w", s.in * s.out));
    bs.push_back(ReadRow(in, "b", s.out));
  }
  Classifier model;
  model.params = ModelParams(shapes, ActivationFromString(act));
  for (std::size_t l = 0; l < n_layers; ++l) {
    std::copy(ws[l].begin(), ws[l].end(), model.params.weights(l).begin());
    std::copy(bs[l].begin(), bs[l].end(), model.params.bias(l).begin());
  }
  const auto mean = ReadRow(in, "mean", kNumFeatures);
  const auto scale = ReadRow(in, "scale", kNumFeatures);
  std::copy(mean.begin(), mean.end(), model.standardizer.mean.begin());
  std::copy(scale.begin(), scale.end(), model.standardizer.scale.begin());
  return model;
}

}  // namespace fedsln
