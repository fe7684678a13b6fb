// Copyright 2026 The fedsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fedsim/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedsim/error.hpp"
#include "fedsim/rng.hpp"

namespace fedsim::nn {

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation a) noexcept {
  return a == Activation::kRelu ? "relu" : "identity";
}

double BlockVector::squared_norm() const noexcept {
  double s = 0.0;
  for (double v : low) s += v * v;
  for (double v : high) s += v * v;
  return s;
}

namespace {

void require_same_partition(const BlockVector& a, const BlockVector& b) {
  if (a.low.size() != b.low.size() || a.high.size() != b.high.size()) {
    throw ShapeError("block vectors have different partitions");
  }
}

}  // namespace

BlockVector& BlockVector::operator+=(const BlockVector& other) { return axpy(1.0, other); }

BlockVector& BlockVector::operator-=(const BlockVector& other) { return axpy(-1.0, other); }

BlockVector& BlockVector::operator*=(double s) noexcept {
  for (double& v : low) v *= s;
  for (double& v : high) v *= s;
  return *this;
}

BlockVector& BlockVector::axpy(double s, const BlockVector& other) {
  require_same_partition(*this, other);
  for (std::size_t i = 0; i < low.size(); ++i) low[i] += s * other.low[i];
  for (std::size_t i = 0; i < high.size(); ++i) high[i] += s * other.high[i];
  return *this;
}

SplitModel::SplitModel(std::vector<DenseLayer> layers, std::size_t split_index)
    : layers_(std::move(layers)), split_(split_index) {
  if (layers_.size() < 2) throw ShapeError("a split model needs at least two layers");
  if (split_ == 0 || split_ >= layers_.size()) {
    throw ShapeError("split index " + std::to_string(split_) + " must lie in (0, " +
                     std::to_string(layers_.size()) + ")");
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const DenseLayer& l = layers_[i];
    if (l.in_dim == 0 || l.out_dim == 0) throw ShapeError("layer " + std::to_string(i) + " is empty");
    if (l.weight.size() != l.in_dim * l.out_dim || l.bias.size() != l.out_dim) {
      throw ShapeError("layer " + std::to_string(i) + " parameter sizes do not match its dims");
    }
    if (i > 0 && layers_[i - 1].out_dim != l.in_dim) {
      throw ShapeError("layer " + std::to_string(i) + " in_dim does not match previous out_dim");
    }
  }
}

SplitModel SplitModel::init(std::span<const std::size_t> layer_sizes, std::size_t split_index,
                            Activation hidden_activation, std::uint64_t seed) {
  if (layer_sizes.size() < 3) throw ShapeError("need at least input, one hidden and output size");
  Engine rng = make_engine(seed, Stream::kModelInit);
  std::vector<DenseLayer> layers;
  const std::size_t count = layer_sizes.size() - 1;
  for (std::size_t i = 0; i < count; ++i) {
    DenseLayer l;
    l.in_dim = layer_sizes[i];
    l.out_dim = layer_sizes[i + 1];
    if (l.in_dim == 0 || l.out_dim == 0) throw ShapeError("layer sizes must be positive");
    l.activation = (i + 1 == count) ? Activation::kIdentity : hidden_activation;
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in_dim));
    std::uniform_real_distribution<double> u(-bound, bound);
    l.weight.resize(l.in_dim * l.out_dim);
    l.bias.resize(l.out_dim);
    for (double& w : l.weight) w = u(rng);
    for (double& b : l.bias) b = u(rng);
    layers.push_back(std::move(l));
  }
  return SplitModel(std::move(layers), split_index);
}

std::size_t SplitModel::low_param_count() const noexcept {
  std::size_t n = 0;
  for (std::size_t i = 0; i < split_; ++i) n += layers_[i].param_count();
  return n;
}

std::size_t SplitModel::high_param_count() const noexcept {
  std::size_t n = 0;
  for (std::size_t i = split_; i < layers_.size(); ++i) n += layers_[i].param_count();
  return n;
}

std::vector<std::size_t> SplitModel::layer_sizes() const {
  std::vector<std::size_t> sizes{layers_.front().in_dim};
  for (const auto& l : layers_) sizes.push_back(l.out_dim);
  return sizes;
}

std::vector<LayerSlice> SplitModel::layer_slices() const {
  std::vector<LayerSlice> slices;
  std::size_t low_off = 0;
  std::size_t high_off = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const bool high = i >= split_;
    std::size_t& off = high ? high_off : low_off;
    slices.push_back({high, off, layers_[i].param_count()});
    off += layers_[i].param_count();
  }
  return slices;
}

ParameterVector SplitModel::parameters() const {
  ParameterVector p;
  p.low.reserve(low_param_count());
  p.high.reserve(high_param_count());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    auto& dst = i < split_ ? p.low : p.high;
    dst.insert(dst.end(), layers_[i].weight.begin(), layers_[i].weight.end());
    dst.insert(dst.end(), layers_[i].bias.begin(), layers_[i].bias.end());
  }
  return p;
}

void SplitModel::set_parameters(const ParameterVector& params) {
  if (params.low.size() != low_param_count() || params.high.size() != high_param_count()) {
    throw ShapeError("parameter vector does not match the model partition");
  }
  std::size_t low_off = 0;
  std::size_t high_off = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& src = i < split_ ? params.low : params.high;
    std::size_t& off = i < split_ ? low_off : high_off;
    DenseLayer& l = layers_[i];
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(off), l.weight.size(), l.weight.begin());
    off += l.weight.size();
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(off), l.bias.size(), l.bias.begin());
    off += l.bias.size();
  }
}

BlockVector SplitModel::zeros_like() const {
  return {std::vector<double>(low_param_count(), 0.0),
          std::vector<double>(high_param_count(), 0.0)};
}

namespace {

// z = a W^T + b for a batch `a` (rows x in_dim).
Tensor affine(const DenseLayer& layer, const Tensor& a) {
  const std::size_t batch = a.rows();
  Tensor z = Tensor::matrix(batch, layer.out_dim);
  for (std::size_t r = 0; r < batch; ++r) {
    auto in = a.row(r);
    auto out = z.row(r);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
      const double* w = layer.weight.data() + o * layer.in_dim;
      double acc = layer.bias[o];
      for (std::size_t i = 0; i < layer.in_dim; ++i) acc += w[i] * in[i];
      out[o] = acc;
    }
  }
  return z;
}

void activate(Activation act, Tensor& z) {
  if (act == Activation::kRelu) {
    for (double& v : z.values()) v = v > 0.0 ? v : 0.0;
  }
}

void check_batch(const Tensor& x, std::size_t dim, const char* what) {
  if (x.rank() != 2) throw ShapeError(std::string(what) + " must be a rank-2 batch");
  if (x.rows() == 0) throw ShapeError(std::string(what) + " batch is empty");
  if (x.cols() != dim) {
    throw ShapeError(std::string(what) + " has width " + std::to_string(x.cols()) +
                     ", expected " + std::to_string(dim));
  }
}

// Runs layers [first, last) keeping every layer input and pre-activation
// when `trace` is given.
struct Trace {
  std::vector<Tensor> inputs;
  std::vector<Tensor> pre;
};

Tensor run_layers(const SplitModel& model, Tensor a, std::size_t first, std::size_t last,
                  Trace* trace) {
  for (std::size_t i = first; i < last; ++i) {
    const DenseLayer& layer = model.layers()[i];
    Tensor z = affine(layer, a);
    if (trace) {
      trace->inputs.push_back(std::move(a));
      trace->pre.push_back(z);
    }
    activate(layer.activation, z);
    a = std::move(z);
  }
  return a;
}

}  // namespace

ForwardResult forward_full(const SplitModel& model, const Tensor& x) {
  check_batch(x, model.input_dim(), "input");
  Tensor h = run_layers(model, x, 0, model.split_index(), nullptr);
  Tensor logits = run_layers(model, h, model.split_index(), model.num_layers(), nullptr);
  return {std::move(h), std::move(logits)};
}

Tensor forward_high(const SplitModel& model, const Tensor& h) {
  check_batch(h, model.feature_dim(), "feature");
  return run_layers(model, h, model.split_index(), model.num_layers(), nullptr);
}

LossAndGrad loss_and_grad(const SplitModel& model, const Tensor& inputs,
                          std::span<const int> labels, Entry entry) {
  const bool raw = entry == Entry::kRaw;
  check_batch(inputs, raw ? model.input_dim() : model.feature_dim(), raw ? "input" : "feature");
  const std::size_t batch = inputs.rows();
  if (labels.size() != batch) throw ShapeError("label count does not match batch size");
  const std::size_t classes = model.num_classes();
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw LabelError("label " + std::to_string(y) + " outside [0, " + std::to_string(classes) +
                       ")");
    }
  }

  const std::size_t first = raw ? 0 : model.split_index();
  const std::size_t last = model.num_layers();
  Trace trace;
  LossAndGrad out;
  Tensor logits;
  if (raw) {
    Tensor h = run_layers(model, inputs, 0, model.split_index(), &trace);
    out.features = h;
    logits = run_layers(model, std::move(h), model.split_index(), last, &trace);
  } else {
    logits = run_layers(model, inputs, first, last, &trace);
  }

  // delta = (softmax - onehot) / batch, loss = mean(logsumexp - z_y)
  const double inv_batch = 1.0 / static_cast<double>(batch);
  Tensor delta = Tensor::matrix(batch, classes);
  double loss = 0.0;
  for (std::size_t r = 0; r < batch; ++r) {
    auto z = logits.row(r);
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    const double lse = zmax + std::log(sum);
    const auto y = static_cast<std::size_t>(labels[r]);
    loss += lse - z[y];
    auto d = delta.row(r);
    for (std::size_t c = 0; c < classes; ++c) d[c] = std::exp(z[c] - lse) * inv_batch;
    d[y] -= inv_batch;
  }
  out.loss = loss * inv_batch;
  out.grad = model.zeros_like();

  const auto slices = model.layer_slices();
  for (std::size_t i = last; i-- > first;) {
    const DenseLayer& layer = model.layers()[i];
    const std::size_t t = i - first;
    const Tensor& a = trace.inputs[t];
    const LayerSlice& sl = slices[i];
    double* gw = (sl.high ? out.grad.high : out.grad.low).data() + sl.offset;
    double* gb = gw + layer.weight.size();
    for (std::size_t r = 0; r < batch; ++r) {
      auto d = delta.row(r);
      auto in = a.row(r);
      for (std::size_t o = 0; o < layer.out_dim; ++o) {
        const double dv = d[o];
        gb[o] += dv;
        double* gwo = gw + o * layer.in_dim;
        for (std::size_t k = 0; k < layer.in_dim; ++k) gwo[k] += dv * in[k];
      }
    }
    if (i == first) break;
    // Propagate to the previous layer's pre-activation.
    const DenseLayer& below = model.layers()[i - 1];
    const Tensor& below_pre = trace.pre[t - 1];
    Tensor next = Tensor::matrix(batch, layer.in_dim);
    for (std::size_t r = 0; r < batch; ++r) {
      auto d = delta.row(r);
      auto nd = next.row(r);
      for (std::size_t o = 0; o < layer.out_dim; ++o) {
        const double dv = d[o];
        const double* w = layer.weight.data() + o * layer.in_dim;
        for (std::size_t k = 0; k < layer.in_dim; ++k) nd[k] += dv * w[k];
      }
      if (below.activation == Activation::kRelu) {
        auto z = below_pre.row(r);
        for (std::size_t k = 0; k < layer.in_dim; ++k) {
          if (!(z[k] > 0.0)) nd[k] = 0.0;
        }
      }
    }
    delta = std::move(next);
  }
  return out;
}

void apply_update(SplitModel& model, const GradientVector& grad, double lr) {
  if (!std::isfinite(lr) || lr < 0.0) throw ArgumentError("learning rate must be finite and >= 0");
  if (grad.low.size() != model.low_param_count() || grad.high.size() != model.high_param_count()) {
    throw ShapeError("gradient does not match the model partition");
  }
  ParameterVector p = model.parameters();
  p.axpy(-lr, grad);
  model.set_parameters(p);
}

}  // namespace fedsim::nn
