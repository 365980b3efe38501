// Copyright 2026 The slicerl Authors
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

#include "slicerl/nn.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "slicerl/errors.hpp"

namespace slicerl::nn {

namespace {

std::uint64_t next_version() {
  static std::atomic<std::uint64_t> counter{1};
  return ++counter;
}

Eigen::MatrixXd activate(Activation act, const Eigen::MatrixXd& z) {
  if (act == Activation::relu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

// Multiplies `grad` in place by the activation derivative at `z`.
void activation_backward(Activation act, const Eigen::MatrixXd& z, Eigen::MatrixXd& grad) {
  if (act == Activation::relu) {
    grad = (z.array() > 0.0).select(grad, 0.0);
  } else {
    grad.array() *= 1.0 - z.array().tanh().square();
  }
}

void softmax_block_inplace(Eigen::Ref<Eigen::VectorXd> block) {
  const double peak = block.maxCoeff();
  block = (block.array() - peak).exp().matrix();
  block /= block.sum();
}

}  // namespace

void MlpSpec::validate() const {
  if (sizes.size() < 2) throw DimensionError("MLP needs at least an input and an output size");
  for (int s : sizes)
    if (s < 1) throw DimensionError("MLP layer sizes must be positive");
  if (head.kind == OutputHead::Kind::decoupled_softmax &&
      (head.block_size < 1 || head.block_count < 1 ||
       head.block_size * head.block_count != sizes.back()))
    throw DimensionError("softmax head blocks do not tile the output layer");
}

Eigen::VectorXd Gradients::flatten() const {
  Eigen::Index total = 0;
  for (size_t l = 0; l < weights.size(); ++l) total += weights[l].size() + biases[l].size();
  Eigen::VectorXd flat(total);
  Eigen::Index at = 0;
  for (size_t l = 0; l < weights.size(); ++l) {
    flat.segment(at, weights[l].size()) = weights[l].reshaped();
    at += weights[l].size();
    flat.segment(at, biases[l].size()) = biases[l];
    at += biases[l].size();
  }
  return flat;
}

bool Gradients::all_finite() const {
  for (size_t l = 0; l < weights.size(); ++l)
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  return true;
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)), version_(next_version()) {
  spec_.validate();
  for (size_t l = 0; l + 1 < spec_.sizes.size(); ++l) {
    weights_.push_back(Eigen::MatrixXd::Zero(spec_.sizes[l + 1], spec_.sizes[l]));
    biases_.push_back(Eigen::VectorXd::Zero(spec_.sizes[l + 1]));
  }
}

Mlp Mlp::init(Rng& rng, MlpSpec spec) {
  Mlp net(std::move(spec));
  for (auto& w : net.weights_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
  }
  net.version_ = next_version();
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (size_t l = 0; l < weights_.size(); ++l)
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  return n;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, ForwardCache* cache,
                             const Eigen::MatrixXd* logit_offset) const {
  if (x.rows() != input_dim())
    throw DimensionError("MLP input has " + std::to_string(x.rows()) + " rows, expected " +
                         std::to_string(input_dim()));
  if (cache) {
    cache->inputs.resize(weights_.size());
    cache->pre.resize(weights_.size());
  }
  Eigen::MatrixXd a = x;
  const size_t last = weights_.size() - 1;
  for (size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = weights_[l] * a;
    z.colwise() += biases_[l];
    if (l == last && logit_offset) {
      if (logit_offset->rows() != z.rows() || logit_offset->cols() != z.cols())
        throw DimensionError("logit offset shape mismatch");
      z += *logit_offset;
    }
    if (cache) {
      cache->inputs[l] = std::move(a);
      cache->pre[l] = z;
    }
    a = l == last ? std::move(z) : activate(spec_.hidden, z);
  }
  if (spec_.head.kind == OutputHead::Kind::decoupled_softmax)
    a = decoupled_softmax(a, spec_.head.block_size, spec_.head.block_count);
  if (cache) {
    cache->output = a;
    cache->owner = this;
    cache->version = version_;
  }
  return a;
}

Eigen::VectorXd Mlp::operator()(const Eigen::VectorXd& x) const {
  return forward(Eigen::MatrixXd(x)).col(0);
}

Gradients Mlp::backward(const ForwardCache& cache, const Eigen::MatrixXd& grad_output,
                        Eigen::MatrixXd* grad_input) const {
  if (cache.owner != this || cache.version != version_ || cache.pre.size() != weights_.size())
    throw std::logic_error("backward called with a stale or foreign forward cache");
  if (grad_output.rows() != output_dim() || grad_output.cols() != cache.output.cols())
    throw DimensionError("output gradient shape mismatch");

  Eigen::MatrixXd g = grad_output;
  if (spec_.head.kind == OutputHead::Kind::decoupled_softmax) {
    // d logits = y * (dy - <y, dy>) within each block
    const int bs = spec_.head.block_size;
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      for (int b = 0; b < spec_.head.block_count; ++b) {
        auto y = cache.output.col(c).segment(b * bs, bs);
        auto dy = g.col(c).segment(b * bs, bs);
        const double dot = y.dot(dy);
        dy = y.cwiseProduct((dy.array() - dot).matrix());
      }
    }
  }

  Gradients grads;
  grads.weights.resize(weights_.size());
  grads.biases.resize(weights_.size());
  for (size_t l = weights_.size(); l-- > 0;) {
    grads.weights[l].noalias() = g * cache.inputs[l].transpose();
    grads.biases[l] = g.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd prev = weights_[l].transpose() * g;
      activation_backward(spec_.hidden, cache.pre[l - 1], prev);
      g = std::move(prev);
    } else if (grad_input) {
      *grad_input = weights_[0].transpose() * g;
    }
  }
  return grads;
}

Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (size_t l = 0; l < weights_.size(); ++l) {
    g.weights.push_back(Eigen::MatrixXd::Zero(weights_[l].rows(), weights_[l].cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(biases_[l].size()));
  }
  return g;
}

Eigen::MatrixXd& Mlp::mutable_weight(int layer) {
  version_ = next_version();
  return weights_[layer];
}

Eigen::VectorXd& Mlp::mutable_bias(int layer) {
  version_ = next_version();
  return biases_[layer];
}

Eigen::VectorXd Mlp::flat_params() const {
  Gradients view{weights_, biases_};
  return view.flatten();
}

void Mlp::set_flat_params(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count())
    throw DimensionError("flat parameter vector has the wrong length");
  Eigen::Index at = 0;
  for (size_t l = 0; l < weights_.size(); ++l) {
    weights_[l].reshaped() = flat.segment(at, weights_[l].size());
    at += weights_[l].size();
    biases_[l] = flat.segment(at, biases_[l].size());
    at += biases_[l].size();
  }
  version_ = next_version();
}

bool Mlp::all_finite() const {
  for (size_t l = 0; l < weights_.size(); ++l)
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
  return true;
}

Eigen::MatrixXd decoupled_softmax(const Eigen::MatrixXd& raw, int block_size, int block_count) {
  if (raw.rows() != static_cast<Eigen::Index>(block_size) * block_count)
    throw DimensionError("softmax input length is not block_size * block_count");
  Eigen::MatrixXd out = raw;
  for (Eigen::Index c = 0; c < out.cols(); ++c)
    for (int b = 0; b < block_count; ++b)
      softmax_block_inplace(out.col(c).segment(static_cast<Eigen::Index>(b) * block_size, block_size));
  return out;
}

Eigen::VectorXd decoupled_softmax(const Eigen::VectorXd& raw, int block_size, int block_count) {
  return decoupled_softmax(Eigen::MatrixXd(raw), block_size, block_count).col(0);
}

AdamState AdamState::for_network(const Mlp& net, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  const Gradients zero = net.zero_gradients();
  s.m_weights = s.v_weights = zero.weights;
  s.m_biases = s.v_biases = zero.biases;
  return s;
}

void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
  const size_t layers = net.weights_.size();
  if (grads.weights.size() != layers || grads.biases.size() != layers ||
      state.m_weights.size() != layers || state.m_biases.size() != layers)
    throw DimensionError("adam_step: layer count mismatch");
  for (size_t l = 0; l < layers; ++l) {
    if (grads.weights[l].rows() != net.weights_[l].rows() ||
        grads.weights[l].cols() != net.weights_[l].cols() ||
        grads.biases[l].size() != net.biases_[l].size())
      throw DimensionError("adam_step: gradient shape mismatch");
  }
  if (!grads.all_finite()) throw NumericError("adam_step: non-finite gradient");

  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const double b1 = state.beta1, b2 = state.beta2, lr = state.learning_rate, eps = state.epsilon;

  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (size_t l = 0; l < layers; ++l) {
    update(net.weights_[l], grads.weights[l], state.m_weights[l], state.v_weights[l]);
    update(net.biases_[l], grads.biases[l], state.m_biases[l], state.v_biases[l]);
  }
  net.version_ = next_version();
}

void polyak_update(const Mlp& online, Mlp& target, double tau) {
  if (!(online.spec() == target.spec())) throw DimensionError("polyak_update: spec mismatch");
  for (size_t l = 0; l < online.weights_.size(); ++l) {
    target.weights_[l] = tau * online.weights_[l] + (1.0 - tau) * target.weights_[l];
    target.biases_[l] = tau * online.biases_[l] + (1.0 - tau) * target.biases_[l];
  }
  target.version_ = next_version();
}

std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat(static_cast<size_t>(m.size()));
  // row-major
  size_t i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat[i++] = m(r, c);
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

Eigen::MatrixXd matrix_from(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw IoError("checkpoint matrix has the wrong element count");
  Eigen::MatrixXd m(rows, cols);
  size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[i++].get<double>();
  return m;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void check_header(const nlohmann::json& doc, std::string_view kind) {
  if (doc.value("format", "") != kind)
    throw IoError("checkpoint is not a '" + std::string(kind) + "' document");
  if (doc.value("version", 0) != kCheckpointVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(doc.value("version", 0)));
}

}  // namespace

nlohmann::json to_json(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (int l = 0; l < net.layer_count(); ++l)
    layers.push_back({{"weight", matrix_json(net.weight(l))}, {"bias", vector_json(net.bias(l))}});
  const auto& head = net.spec().head;
  return {{"format", "slicerl.mlp"},
          {"version", kCheckpointVersion},
          {"sizes", net.spec().sizes},
          {"activation", to_string(net.spec().hidden)},
          {"head",
           {{"kind", head.kind == OutputHead::Kind::linear ? "linear" : "decoupled_softmax"},
            {"block_size", head.block_size},
            {"block_count", head.block_count}}},
          {"layers", layers}};
}

Mlp mlp_from_json(const nlohmann::json& doc) {
  try {
    check_header(doc, "slicerl.mlp");
    MlpSpec spec;
    spec.sizes = doc.at("sizes").get<std::vector<int>>();
    spec.hidden = parse_activation(doc.at("activation").get<std::string>());
    const auto& head = doc.at("head");
    if (head.at("kind").get<std::string>() == "decoupled_softmax")
      spec.head = OutputHead::softmax(head.at("block_size").get<int>(), head.at("block_count").get<int>());
    Mlp net(spec);
    const auto& layers = doc.at("layers");
    if (static_cast<int>(layers.size()) != net.layer_count())
      throw IoError("checkpoint layer count does not match its sizes");
    for (int l = 0; l < net.layer_count(); ++l) {
      Eigen::MatrixXd w = matrix_from(layers[l].at("weight"));
      Eigen::VectorXd b = vector_from(layers[l].at("bias"));
      if (w.rows() != net.weight(l).rows() || w.cols() != net.weight(l).cols() ||
          b.size() != net.bias(l).size())
        throw IoError("checkpoint layer shape does not match its sizes");
      net.mutable_weight(l) = std::move(w);
      net.mutable_bias(l) = std::move(b);
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed MLP checkpoint: ") + e.what());
  }
}

nlohmann::json to_json(const AdamState& state) {
  nlohmann::json layers = nlohmann::json::array();
  for (size_t l = 0; l < state.m_weights.size(); ++l)
    layers.push_back({{"m_weight", matrix_json(state.m_weights[l])},
                      {"v_weight", matrix_json(state.v_weights[l])},
                      {"m_bias", vector_json(state.m_biases[l])},
                      {"v_bias", vector_json(state.v_biases[l])}});
  return {{"format", "slicerl.adam"}, {"version", kCheckpointVersion},
          {"learning_rate", state.learning_rate}, {"beta1", state.beta1},
          {"beta2", state.beta2}, {"epsilon", state.epsilon},
          {"step", state.step}, {"layers", layers}};
}

AdamState adam_from_json(const nlohmann::json& doc) {
  try {
    check_header(doc, "slicerl.adam");
    AdamState s;
    s.learning_rate = doc.at("learning_rate").get<double>();
    s.beta1 = doc.at("beta1").get<double>();
    s.beta2 = doc.at("beta2").get<double>();
    s.epsilon = doc.at("epsilon").get<double>();
    s.step = doc.at("step").get<long>();
    for (const auto& layer : doc.at("layers")) {
      s.m_weights.push_back(matrix_from(layer.at("m_weight")));
      s.v_weights.push_back(matrix_from(layer.at("v_weight")));
      s.m_biases.push_back(vector_from(layer.at("m_bias")));
      s.v_biases.push_back(vector_from(layer.at("v_bias")));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed Adam checkpoint: ") + e.what());
  }
}

}  // namespace slicerl::nn
