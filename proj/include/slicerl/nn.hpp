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

// Dense multilayer perceptrons with a hand-written backward pass.
//
// Batches are column-major: a batch of B inputs is a d_in x B matrix. The
// output head is either linear or a decoupled softmax, which applies an
// independent softmax to each contiguous block of `block_size` outputs.

#ifndef SLICERL_NN_HPP_
#define SLICERL_NN_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace slicerl::nn {

using Rng = std::mt19937_64;

enum class Activation { relu, tanh };

struct OutputHead {
  enum class Kind { linear, decoupled_softmax };
  Kind kind = Kind::linear;
  int block_size = 1;
  int block_count = 1;

  static OutputHead linear() { return {}; }
  static OutputHead softmax(int block_size, int block_count) {
    return {Kind::decoupled_softmax, block_size, block_count};
  }
  bool operator==(const OutputHead&) const = default;
};

struct MlpSpec {
  std::vector<int> sizes;  // [d_in, h_1, ..., h_L, d_out]
  Activation hidden = Activation::relu;
  OutputHead head;

  void validate() const;
  bool operator==(const MlpSpec&) const = default;
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  Eigen::VectorXd flatten() const;
  bool all_finite() const;
};

class Mlp;
struct AdamState;

// Activations recorded by a forward pass. Tied to the parameter version of the
// network that produced it; backward rejects a cache from older parameters.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
  Eigen::MatrixXd output;
  const Mlp* owner = nullptr;
  std::uint64_t version = 0;
};

class Mlp {
 public:
  Mlp() = default;
  // All parameters zero.
  explicit Mlp(MlpSpec spec);

  // Glorot-uniform weights, zero biases.
  static Mlp init(Rng& rng, MlpSpec spec);

  const MlpSpec& spec() const { return spec_; }
  int input_dim() const { return spec_.sizes.front(); }
  int output_dim() const { return spec_.sizes.back(); }
  int layer_count() const { return static_cast<int>(weights_.size()); }
  std::size_t parameter_count() const;

  // `logit_offset` (d_out x B, optional) is added before the head, which is
  // how exploration noise enters the softmax head.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, ForwardCache* cache = nullptr,
                          const Eigen::MatrixXd* logit_offset = nullptr) const;
  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;

  // Sums parameter gradients over the batch columns of `grad_output`. Writes
  // d(loss)/d(input) into `grad_input` when given.
  Gradients backward(const ForwardCache& cache, const Eigen::MatrixXd& grad_output,
                     Eigen::MatrixXd* grad_input = nullptr) const;

  Gradients zero_gradients() const;

  const Eigen::MatrixXd& weight(int layer) const { return weights_[layer]; }
  const Eigen::VectorXd& bias(int layer) const { return biases_[layer]; }
  // Invalidate outstanding forward caches.
  Eigen::MatrixXd& mutable_weight(int layer);
  Eigen::VectorXd& mutable_bias(int layer);

  Eigen::VectorXd flat_params() const;
  void set_flat_params(const Eigen::VectorXd& flat);
  bool all_finite() const;

  std::uint64_t version() const { return version_; }

  friend void adam_step(Mlp& net, const Gradients& grads, AdamState& state);
  friend void polyak_update(const Mlp& online, Mlp& target, double tau);

 private:
  MlpSpec spec_;
  std::vector<Eigen::MatrixXd> weights_;  // out x in
  std::vector<Eigen::VectorXd> biases_;
  std::uint64_t version_ = 1;
};

// Column-wise; every block of each column is mapped onto the simplex using
// max-subtraction, so arbitrarily large logits do not overflow.
Eigen::MatrixXd decoupled_softmax(const Eigen::MatrixXd& raw, int block_size, int block_count);
Eigen::VectorXd decoupled_softmax(const Eigen::VectorXd& raw, int block_size, int block_count);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<Eigen::MatrixXd> m_weights, v_weights;
  std::vector<Eigen::VectorXd> m_biases, v_biases;

  static AdamState for_network(const Mlp& net, double learning_rate);
};

// Gradient-descent step with bias correction. Throws NumericError on a
// non-finite gradient, DimensionError on a shape mismatch.
void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

// target <- tau * online + (1 - tau) * target
void polyak_update(const Mlp& online, Mlp& target, double tau);

// Versioned checkpoint documents. Doubles are written in shortest round-trip
// form, so a save/load cycle reproduces every parameter bit-exactly.
inline constexpr int kCheckpointVersion = 1;
nlohmann::json to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const AdamState& state);
AdamState adam_from_json(const nlohmann::json& doc);

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);

}  // namespace slicerl::nn

#endif  // SLICERL_NN_HPP_
