// Copyright 2026 The Teamsym Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TEAMSYM_NEURAL_H_
#define TEAMSYM_NEURAL_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "teamsym/payoff.h"

namespace teamsym {

enum class Activation { kTanh, kRelu, kIdentity };

std::string ActivationName(Activation activation);
Activation ActivationFromName(const std::string& name);

// Fully connected network. Hidden layers apply `activation`; the output
// layer is affine (raw logits or values).
struct Mlp {
  std::vector<int> layer_dims;
  std::vector<Eigen::MatrixXd> weights;  // weights[l] is dims[l+1] x dims[l]
  std::vector<Eigen::VectorXd> biases;
  Activation activation = Activation::kTanh;

  int input_size() const { return layer_dims.front(); }
  int output_size() const { return layer_dims.back(); }
  int num_layers() const { return static_cast<int>(weights.size()); }
  std::int64_t num_parameters() const;
  bool AllFinite() const;
};

// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
Mlp MakeMlp(std::vector<int> layer_dims, Activation activation,
            std::uint64_t seed);
// All parameters zero.
Mlp MakeZeroMlp(std::vector<int> layer_dims, Activation activation);

// Same shapes as the network, used for gradients and optimizer moments.
struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static MlpGradients ZerosLike(const Mlp& net);
  void Add(const MlpGradients& other);
  void Scale(double factor);
  double SquaredNorm() const;
  bool AllFinite() const;
};

Eigen::VectorXd MlpForward(const Mlp& net, const Eigen::VectorXd& input);

// Reverse-mode gradient of <output_gradient, MlpForward(net, input)> with
// respect to every parameter.
MlpGradients Backprop(const Mlp& net, const Eigen::VectorXd& input,
                      const Eigen::VectorXd& output_gradient);

// Shift-invariant softmax.
Eigen::VectorXd Softmax(const Eigen::VectorXd& logits);
MixedStrategy SoftmaxStrategy(const Eigen::VectorXd& logits);

struct LossAndGradient {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

// KL(target || softmax(logits)), 0 log 0 = 0. Gradient wrt logits is
// softmax(logits) - target.
LossAndGradient KlLoss(const Eigen::VectorXd& target,
                       const Eigen::VectorXd& logits);

// Sum of squared errors and its gradient 2 (pred - target).
LossAndGradient MseAndGrad(const Eigen::VectorXd& predictions,
                           const Eigen::VectorXd& targets);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  MlpGradients first_moment;
  MlpGradients second_moment;

  static AdamState For(const Mlp& net, double learning_rate);
};

// Clips `gradients` to global L2 norm `max_grad_norm` (skipped when <= 0),
// then applies one bias-corrected Adam step to `net`. Throws
// kNonFiniteGradient on NaN/inf input. Returns the pre-clip norm.
double AdamStep(AdamState& state, Mlp& net, MlpGradients gradients,
                double max_grad_norm);

// {"layer_dims":[...],"activation":"tanh","layers":[{"rows":r,"cols":c,
//   "weights":[row-major],"bias":[...]}, ...]}
nlohmann::json MlpToJson(const Mlp& net);
Mlp MlpFromJson(const nlohmann::json& doc);

}  // namespace teamsym

#endif  // TEAMSYM_NEURAL_H_
