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

#include "teamsym/neural.h"

#include <cmath>

#include "teamsym/errors.h"
#include "teamsym/rng.h"

namespace teamsym {
namespace {

void CheckDims(const std::vector<int>& dims) {
  if (dims.size() < 2) {
    throw Error(ErrorCode::kDimensionMismatch, "need input and output sizes");
  }
  for (int d : dims) {
    if (d < 1) throw Error(ErrorCode::kDimensionMismatch, "layer sizes must be >= 1");
  }
}

Eigen::VectorXd Activate(Activation activation, const Eigen::VectorXd& z) {
  switch (activation) {
    case Activation::kTanh: return z.array().tanh();
    case Activation::kRelu: return z.cwiseMax(0.0);
    case Activation::kIdentity: return z;
  }
  return z;
}

// Derivative of the activation expressed through its output (tanh) or input.
Eigen::VectorXd ActivationDerivative(Activation activation,
                                     const Eigen::VectorXd& pre,
                                     const Eigen::VectorXd& post) {
  switch (activation) {
    case Activation::kTanh: return 1.0 - post.array().square();
    case Activation::kRelu: return (pre.array() > 0.0).cast<double>();
    case Activation::kIdentity: return Eigen::VectorXd::Ones(pre.size());
  }
  return Eigen::VectorXd::Ones(pre.size());
}

}  // namespace

std::string ActivationName(Activation activation) {
  switch (activation) {
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kIdentity: return "identity";
  }
  return "tanh";
}

Activation ActivationFromName(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  throw Error(ErrorCode::kInvalidInput, "unknown activation '" + name + "'");
}

std::int64_t Mlp::num_parameters() const {
  std::int64_t n = 0;
  for (int l = 0; l < num_layers(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

bool Mlp::AllFinite() const {
  for (int l = 0; l < num_layers(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

Mlp MakeZeroMlp(std::vector<int> layer_dims, Activation activation) {
  CheckDims(layer_dims);
  Mlp net;
  net.layer_dims = std::move(layer_dims);
  net.activation = activation;
  for (std::size_t l = 0; l + 1 < net.layer_dims.size(); ++l) {
    net.weights.push_back(
        Eigen::MatrixXd::Zero(net.layer_dims[l + 1], net.layer_dims[l]));
    net.biases.push_back(Eigen::VectorXd::Zero(net.layer_dims[l + 1]));
  }
  return net;
}

Mlp MakeMlp(std::vector<int> layer_dims, Activation activation,
            std::uint64_t seed) {
  Mlp net = MakeZeroMlp(std::move(layer_dims), activation);
  Rng rng(seed);
  for (int l = 0; l < net.num_layers(); ++l) {
    const double limit =
        std::sqrt(6.0 / (net.layer_dims[l] + net.layer_dims[l + 1]));
    Eigen::MatrixXd& w = net.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = (2.0 * UniformReal(rng) - 1.0) * limit;
      }
    }
  }
  return net;
}

MlpGradients MlpGradients::ZerosLike(const Mlp& net) {
  MlpGradients g;
  for (int l = 0; l < net.num_layers(); ++l) {
    g.weights.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(),
                                              net.weights[l].cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }
  return g;
}

void MlpGradients::Add(const MlpGradients& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += other.weights[l];
    biases[l] += other.biases[l];
  }
}

void MlpGradients::Scale(double factor) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] *= factor;
    biases[l] *= factor;
  }
}

double MlpGradients::SquaredNorm() const {
  double total = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    total += weights[l].squaredNorm() + biases[l].squaredNorm();
  }
  return total;
}

bool MlpGradients::AllFinite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

Eigen::VectorXd MlpForward(const Mlp& net, const Eigen::VectorXd& input) {
  if (input.size() != net.input_size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "input has size " + std::to_string(input.size()) + ", expected " +
                    std::to_string(net.input_size()));
  }
  Eigen::VectorXd h = input;
  for (int l = 0; l < net.num_layers(); ++l) {
    Eigen::VectorXd z = net.weights[l] * h + net.biases[l];
    h = l + 1 < net.num_layers() ? Activate(net.activation, z) : z;
  }
  return h;
}

MlpGradients Backprop(const Mlp& net, const Eigen::VectorXd& input,
                      const Eigen::VectorXd& output_gradient) {
  if (input.size() != net.input_size() ||
      output_gradient.size() != net.output_size()) {
    throw Error(ErrorCode::kDimensionMismatch, "backprop shape mismatch");
  }
  const int layers = net.num_layers();
  std::vector<Eigen::VectorXd> activations{input};
  std::vector<Eigen::VectorXd> pre;
  for (int l = 0; l < layers; ++l) {
    pre.push_back(net.weights[l] * activations.back() + net.biases[l]);
    activations.push_back(l + 1 < layers ? Activate(net.activation, pre.back())
                                         : pre.back());
  }
  MlpGradients grads = MlpGradients::ZerosLike(net);
  Eigen::VectorXd delta = output_gradient;
  for (int l = layers - 1; l >= 0; --l) {
    grads.weights[l] = delta * activations[l].transpose();
    grads.biases[l] = delta;
    if (l > 0) {
      delta = (net.weights[l].transpose() * delta)
                  .cwiseProduct(ActivationDerivative(net.activation, pre[l - 1],
                                                     activations[l]));
    }
  }
  return grads;
}

Eigen::VectorXd Softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

MixedStrategy SoftmaxStrategy(const Eigen::VectorXd& logits) {
  Eigen::VectorXd p = Softmax(logits);
  return {std::vector<double>(p.data(), p.data() + p.size())};
}

LossAndGradient KlLoss(const Eigen::VectorXd& target,
                       const Eigen::VectorXd& logits) {
  if (target.size() != logits.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "target and logits differ in size");
  }
  const double shift = logits.maxCoeff();
  const double log_norm = std::log((logits.array() - shift).exp().sum()) + shift;
  LossAndGradient out;
  for (Eigen::Index a = 0; a < target.size(); ++a) {
    if (target[a] > 0.0) {
      out.value += target[a] * (std::log(target[a]) - (logits[a] - log_norm));
    }
  }
  out.gradient = Softmax(logits) - target;
  return out;
}

LossAndGradient MseAndGrad(const Eigen::VectorXd& predictions,
                           const Eigen::VectorXd& targets) {
  if (predictions.size() != targets.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "predictions and targets differ in size");
  }
  Eigen::VectorXd diff = predictions - targets;
  return {diff.squaredNorm(), 2.0 * diff};
}

AdamState AdamState::For(const Mlp& net, double learning_rate) {
  AdamState state;
  state.learning_rate = learning_rate;
  state.first_moment = MlpGradients::ZerosLike(net);
  state.second_moment = MlpGradients::ZerosLike(net);
  return state;
}

double AdamStep(AdamState& state, Mlp& net, MlpGradients gradients,
                double max_grad_norm) {
  if (!gradients.AllFinite()) {
    throw Error(ErrorCode::kNonFiniteGradient, "gradient contains NaN or inf");
  }
  const double norm = std::sqrt(gradients.SquaredNorm());
  if (max_grad_norm > 0.0 && norm > max_grad_norm) {
    gradients.Scale(max_grad_norm / norm);
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    param.array() -= state.learning_rate * (m.array() / c1) /
                     ((v.array() / c2).sqrt() + state.epsilon);
  };
  for (int l = 0; l < net.num_layers(); ++l) {
    update(net.weights[l], state.first_moment.weights[l],
           state.second_moment.weights[l], gradients.weights[l]);
    update(net.biases[l], state.first_moment.biases[l],
           state.second_moment.biases[l], gradients.biases[l]);
  }
  return norm;
}

nlohmann::json MlpToJson(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (int l = 0; l < net.num_layers(); ++l) {
    const Eigen::MatrixXd& w = net.weights[l];
    std::vector<double> flat;
    flat.reserve(w.size());
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    }
    const Eigen::VectorXd& b = net.biases[l];
    layers.push_back({{"rows", w.rows()},
                      {"cols", w.cols()},
                      {"weights", flat},
                      {"bias", std::vector<double>(b.data(), b.data() + b.size())}});
  }
  return {{"layer_dims", net.layer_dims},
          {"activation", ActivationName(net.activation)},
          {"layers", layers}};
}

Mlp MlpFromJson(const nlohmann::json& doc) {
  try {
    Mlp net = MakeZeroMlp(doc.at("layer_dims").get<std::vector<int>>(),
                          ActivationFromName(doc.at("activation").get<std::string>()));
    const auto& layers = doc.at("layers");
    if (static_cast<int>(layers.size()) != net.num_layers()) {
      throw Error(ErrorCode::kInvalidInput, "layer count disagrees with layer_dims");
    }
    for (int l = 0; l < net.num_layers(); ++l) {
      const auto& layer = layers[l];
      auto flat = layer.at("weights").get<std::vector<double>>();
      auto bias = layer.at("bias").get<std::vector<double>>();
      Eigen::MatrixXd& w = net.weights[l];
      if (layer.at("rows").get<Eigen::Index>() != w.rows() ||
          layer.at("cols").get<Eigen::Index>() != w.cols() ||
          static_cast<Eigen::Index>(flat.size()) != w.size() ||
          static_cast<Eigen::Index>(bias.size()) != net.biases[l].size()) {
        throw Error(ErrorCode::kInvalidInput, "layer shape mismatch");
      }
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat[r * w.cols() + c];
      }
      for (std::size_t i = 0; i < bias.size(); ++i) net.biases[l][i] = bias[i];
    }
    if (!net.AllFinite()) throw Error(ErrorCode::kInvalidInput, "non-finite parameter");
    return net;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kInvalidInput, std::string("malformed checkpoint: ") + ex.what());
  }
}

}  // namespace teamsym
