#pragma once

// Dense feed-forward network with analytic backprop, Adam and a Huber loss.
// Batches are laid out one sample per row (B x features). ReLU on hidden
// layers, identity on the output layer. All math in double precision.

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gqn/error.hpp"

namespace gqn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Params {
  std::vector<Matrix> weights;  // layer k: dims[k+1] x dims[k]
  std::vector<Vector> biases;   // layer k: dims[k+1]

  std::size_t num_layers() const { return weights.size(); }

  std::size_t size() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) n += weights[k].size() + biases[k].size();
    return n;
  }

  bool all_finite() const {
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (!weights[k].allFinite() || !biases[k].allFinite()) return false;
    }
    return true;
  }

  bool same_shape(const Params& other) const {
    if (other.weights.size() != weights.size() || other.biases.size() != biases.size()) return false;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (weights[k].rows() != other.weights[k].rows() || weights[k].cols() != other.weights[k].cols() ||
          biases[k].size() != other.biases[k].size())
        return false;
    }
    return true;
  }

  static Params zeros_like(const Params& p) {
    Params z;
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
      z.weights.push_back(Matrix::Zero(p.weights[k].rows(), p.weights[k].cols()));
      z.biases.push_back(Vector::Zero(p.biases[k].size()));
    }
    return z;
  }

  friend bool operator==(const Params& a, const Params& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t k = 0; k < a.weights.size(); ++k) {
      if (a.weights[k] != b.weights[k] || a.biases[k] != b.biases[k]) return false;
    }
    return true;
  }
};

struct DenseNet {
  std::vector<int> layer_dims;
  Params params;
  // Bumped on every parameter mutation; lets backward() detect stale caches.
  std::uint64_t version = 0;

  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
  std::size_t num_layers() const { return params.num_layers(); }
};

struct ForwardCache {
  std::vector<Matrix> pre;   // pre-activation of each layer (B x dims[k+1])
  std::vector<Matrix> post;  // post[0] is the input, post[k+1] the output of layer k
  std::vector<int> layer_dims;
  std::uint64_t version = 0;
};

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Params first_moment;
  Params second_moment;
  std::uint64_t step_count = 0;
  AdamConfig config;
};

struct HuberResult {
  double loss = 0.0;
  Vector grad;  // d loss / d pred
};

inline DenseNet init_net(const std::vector<int>& layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2) throw ConfigError("init_net: need at least input and output dims");
  for (int d : layer_dims) {
    if (d < 1) throw ConfigError("init_net: layer dims must be positive");
  }
  DenseNet net;
  net.layer_dims = layer_dims;
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k + 1 < layer_dims.size(); ++k) {
    const int fan_in = layer_dims[k];
    const int fan_out = layer_dims[k + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) w(r, c) = dist(rng);
    }
    net.params.weights.push_back(std::move(w));
    net.params.biases.push_back(Vector::Zero(fan_out));
  }
  return net;
}

namespace detail {

inline void check_input(const DenseNet& net, const Matrix& inputs) {
  if (inputs.cols() != net.input_dim()) {
    throw ContractViolation("forward: input width " + std::to_string(inputs.cols()) + " != net input dim " +
                            std::to_string(net.input_dim()));
  }
}

inline Matrix affine(const Matrix& x, const Matrix& w, const Vector& b) {
  Matrix z = x * w.transpose();
  z.rowwise() += b.transpose();
  return z;
}

}  // namespace detail

// Output only; no cache kept. Used for target evaluation and acting.
inline Matrix predict(const DenseNet& net, const Matrix& inputs) {
  detail::check_input(net, inputs);
  Matrix x = inputs;
  const std::size_t L = net.num_layers();
  for (std::size_t k = 0; k < L; ++k) {
    x = detail::affine(x, net.params.weights[k], net.params.biases[k]);
    if (k + 1 < L) x = x.cwiseMax(0.0);
  }
  return x;
}

inline std::pair<Matrix, ForwardCache> forward(const DenseNet& net, const Matrix& inputs) {
  detail::check_input(net, inputs);
  ForwardCache cache;
  cache.layer_dims = net.layer_dims;
  cache.version = net.version;
  const std::size_t L = net.num_layers();
  cache.pre.reserve(L);
  cache.post.reserve(L + 1);
  cache.post.push_back(inputs);
  for (std::size_t k = 0; k < L; ++k) {
    cache.pre.push_back(detail::affine(cache.post.back(), net.params.weights[k], net.params.biases[k]));
    if (k + 1 < L) {
      cache.post.push_back(cache.pre.back().cwiseMax(0.0));
    } else {
      cache.post.push_back(cache.pre.back());
    }
  }
  Matrix out = cache.post.back();
  return {std::move(out), std::move(cache)};
}

inline Params backward(const DenseNet& net, const ForwardCache& cache, const Matrix& output_grads) {
  const std::size_t L = net.num_layers();
  if (cache.version != net.version || cache.layer_dims != net.layer_dims || cache.pre.size() != L ||
      cache.post.size() != L + 1) {
    throw ContractViolation("backward: cache does not belong to this network state");
  }
  const Eigen::Index batch = cache.post.front().rows();
  if (output_grads.rows() != batch || output_grads.cols() != net.output_dim()) {
    throw ContractViolation("backward: output gradient shape mismatch");
  }
  Params grads;
  grads.weights.resize(L);
  grads.biases.resize(L);
  Matrix delta = output_grads;
  for (std::size_t k = L; k-- > 0;) {
    grads.weights[k] = delta.transpose() * cache.post[k];
    grads.biases[k] = delta.colwise().sum().transpose();
    if (k > 0) {
      delta = (delta * net.params.weights[k]).cwiseProduct((cache.pre[k - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return grads;
}

// loss = sum_b w_b * L_delta(target_b - pred_b) / B
inline HuberResult huber_loss_and_grad(const Vector& pred, const Vector& target, double delta,
                                       const Vector& sample_weights) {
  if (pred.size() != target.size() || pred.size() != sample_weights.size()) {
    throw ConfigError("huber_loss_and_grad: length mismatch");
  }
  if (!(delta > 0.0)) throw ConfigError("huber_loss_and_grad: delta must be positive");
  const Eigen::Index n = pred.size();
  HuberResult out;
  out.grad = Vector::Zero(n);
  if (n == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index b = 0; b < n; ++b) {
    const double r = target[b] - pred[b];
    const double w = sample_weights[b];
    const double a = std::abs(r);
    if (a <= delta) {
      out.loss += w * 0.5 * r * r;
      out.grad[b] = -w * r * inv_n;
    } else {
      out.loss += w * delta * (a - 0.5 * delta);
      out.grad[b] = -w * delta * (r > 0.0 ? 1.0 : -1.0) * inv_n;
    }
  }
  out.loss *= inv_n;
  return out;
}

inline AdamState make_adam(const DenseNet& net, const AdamConfig& config = {}) {
  AdamState s;
  s.first_moment = Params::zeros_like(net.params);
  s.second_moment = Params::zeros_like(net.params);
  s.config = config;
  return s;
}

inline void adam_step(DenseNet& net, const Params& grads, AdamState& state) {
  if (!grads.same_shape(net.params) || !state.first_moment.same_shape(net.params) ||
      !state.second_moment.same_shape(net.params)) {
    throw ContractViolation("adam_step: gradient/moment shapes do not match the network");
  }
  if (!grads.all_finite()) throw DivergenceError("adam_step: non-finite gradient, update rejected");

  const AdamConfig& c = state.config;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    param.array() -= c.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.epsilon);
  };
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    update(net.params.weights[k], grads.weights[k], state.first_moment.weights[k], state.second_moment.weights[k]);
    update(net.params.biases[k], grads.biases[k], state.first_moment.biases[k], state.second_moment.biases[k]);
  }
  net.version += 1;
}

inline void copy_params(const DenseNet& src, DenseNet& dst) {
  if (src.layer_dims != dst.layer_dims) throw ContractViolation("copy_params: architecture mismatch");
  dst.params = src.params;
  dst.version += 1;
}

// ---- serialization (row-major flat arrays) ----

inline nlohmann::json matrix_to_json(const Matrix& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(flat)}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw ConfigError("matrix payload size mismatch");
  Matrix m(rows, cols);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[i++].get<double>();
  }
  return m;
}

inline nlohmann::json vector_to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Vector vector_from_json(const nlohmann::json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(data.data(), static_cast<Eigen::Index>(data.size()));
}

inline nlohmann::json params_to_json(const Params& p) {
  nlohmann::json w = nlohmann::json::array();
  nlohmann::json b = nlohmann::json::array();
  for (std::size_t k = 0; k < p.num_layers(); ++k) {
    w.push_back(matrix_to_json(p.weights[k]));
    b.push_back(vector_to_json(p.biases[k]));
  }
  return {{"weights", std::move(w)}, {"biases", std::move(b)}};
}

inline Params params_from_json(const nlohmann::json& j) {
  Params p;
  for (const auto& w : j.at("weights")) p.weights.push_back(matrix_from_json(w));
  for (const auto& b : j.at("biases")) p.biases.push_back(vector_from_json(b));
  if (p.weights.size() != p.biases.size()) throw ConfigError("params: layer count mismatch");
  return p;
}

inline nlohmann::json net_to_json(const DenseNet& net) {
  return {{"layer_dims", net.layer_dims}, {"params", params_to_json(net.params)}, {"version", net.version}};
}

inline DenseNet net_from_json(const nlohmann::json& j) {
  DenseNet net;
  net.layer_dims = j.at("layer_dims").get<std::vector<int>>();
  net.params = params_from_json(j.at("params"));
  net.version = j.at("version").get<std::uint64_t>();
  if (net.params.num_layers() + 1 != net.layer_dims.size()) throw ConfigError("net: dims/params mismatch");
  for (std::size_t k = 0; k < net.params.num_layers(); ++k) {
    if (net.params.weights[k].rows() != net.layer_dims[k + 1] || net.params.weights[k].cols() != net.layer_dims[k])
      throw ConfigError("net: weight shape does not chain with layer_dims");
  }
  return net;
}

inline nlohmann::json adam_to_json(const AdamState& s) {
  return {{"first_moment", params_to_json(s.first_moment)},
          {"second_moment", params_to_json(s.second_moment)},
          {"step_count", s.step_count},
          {"learning_rate", s.config.learning_rate},
          {"beta1", s.config.beta1},
          {"beta2", s.config.beta2},
          {"epsilon", s.config.epsilon}};
}

inline AdamState adam_from_json(const nlohmann::json& j) {
  AdamState s;
  s.first_moment = params_from_json(j.at("first_moment"));
  s.second_moment = params_from_json(j.at("second_moment"));
  s.step_count = j.at("step_count").get<std::uint64_t>();
  s.config.learning_rate = j.at("learning_rate").get<double>();
  s.config.beta1 = j.at("beta1").get<double>();
  s.config.beta2 = j.at("beta2").get<double>();
  s.config.epsilon = j.at("epsilon").get<double>();
  return s;
}

}  // namespace gqn
