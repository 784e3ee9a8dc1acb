/*
 Copyright 2026 The hybridopt Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "hybridopt/nn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace hybridopt::nn {

namespace {

constexpr const char* kMlpMagic = "hybridopt-mlp";
constexpr const char* kCriticMagic = "hybridopt-critic";
constexpr int kFormatVersion = 1;

void activate(Activation act, Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::kRelu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::kTanh:
      z = z.array().tanh().matrix();
      break;
    case Activation::kIdentity:
      break;
  }
}

// dL/dz from dL/dy and the activated output y.
void activation_backward(Activation act, const Eigen::MatrixXd& y, Eigen::MatrixXd& g) {
  switch (act) {
    case Activation::kRelu:
      g = (y.array() > 0.0).select(g, 0.0);
      break;
    case Activation::kTanh:
      g.array() *= 1.0 - y.array().square();
      break;
    case Activation::kIdentity:
      break;
  }
}

const char* act_name(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kIdentity:
      return "identity";
  }
  return "?";
}

Activation act_from(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  if (s == "identity") return Activation::kIdentity;
  throw InvalidInput("checkpoint: unknown activation '" + s + "'");
}

void check_congruent(const Mlp& a, const Mlp& b, const char* what) {
  if (!a.congruent(b)) throw InvalidInput(std::string(what) + ": networks are not congruent");
}

template <typename Fn>
void for_each_param(Mlp& net, Fn&& fn) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Layer& layer = net.layers[l];
    for (Eigen::Index i = 0; i < layer.w.size(); ++i) fn(l, true, i, layer.w.data()[i]);
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) fn(l, false, i, layer.b.data()[i]);
  }
}

}  // namespace

bool Mlp::congruent(const Mlp& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].w.rows() != other.layers[l].w.rows() ||
        layers[l].w.cols() != other.layers[l].w.cols() ||
        layers[l].act != other.layers[l].act) {
      return false;
    }
  }
  return true;
}

Mlp init_mlp(const std::vector<int>& dims, const std::vector<Activation>& acts,
             std::mt19937_64& rng) {
  if (dims.size() < 2) throw InvalidInput("init_mlp: need at least input and output dims");
  if (acts.size() != dims.size() - 1) throw InvalidInput("init_mlp: one activation per layer");
  for (int d : dims) {
    if (d < 1) throw InvalidInput("init_mlp: dimensions must be positive");
  }
  Mlp net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double bound = std::sqrt(6.0 / dims[l]);
    std::uniform_real_distribution<double> dist(-bound, bound);
    Layer layer;
    layer.w.resize(dims[l + 1], dims[l]);
    // Row-major fill so that the draw order does not depend on storage order.
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) layer.w(r, c) = dist(rng);
    }
    layer.b = Eigen::VectorXd::Zero(dims[l + 1]);
    layer.act = acts[l];
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Mlp init_mlp(const std::vector<int>& dims, const std::vector<Activation>& acts,
             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return init_mlp(dims, acts, rng);
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& input, MlpCache* cache) {
  if (net.layers.empty()) throw InvalidInput("forward: empty network");
  if (input.rows() != net.input_dim()) throw InvalidInput("forward: input dimension mismatch");
  if (cache) {
    cache->inputs.resize(net.layers.size());
    cache->outputs.resize(net.layers.size());
    cache->version = net.version;
    cache->net = &net;
  }
  Eigen::MatrixXd x = input;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    Eigen::MatrixXd z = layer.w * x;
    z.colwise() += layer.b;
    activate(layer.act, z);
    if (cache) {
      cache->inputs[l] = std::move(x);
      cache->outputs[l] = z;
    }
    x = std::move(z);
  }
  return x;
}

MlpGrads MlpGrads::zeros_like(const Mlp& net) {
  MlpGrads g;
  for (const auto& layer : net.layers) {
    g.dw.push_back(Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols()));
    g.db.push_back(Eigen::VectorXd::Zero(layer.b.size()));
  }
  return g;
}

bool MlpGrads::all_finite() const {
  for (const auto& w : dw) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : db) {
    if (!b.allFinite()) return false;
  }
  return true;
}

namespace {

void check_cache(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& dout) {
  if (cache.net != &net || cache.version != net.version ||
      cache.outputs.size() != net.layers.size()) {
    throw UsageError("backward: stale or foreign forward cache");
  }
  if (dout.rows() != net.output_dim() || dout.cols() != cache.outputs.back().cols()) {
    throw InvalidInput("backward: output gradient has the wrong shape");
  }
}

Eigen::MatrixXd backward_impl(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& dout,
                              MlpGrads* grads) {
  check_cache(net, cache, dout);
  if (grads) {
    grads->dw.resize(net.layers.size());
    grads->db.resize(net.layers.size());
  }
  Eigen::MatrixXd g = dout;
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    activation_backward(net.layers[l].act, cache.outputs[l], g);
    if (grads) {
      grads->dw[l].noalias() = g * cache.inputs[l].transpose();
      grads->db[l] = g.rowwise().sum();
    }
    Eigen::MatrixXd next;
    next.noalias() = net.layers[l].w.transpose() * g;
    g = std::move(next);
  }
  return g;
}

}  // namespace

Eigen::MatrixXd backward(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& dout,
                         MlpGrads& grads) {
  return backward_impl(net, cache, dout, &grads);
}

Eigen::MatrixXd backward_input(const Mlp& net, const MlpCache& cache,
                               const Eigen::MatrixXd& dout) {
  return backward_impl(net, cache, dout, nullptr);
}

AdamState AdamState::for_net(const Mlp& net, double lr) {
  AdamState s;
  s.lr = lr;
  s.m = MlpGrads::zeros_like(net);
  s.v = MlpGrads::zeros_like(net);
  return s;
}

void adam_update(AdamState& s, Mlp& net, const MlpGrads& grads) {
  if (grads.dw.size() != net.layers.size() || s.m.dw.size() != net.layers.size()) {
    throw InvalidInput("adam_update: gradient shapes do not match the network");
  }
  if (!grads.all_finite()) throw DivergenceError("adam_update: non-finite gradient");
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  auto apply = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = s.beta2 * v + (1.0 - s.beta2) * g.cwiseAbs2();
    param.array() -= s.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + s.eps);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    apply(net.layers[l].w, s.m.dw[l], s.v.dw[l], grads.dw[l]);
    apply(net.layers[l].b, s.m.db[l], s.v.db[l], grads.db[l]);
  }
  ++net.version;
}

void soft_update(Mlp& target, const Mlp& source, double tau) {
  check_congruent(target, source, "soft_update");
  if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidInput("soft_update: tau must lie in [0, 1]");
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    // Endpoint form keeps tau = 0 and tau = 1 exact.
    target.layers[l].w = (1.0 - tau) * target.layers[l].w + tau * source.layers[l].w;
    target.layers[l].b = (1.0 - tau) * target.layers[l].b + tau * source.layers[l].b;
  }
  ++target.version;
}

double param_distance(const Mlp& a, const Mlp& b) {
  check_congruent(a, b, "param_distance");
  double sq = 0.0;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    sq += (a.layers[l].w - b.layers[l].w).squaredNorm();
    sq += (a.layers[l].b - b.layers[l].b).squaredNorm();
  }
  return std::sqrt(sq);
}

bool Critic::congruent(const Critic& other) const {
  return state.congruent(other.state) && action.congruent(other.action) &&
         merge.congruent(other.merge);
}

Critic init_critic(int obs_dim, int action_dim, int hidden, std::mt19937_64& rng) {
  using A = Activation;
  Critic c;
  c.state = init_mlp({obs_dim, hidden, hidden}, {A::kRelu, A::kRelu}, rng);
  c.action = init_mlp({action_dim, hidden}, {A::kRelu}, rng);
  c.merge = init_mlp({2 * hidden, hidden, hidden, 1}, {A::kRelu, A::kRelu, A::kIdentity}, rng);
  return c;
}

Eigen::MatrixXd critic_forward(const Critic& critic, const Eigen::MatrixXd& obs,
                               const Eigen::MatrixXd& action, CriticCache* cache) {
  if (obs.cols() != action.cols()) throw InvalidInput("critic_forward: batch size mismatch");
  const Eigen::MatrixXd hs = forward(critic.state, obs, cache ? &cache->state : nullptr);
  const Eigen::MatrixXd ha = forward(critic.action, action, cache ? &cache->action : nullptr);
  Eigen::MatrixXd joined(hs.rows() + ha.rows(), hs.cols());
  joined.topRows(hs.rows()) = hs;
  joined.bottomRows(ha.rows()) = ha;
  if (cache) cache->state_width = static_cast<int>(hs.rows());
  return forward(critic.merge, joined, cache ? &cache->merge : nullptr);
}

bool CriticGrads::all_finite() const {
  return state.all_finite() && action.all_finite() && merge.all_finite();
}

CriticGrads critic_backward(const Critic& critic, const CriticCache& cache,
                            const Eigen::MatrixXd& dout) {
  CriticGrads g;
  const Eigen::MatrixXd dj = backward(critic.merge, cache.merge, dout, g.merge);
  const Eigen::Index ws = cache.state_width;
  g.d_obs = backward(critic.state, cache.state, dj.topRows(ws), g.state);
  g.d_action = backward(critic.action, cache.action, dj.bottomRows(dj.rows() - ws), g.action);
  return g;
}

Eigen::MatrixXd critic_action_gradient(const Critic& critic, const CriticCache& cache,
                                       const Eigen::MatrixXd& dout) {
  const Eigen::MatrixXd dj = backward_input(critic.merge, cache.merge, dout);
  const Eigen::Index ws = cache.state_width;
  return backward_input(critic.action, cache.action, dj.bottomRows(dj.rows() - ws));
}

CriticAdam CriticAdam::for_critic(const Critic& critic, double lr) {
  return {AdamState::for_net(critic.state, lr), AdamState::for_net(critic.action, lr),
          AdamState::for_net(critic.merge, lr)};
}

void adam_update(CriticAdam& opt, Critic& critic, const CriticGrads& grads) {
  if (!grads.all_finite()) throw DivergenceError("adam_update: non-finite critic gradient");
  adam_update(opt.state, critic.state, grads.state);
  adam_update(opt.action, critic.action, grads.action);
  adam_update(opt.merge, critic.merge, grads.merge);
}

void soft_update(Critic& target, const Critic& source, double tau) {
  soft_update(target.state, source.state, tau);
  soft_update(target.action, source.action, tau);
  soft_update(target.merge, source.merge, tau);
}

double param_distance(const Critic& a, const Critic& b) {
  const double s = param_distance(a.state, b.state);
  const double ac = param_distance(a.action, b.action);
  const double m = param_distance(a.merge, b.merge);
  return std::sqrt(s * s + ac * ac + m * m);
}

GradCheck check_gradients(Mlp& net, const std::function<double()>& loss,
                          const MlpGrads& analytic, double h, double floor) {
  GradCheck out;
  for_each_param(net, [&](std::size_t l, bool is_w, Eigen::Index i, double& p) {
    const double saved = p;
    p = saved + h;
    ++net.version;
    const double up = loss();
    p = saved - h;
    ++net.version;
    const double down = loss();
    p = saved;
    ++net.version;
    const double numeric = (up - down) / (2.0 * h);
    const double a = is_w ? analytic.dw[l].data()[i] : analytic.db[l].data()[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), floor});
    out.max_rel_error = std::max(out.max_rel_error, std::abs(a - numeric) / denom);
    ++out.checked;
  });
  return out;
}

void save_mlp(std::ostream& os, const Mlp& net) {
  os << kMlpMagic << ' ' << kFormatVersion << '\n' << net.layers.size() << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& layer : net.layers) {
    os << layer.w.rows() << ' ' << layer.w.cols() << ' ' << act_name(layer.act) << '\n';
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) {
        os << layer.w(r, c) << (c + 1 == layer.w.cols() ? '\n' : ' ');
      }
    }
    for (Eigen::Index r = 0; r < layer.b.size(); ++r) {
      os << layer.b[r] << (r + 1 == layer.b.size() ? '\n' : ' ');
    }
  }
}

Mlp load_mlp(std::istream& is) {
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  if (!(is >> magic >> version) || magic != kMlpMagic) {
    throw InvalidInput("load_mlp: not an MLP checkpoint");
  }
  if (version != kFormatVersion) throw InvalidInput("load_mlp: unsupported checkpoint version");
  if (!(is >> count) || count == 0) throw InvalidInput("load_mlp: bad layer count");
  Mlp net;
  for (std::size_t l = 0; l < count; ++l) {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::string act;
    if (!(is >> rows >> cols >> act) || rows < 1 || cols < 1) {
      throw InvalidInput("load_mlp: bad layer header");
    }
    Layer layer;
    layer.act = act_from(act);
    layer.w.resize(rows, cols);
    layer.b.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) is >> layer.w(r, c);
    }
    for (Eigen::Index r = 0; r < rows; ++r) is >> layer.b[r];
    if (!is) throw InvalidInput("load_mlp: truncated checkpoint");
    if (!net.layers.empty() && net.layers.back().w.rows() != cols) {
      throw InvalidInput("load_mlp: layer dimensions do not chain");
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

void save_critic(std::ostream& os, const Critic& critic) {
  os << kCriticMagic << ' ' << kFormatVersion << '\n';
  save_mlp(os, critic.state);
  save_mlp(os, critic.action);
  save_mlp(os, critic.merge);
}

Critic load_critic(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != kCriticMagic || version != kFormatVersion) {
    throw InvalidInput("load_critic: not a critic checkpoint");
  }
  Critic c;
  c.state = load_mlp(is);
  c.action = load_mlp(is);
  c.merge = load_mlp(is);
  return c;
}

}  // namespace hybridopt::nn
