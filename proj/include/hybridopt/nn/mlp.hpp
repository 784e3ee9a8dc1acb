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

#ifndef HYBRIDOPT_NN_MLP_HPP
#define HYBRIDOPT_NN_MLP_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hybridopt/common/errors.hpp"

// Small fully connected networks with hand-written reverse mode. Batches are
// stored column-wise: an input batch is (input_dim x batch_size).
namespace hybridopt::nn {

enum class Activation { kRelu, kTanh, kIdentity };

struct Layer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;
  Activation act = Activation::kRelu;
};

struct Mlp {
  std::vector<Layer> layers;
  /// Bumped by every mutation through this module; caches record it.
  std::uint64_t version = 0;

  int input_dim() const { return static_cast<int>(layers.front().w.cols()); }
  int output_dim() const { return static_cast<int>(layers.back().w.rows()); }
  bool congruent(const Mlp& other) const;
};

/// dims = {in, h1, ..., out}; acts has dims.size() - 1 entries. Weights are
/// He-uniform in [-sqrt(6 / fan_in), sqrt(6 / fan_in)], biases zero.
Mlp init_mlp(const std::vector<int>& dims, const std::vector<Activation>& acts,
             std::mt19937_64& rng);
Mlp init_mlp(const std::vector<int>& dims, const std::vector<Activation>& acts,
             std::uint64_t seed);

struct MlpCache {
  std::vector<Eigen::MatrixXd> inputs;  // input of each layer
  std::vector<Eigen::MatrixXd> outputs;  // activated output of each layer
  std::uint64_t version = 0;
  const Mlp* net = nullptr;
};

/// Output batch; fills `cache` for a later backward call when given.
Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& input, MlpCache* cache = nullptr);

struct MlpGrads {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;

  static MlpGrads zeros_like(const Mlp& net);
  bool all_finite() const;
};

/// Gradients of sum(dout .* output) with respect to the parameters (written
/// to `grads`) and the input (returned). UsageError on a stale cache.
Eigen::MatrixXd backward(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& dout,
                         MlpGrads& grads);

/// Input gradient only; skips the parameter gradients.
Eigen::MatrixXd backward_input(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& dout);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long step = 0;
  MlpGrads m;
  MlpGrads v;

  static AdamState for_net(const Mlp& net, double lr);
};

/// Bias-corrected Adam descent step. DivergenceError on non-finite gradients.
void adam_update(AdamState& state, Mlp& net, const MlpGrads& grads);

/// target <- tau * source + (1 - tau) * target.
void soft_update(Mlp& target, const Mlp& source, double tau);

/// Flattened parameter distance.
double param_distance(const Mlp& a, const Mlp& b);

// Critic Q(obs, action): a two-layer state branch and a one-layer action
// branch, concatenated and followed by two hidden layers and a scalar output.
struct Critic {
  Mlp state;
  Mlp action;
  Mlp merge;

  std::uint64_t version() const { return state.version + action.version + merge.version; }
  bool congruent(const Critic& other) const;
};

Critic init_critic(int obs_dim, int action_dim, int hidden, std::mt19937_64& rng);

struct CriticCache {
  MlpCache state;
  MlpCache action;
  MlpCache merge;
  int state_width = 0;
};

Eigen::MatrixXd critic_forward(const Critic& critic, const Eigen::MatrixXd& obs,
                               const Eigen::MatrixXd& action, CriticCache* cache = nullptr);

struct CriticGrads {
  MlpGrads state;
  MlpGrads action;
  MlpGrads merge;
  Eigen::MatrixXd d_obs;
  Eigen::MatrixXd d_action;

  bool all_finite() const;
};

/// Parameter and input gradients of sum(dout .* Q).
CriticGrads critic_backward(const Critic& critic, const CriticCache& cache,
                            const Eigen::MatrixXd& dout);

/// d sum(dout .* Q) / d action, without parameter gradients.
Eigen::MatrixXd critic_action_gradient(const Critic& critic, const CriticCache& cache,
                                       const Eigen::MatrixXd& dout);

struct CriticAdam {
  AdamState state;
  AdamState action;
  AdamState merge;

  static CriticAdam for_critic(const Critic& critic, double lr);
};

void adam_update(CriticAdam& opt, Critic& critic, const CriticGrads& grads);
void soft_update(Critic& target, const Critic& source, double tau);
double param_distance(const Critic& a, const Critic& b);

/// Largest relative error between the analytic parameter gradient of a
/// scalar loss and central differences with step h. The relative error of a
/// pair (a, n) is |a - n| / max(|a|, |n|, floor).
struct GradCheck {
  double max_rel_error = 0.0;
  int checked = 0;
};

GradCheck check_gradients(Mlp& net, const std::function<double()>& loss,
                          const MlpGrads& analytic, double h = 1e-5, double floor = 1e-6);

void save_mlp(std::ostream& os, const Mlp& net);
Mlp load_mlp(std::istream& is);
void save_critic(std::ostream& os, const Critic& critic);
Critic load_critic(std::istream& is);

}  // namespace hybridopt::nn

#endif  // HYBRIDOPT_NN_MLP_HPP
