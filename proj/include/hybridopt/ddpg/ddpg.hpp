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

#ifndef HYBRIDOPT_DDPG_DDPG_HPP
#define HYBRIDOPT_DDPG_DDPG_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hybridopt/envs/episode.hpp"
#include "hybridopt/nn/mlp.hpp"

// Deep deterministic policy gradient on the benchmark environments.
//
// Actions seen by the networks are normalized: the actor's tanh output a lies
// in [-1, 1]^m and the environment receives u = u_max .* a.
namespace hybridopt::ddpg {

struct Transition {
  Eigen::VectorXd obs;
  Eigen::VectorXd action;  // normalized
  double reward = 0.0;
  Eigen::VectorXd next_obs;
  bool done = false;
};

/// Column-stacked minibatch.
struct Batch {
  Eigen::MatrixXd obs;
  Eigen::MatrixXd action;
  Eigen::RowVectorXd reward;
  Eigen::MatrixXd next_obs;
  Eigen::RowVectorXd done;  // 1.0 on terminal transitions

  Eigen::Index size() const { return obs.cols(); }
};

Batch make_batch(const std::vector<Transition>& transitions);

/// FIFO ring buffer.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Total pushes since construction.
  std::uint64_t insertions() const { return insertions_; }
  /// i-th oldest stored transition.
  const Transition& at(std::size_t i) const;

  /// n indices in [0, size()) drawn uniformly with replacement.
  std::vector<std::size_t> sample_indices(std::size_t n, std::mt19937_64& rng) const;
  /// UsageError when size() < n.
  Batch sample(std::size_t n, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest entry once full
  std::uint64_t insertions_ = 0;
  std::vector<Transition> data_;
};

struct DdpgConfig {
  int episodes = 300;
  double gamma = 1.0;
  double tau = 0.005;
  double lr_actor = 1e-3;
  double lr_critic = 2e-3;
  int batch = 64;
  int capacity = 100000;
  int warmup = 1000;
  /// Exploration std as a fraction of u_max, linear from start to end.
  double sigma_start = 0.5;
  double sigma_end = 0.01;
  int hidden = 64;
  std::uint64_t seed = 0;
  /// Rewards are multiplied by this before entering the buffer, so the
  /// critic learns reward_scale * Q.
  double reward_scale = 0.1;
  /// Number of best evaluated episodes averaged into the reported cost.
  int best_k = 10;

  void validate() const;
  /// Noise fraction for a 0-based episode index.
  double sigma(int episode) const;
};

struct Networks {
  nn::Mlp actor;
  nn::Mlp actor_target;
  nn::Critic critic;
  nn::Critic critic_target;
  nn::AdamState actor_opt;
  nn::CriticAdam critic_opt;
};

/// Actor obs -> hidden -> hidden -> m (tanh); critic as in nn::init_critic.
/// Targets start as copies.
Networks make_networks(int obs_dim, int action_dim, const DdpgConfig& cfg, std::mt19937_64& rng);

/// y = r + gamma (1 - done) Q'(s', mu'(s')), target networks only.
Eigen::RowVectorXd critic_target(const Batch& batch, double gamma, const nn::Mlp& target_actor,
                                 const nn::Critic& target_critic);

/// Mean of Q(s, mu(s)) over the batch.
double actor_objective(const nn::Mlp& actor, const nn::Critic& critic, const Eigen::MatrixXd& obs);

/// Gradient of -actor_objective with respect to the actor parameters.
nn::MlpGrads actor_gradient(const nn::Mlp& actor, const nn::Critic& critic,
                            const Eigen::MatrixXd& obs);

struct UpdateStats {
  double critic_loss = 0.0;
  /// Mean Q(s, mu(s)) before the actor step.
  double actor_objective = 0.0;
};

/// Critic MSE step, actor ascent step, then soft target updates.
UpdateStats update_on_batch(Networks& nets, const Batch& batch, const DdpgConfig& cfg);
UpdateStats update_step(Networks& nets, const ReplayBuffer& buffer, const DdpgConfig& cfg,
                        std::mt19937_64& rng);

/// Mean squared (Q(s, a) - r - gamma (1 - done) Q(s', mu(s'))) with the
/// online networks.
double bellman_residual(const Networks& nets, const Batch& batch, double gamma);

/// a + N(0, sigma^2 I), clamped to [-1, 1].
Eigen::VectorXd explore(const Eigen::VectorXd& a, double sigma, std::mt19937_64& rng);

/// u = u_max .* mu(obs).
ControlVector act(const nn::Mlp& actor, const envs::EnvConfig& env, const Eigen::VectorXd& obs);

struct Evaluation {
  sim::Trajectory trajectory;
  double cost = 0.0;
  /// Transitions of the greedy episode, for on-policy diagnostics.
  std::vector<Transition> transitions;
};

Evaluation evaluate(const nn::Mlp& actor, const envs::EnvConfig& env);

struct LearningCurve {
  std::vector<double> eval_cost;
  std::vector<double> train_return;
  /// Mean critic loss over the episode's updates (NaN before warmup ends).
  std::vector<double> critic_loss;
  /// Bellman residual on the greedy episode after training on it.
  std::vector<double> bellman_residual;

  std::size_t size() const { return eval_cost.size(); }
};

/// Mean of the k smallest entries.
double best_k_mean(const std::vector<double>& costs, int k);

struct TrainResult {
  Networks nets;
  nn::Mlp best_actor;
  int best_episode = -1;
  LearningCurve curve;
  /// best_k_mean of the evaluated costs.
  double cost = 0.0;
};

using EpisodeCallback = std::function<void(int episode, const LearningCurve&)>;

TrainResult train(const envs::EnvConfig& env, const DdpgConfig& cfg,
                  const EpisodeCallback& on_episode = {});

/// |Q(o0, mu(o0)) / reward_scale + J| / J at the initial observation, J from
/// evaluate.
double value_consistency(const Networks& nets, const envs::EnvConfig& env,
                         double reward_scale);

/// Columns episode, eval_cost, train_return, critic_loss.
void write_learning_curve_csv(std::ostream& os, const LearningCurve& curve);

}  // namespace hybridopt::ddpg

#endif  // HYBRIDOPT_DDPG_DDPG_HPP
