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

#include "hybridopt/ddpg/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace hybridopt::ddpg {

namespace {

Eigen::VectorXd action_scale(const envs::EnvConfig& env) {
  const auto& b = env.system.bounds();
  if ((b.lower + b.upper).cwiseAbs().maxCoeff() > 0.0 || (b.upper.array() <= 0.0).any()) {
    throw InvalidInput("ddpg: control bounds must be symmetric and nonzero");
  }
  return b.upper;
}

}  // namespace

Batch make_batch(const std::vector<Transition>& transitions) {
  if (transitions.empty()) throw InvalidInput("make_batch: no transitions");
  const auto n = static_cast<Eigen::Index>(transitions.size());
  const Eigen::Index d = transitions.front().obs.size();
  const Eigen::Index m = transitions.front().action.size();
  Batch b;
  b.obs.resize(d, n);
  b.next_obs.resize(d, n);
  b.action.resize(m, n);
  b.reward.resize(n);
  b.done.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = transitions[static_cast<std::size_t>(i)];
    b.obs.col(i) = t.obs;
    b.next_obs.col(i) = t.next_obs;
    b.action.col(i) = t.action;
    b.reward[i] = t.reward;
    b.done[i] = t.done ? 1.0 : 0.0;
  }
  return b;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidInput("ReplayBuffer: capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity, 1 << 20));
}

void ReplayBuffer::push(Transition t) {
  if (!std::isfinite(t.reward) || !t.obs.allFinite() || !t.next_obs.allFinite() ||
      !t.action.allFinite()) {
    throw InvalidInput("ReplayBuffer::push: non-finite transition");
  }
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
  ++insertions_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw InvalidInput("ReplayBuffer::at: index out of range");
  return data_[(head_ + i) % data_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, std::mt19937_64& rng) const {
  if (data_.size() < n || data_.empty()) {
    throw UsageError("ReplayBuffer::sample: buffer holds " + std::to_string(data_.size()) +
                     " transitions, " + std::to_string(n) + " requested");
  }
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

Batch ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
  const auto idx = sample_indices(n, rng);
  const Transition& first = data_[idx.front()];
  const auto cols = static_cast<Eigen::Index>(n);
  Batch b;
  b.obs.resize(first.obs.size(), cols);
  b.next_obs.resize(first.obs.size(), cols);
  b.action.resize(first.action.size(), cols);
  b.reward.resize(cols);
  b.done.resize(cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    const Transition& t = data_[idx[static_cast<std::size_t>(c)]];
    b.obs.col(c) = t.obs;
    b.next_obs.col(c) = t.next_obs;
    b.action.col(c) = t.action;
    b.reward[c] = t.reward;
    b.done[c] = t.done ? 1.0 : 0.0;
  }
  return b;
}

void DdpgConfig::validate() const {
  if (episodes < 1) throw InvalidInput("DdpgConfig: episodes must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInput("DdpgConfig: gamma must lie in [0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidInput("DdpgConfig: tau must lie in (0, 1]");
  if (!(lr_actor > 0.0) || !(lr_critic > 0.0)) {
    throw InvalidInput("DdpgConfig: learning rates must be positive");
  }
  if (batch < 1 || capacity < batch) throw InvalidInput("DdpgConfig: need 1 <= batch <= capacity");
  if (warmup < 0) throw InvalidInput("DdpgConfig: negative warmup");
  if (!(sigma_start >= 0.0) || !(sigma_end >= 0.0)) {
    throw InvalidInput("DdpgConfig: noise levels must be non-negative");
  }
  if (hidden < 1) throw InvalidInput("DdpgConfig: hidden width must be positive");
  if (!(reward_scale > 0.0)) throw InvalidInput("DdpgConfig: reward_scale must be positive");
  if (best_k < 1) throw InvalidInput("DdpgConfig: best_k must be positive");
}

double DdpgConfig::sigma(int episode) const {
  if (episodes <= 1) return sigma_start;
  const double p = std::clamp(static_cast<double>(episode) / (episodes - 1), 0.0, 1.0);
  return sigma_start + (sigma_end - sigma_start) * p;
}

Networks make_networks(int obs_dim, int action_dim, const DdpgConfig& cfg, std::mt19937_64& rng) {
  using A = nn::Activation;
  Networks n;
  n.actor = nn::init_mlp({obs_dim, cfg.hidden, cfg.hidden, action_dim},
                         {A::kRelu, A::kRelu, A::kTanh}, rng);
  n.critic = nn::init_critic(obs_dim, action_dim, cfg.hidden, rng);
  n.actor_target = n.actor;
  n.critic_target = n.critic;
  n.actor_opt = nn::AdamState::for_net(n.actor, cfg.lr_actor);
  n.critic_opt = nn::CriticAdam::for_critic(n.critic, cfg.lr_critic);
  return n;
}

Eigen::RowVectorXd critic_target(const Batch& batch, double gamma, const nn::Mlp& target_actor,
                                 const nn::Critic& target_critic) {
  const Eigen::MatrixXd next_a = nn::forward(target_actor, batch.next_obs);
  const Eigen::MatrixXd q = nn::critic_forward(target_critic, batch.next_obs, next_a);
  Eigen::RowVectorXd y = batch.reward;
  // Skip the bootstrap where it is masked so a non-finite Q' cannot leak in.
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (gamma != 0.0 && batch.done[i] == 0.0) y[i] += gamma * q(0, i);
  }
  return y;
}

double actor_objective(const nn::Mlp& actor, const nn::Critic& critic,
                       const Eigen::MatrixXd& obs) {
  return nn::critic_forward(critic, obs, nn::forward(actor, obs)).mean();
}

namespace {

// Gradient of -mean Q(s, mu(s)); also reports the objective before the step.
nn::MlpGrads actor_gradient_impl(const nn::Mlp& actor, const nn::Critic& critic,
                                 const Eigen::MatrixXd& obs, double* objective) {
  nn::MlpCache acache;
  const Eigen::MatrixXd a = nn::forward(actor, obs, &acache);
  nn::CriticCache ccache;
  const Eigen::MatrixXd q = nn::critic_forward(critic, obs, a, &ccache);
  if (objective) *objective = q.mean();
  const double inv_n = 1.0 / static_cast<double>(obs.cols());
  const Eigen::MatrixXd da =
      nn::critic_action_gradient(critic, ccache, Eigen::MatrixXd::Constant(1, q.cols(), -inv_n));
  nn::MlpGrads g;
  nn::backward(actor, acache, da, g);
  return g;
}

}  // namespace

nn::MlpGrads actor_gradient(const nn::Mlp& actor, const nn::Critic& critic,
                            const Eigen::MatrixXd& obs) {
  return actor_gradient_impl(actor, critic, obs, nullptr);
}

UpdateStats update_on_batch(Networks& nets, const Batch& batch, const DdpgConfig& cfg) {
  UpdateStats stats;
  const Eigen::RowVectorXd y = critic_target(batch, cfg.gamma, nets.actor_target,
                                             nets.critic_target);
  nn::CriticCache cache;
  const Eigen::MatrixXd q = nn::critic_forward(nets.critic, batch.obs, batch.action, &cache);
  const Eigen::RowVectorXd err = q.row(0) - y;
  const double n = static_cast<double>(batch.size());
  stats.critic_loss = err.squaredNorm() / n;
  if (!std::isfinite(stats.critic_loss)) throw DivergenceError("ddpg: non-finite critic loss");
  const nn::CriticGrads cg = nn::critic_backward(nets.critic, cache, (2.0 / n) * err);
  nn::adam_update(nets.critic_opt, nets.critic, cg);

  // Actor step against the freshly updated critic.
  const nn::MlpGrads ag =
      actor_gradient_impl(nets.actor, nets.critic, batch.obs, &stats.actor_objective);
  nn::adam_update(nets.actor_opt, nets.actor, ag);

  nn::soft_update(nets.actor_target, nets.actor, cfg.tau);
  nn::soft_update(nets.critic_target, nets.critic, cfg.tau);
  return stats;
}

UpdateStats update_step(Networks& nets, const ReplayBuffer& buffer, const DdpgConfig& cfg,
                        std::mt19937_64& rng) {
  const auto need = static_cast<std::size_t>(std::max(cfg.batch, cfg.warmup));
  if (buffer.size() < need) throw UsageError("update_step: buffer is below warmup");
  return update_on_batch(nets, buffer.sample(static_cast<std::size_t>(cfg.batch), rng), cfg);
}

double bellman_residual(const Networks& nets, const Batch& batch, double gamma) {
  const Eigen::RowVectorXd y = critic_target(batch, gamma, nets.actor, nets.critic);
  const Eigen::MatrixXd q = nn::critic_forward(nets.critic, batch.obs, batch.action);
  return (q.row(0) - y).squaredNorm() / static_cast<double>(batch.size());
}

Eigen::VectorXd explore(const Eigen::VectorXd& a, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd out = a;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(out[i] + sigma * normal(rng), -1.0, 1.0);
  }
  return out;
}

ControlVector act(const nn::Mlp& actor, const envs::EnvConfig& env, const Eigen::VectorXd& obs) {
  const Eigen::VectorXd a = nn::forward(actor, obs);
  return (a.array() * action_scale(env).array()).matrix();
}

Evaluation evaluate(const nn::Mlp& actor, const envs::EnvConfig& env) {
  const Eigen::VectorXd scale = action_scale(env);
  if (actor.output_dim() != scale.size()) throw InvalidInput("evaluate: actor output dimension");
  envs::Episode episode(env);
  Eigen::VectorXd obs = episode.reset();
  if (actor.input_dim() != obs.size()) throw InvalidInput("evaluate: actor input dimension");
  Evaluation ev;
  ev.transitions.reserve(static_cast<std::size_t>(episode.horizon()));
  while (!episode.done()) {
    const Eigen::VectorXd a = nn::forward(actor, obs);
    const ControlVector u = (a.array() * scale.array()).matrix();
    auto out = episode.step(u);
    ev.transitions.push_back({obs, a, out.reward, out.observation, out.done});
    obs = std::move(out.observation);
  }
  ev.trajectory = episode.trajectory();
  ev.cost = ev.trajectory.total_cost;
  return ev;
}

double best_k_mean(const std::vector<double>& costs, int k) {
  if (costs.empty() || k < 1) throw InvalidInput("best_k_mean: empty input");
  std::vector<double> sorted = costs;
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), sorted.size());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(take),
                    sorted.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < take; ++i) sum += sorted[i];
  return sum / static_cast<double>(take);
}

TrainResult train(const envs::EnvConfig& env, const DdpgConfig& cfg,
                  const EpisodeCallback& on_episode) {
  cfg.validate();
  const Eigen::VectorXd scale = action_scale(env);
  const int obs_dim = static_cast<int>(envs::observe(env, env.x0, 0.0).size());
  const int act_dim = static_cast<int>(scale.size());
  std::mt19937_64 rng(cfg.seed);
  TrainResult res;
  res.nets = make_networks(obs_dim, act_dim, cfg, rng);
  Networks& nets = res.nets;
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.capacity));
  const auto ready = static_cast<std::size_t>(std::max(cfg.batch, cfg.warmup));
  double best = std::numeric_limits<double>::infinity();

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const double sigma = cfg.sigma(ep);
    envs::Episode episode(env);
    Eigen::VectorXd obs = episode.reset();
    double ret = 0.0;
    double loss_sum = 0.0;
    int updates = 0;
    while (!episode.done()) {
      const Eigen::VectorXd a = explore(nn::forward(nets.actor, obs), sigma, rng);
      const ControlVector u = (a.array() * scale.array()).matrix();
      const int step = episode.step_index();
      auto out = episode.step(u);
      ret += out.reward;
      buffer.push({obs, a, cfg.reward_scale * out.reward, out.observation, out.done});
      obs = std::move(out.observation);
      if (buffer.size() >= ready) {
        try {
          const UpdateStats s = update_step(nets, buffer, cfg, rng);
          loss_sum += s.critic_loss;
          ++updates;
        } catch (const DivergenceError& e) {
          throw DivergenceError(e.what(), ep, step);
        }
      }
    }
    Evaluation ev = evaluate(nets.actor, env);
    res.curve.eval_cost.push_back(ev.cost);
    res.curve.train_return.push_back(ret);
    res.curve.critic_loss.push_back(updates > 0 ? loss_sum / updates
                                                : std::numeric_limits<double>::quiet_NaN());
    Batch held_out = make_batch(ev.transitions);
    held_out.reward *= cfg.reward_scale;
    res.curve.bellman_residual.push_back(bellman_residual(nets, held_out, cfg.gamma));
    if (ev.cost < best) {
      best = ev.cost;
      res.best_actor = nets.actor;
      res.best_episode = ep;
    }
    if (on_episode) on_episode(ep, res.curve);
  }
  res.cost = best_k_mean(res.curve.eval_cost, cfg.best_k);
  return res;
}

double value_consistency(const Networks& nets, const envs::EnvConfig& env,
                         double reward_scale) {
  const Eigen::VectorXd o0 = envs::observe(env, env.x0, 0.0);
  const Eigen::MatrixXd a0 = nn::forward(nets.actor, o0);
  const double q0 = nn::critic_forward(nets.critic, o0, a0)(0, 0);
  const double j = evaluate(nets.actor, env).cost;
  return std::abs(q0 / reward_scale + j) / j;
}

void write_learning_curve_csv(std::ostream& os, const LearningCurve& curve) {
  os << "episode,eval_cost,train_return,critic_loss\n";
  os.precision(10);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    os << i + 1 << ',' << curve.eval_cost[i] << ',' << curve.train_return[i] << ','
       << curve.critic_loss[i] << '\n';
  }
}

}  // namespace hybridopt::ddpg
