#include "fsorf/agent_dqn.hpp"

#include <cmath>
#include <stdexcept>

namespace fsorf {

std::vector<std::string> DqnConfig::validate() const {
  std::vector<std::string> errs;
  if (batch_size < 1) errs.push_back("dqn.batch_size must be at least 1");
  if (replay_capacity < static_cast<std::size_t>(std::max(batch_size, 1)))
    errs.push_back("dqn.replay_capacity must hold at least one batch");
  if (!(learning_rate > 0.0)) errs.push_back("dqn.learning_rate must be positive");
  if (!(discount >= 0.0 && discount < 1.0))
    errs.push_back("dqn.discount must lie in [0, 1)");
  if (sync_period < 0) errs.push_back("dqn.sync_period must be non-negative");
  if (learn_every < 1) errs.push_back("dqn.learn_every must be at least 1");
  if (!(temp_start >= temp_end)) errs.push_back("dqn.temp_start must be >= dqn.temp_end");
  if (!(temp_end > 0.0)) errs.push_back("dqn.temp_end must be positive");
  if (temp_decay_steps < 1) errs.push_back("dqn.temp_decay_steps must be at least 1");
  for (const auto& e : net.validate()) errs.push_back(e);
  return errs;
}

void q_update_tabular(Eigen::MatrixXd& q, int s, int a, double r, int s_next,
                      double alpha, double discount) {
  if (s < 0 || s >= q.rows() || s_next < 0 || s_next >= q.rows())
    throw std::out_of_range("tabular update: state outside table");
  if (a < 0 || a >= q.cols())
    throw std::out_of_range("tabular update: action outside table");
  const double bootstrap = r + discount * q.row(s_next).maxCoeff();
  q(s, a) += alpha * (bootstrap - q(s, a));
}

DqnAgent::DqnAgent(DqnConfig cfg, int state_dim, Rng& init_rng)
    : cfg_([&] {
        cfg.net.input_dim = state_dim;
        cfg.net.output_dim = kNumLinks;
        return cfg;
      }()),
      q_(cfg_.net, init_rng),
      target_(cfg_.net, init_rng),
      buffer_(cfg_.replay_capacity, state_dim) {
  const auto errs = cfg_.validate();
  if (!errs.empty()) {
    std::string msg = "invalid agent configuration:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
}

double DqnAgent::temperature() const {
  const double frac =
      std::min(1.0, static_cast<double>(env_steps_) /
                        static_cast<double>(cfg_.temp_decay_steps));
  return cfg_.temp_start *
         std::pow(cfg_.temp_end / cfg_.temp_start, frac);
}

LinkId DqnAgent::act(const Observation& obs, Rng& rng) {
  const auto flat = obs.flatten();
  const auto qvals = q_.forward_one(flat);
  std::vector<float> v(qvals.data(), qvals.data() + qvals.size());
  return static_cast<LinkId>(boltzmann_sample<float>(v, temperature(), rng));
}

void DqnAgent::on_transition(const Observation& state, LinkId action,
                             int reward, const Observation& next_state,
                             Rng& rng) {
  buffer_.push(state.raw(), static_cast<int>(action), reward, next_state.raw());
  ++env_steps_;
  if (buffer_.size() >= cfg_.warmup_transitions &&
      buffer_.can_sample(cfg_.batch_size) &&
      env_steps_ % cfg_.learn_every == 0) {
    learn_step(rng);
    maybe_sync();
  }
}

double DqnAgent::learn_step(Rng& rng) {
  buffer_.sample(cfg_.batch_size, rng, batch_states_, batch_actions_,
                 batch_rewards_, batch_next_);
  const auto target_pass = target_.forward(batch_next_);
  const int b = cfg_.batch_size;
  Eigen::MatrixXf target = Eigen::MatrixXf::Zero(kNumLinks, b);
  Eigen::MatrixXf mask = Eigen::MatrixXf::Zero(kNumLinks, b);
  for (int c = 0; c < b; ++c) {
    const float bootstrap = target_pass.output().col(c).maxCoeff();
    const float y = static_cast<float>(batch_rewards_[c]) +
                    static_cast<float>(cfg_.discount) * bootstrap;
    target(batch_actions_[c], c) = y;
    mask(batch_actions_[c], c) = 1.0f;
  }
  const auto pass = q_.forward(batch_states_);
  const auto [loss, grads] = q_.backward_mse(pass, target, mask);
  q_.adam_step(grads, cfg_.learning_rate);
  ++learn_steps_;
  losses_.push_back(loss);
  ep_loss_sum_ += loss;
  ++ep_updates_;
  return loss;
}

bool DqnAgent::maybe_sync() {
  // Idempotent between learn steps: a boundary fires exactly once.
  if (cfg_.sync_period > 0 && learn_steps_ > 0 &&
      learn_steps_ % cfg_.sync_period == 0 && last_sync_at_ != learn_steps_) {
    sync_target_now();
    return true;
  }
  return false;
}

void DqnAgent::sync_target_now() {
  target_.copy_weights_from(q_);
  ++switch_count_;
  last_sync_at_ = learn_steps_;
}

EpisodeStats DqnAgent::drain_episode_stats() {
  EpisodeStats st;
  st.updates = ep_updates_;
  st.mean_loss = ep_updates_ > 0 ? ep_loss_sum_ / ep_updates_ : 0.0;
  ep_loss_sum_ = 0.0;
  ep_updates_ = 0;
  return st;
}

}  // namespace fsorf
