#include "fsorf/agent_actor_critic.hpp"

#include <cmath>
#include <stdexcept>

namespace fsorf {

std::vector<std::string> ActorCriticConfig::validate() const {
  std::vector<std::string> errs;
  if (!(actor_lr > 0.0)) errs.push_back("ac.actor_lr must be positive");
  if (!(critic_lr > 0.0)) errs.push_back("ac.critic_lr must be positive");
  if (!(discount >= 0.0 && discount < 1.0))
    errs.push_back("ac.discount must lie in [0, 1)");
  for (const auto& e : net.validate()) errs.push_back(e);
  return errs;
}

namespace {

MlpSpec with_dims(MlpSpec spec, int input_dim, int output_dim) {
  spec.input_dim = input_dim;
  spec.output_dim = output_dim;
  return spec;
}

}  // namespace

ActorCriticAgent::ActorCriticAgent(ActorCriticConfig cfg, int state_dim,
                                   Rng& init_rng)
    : cfg_(std::move(cfg)),
      actor_(with_dims(cfg_.net, state_dim, kNumLinks), init_rng),
      critic_(with_dims(cfg_.net, state_dim, 1), init_rng) {
  ActorCriticConfig check = cfg_;
  check.net = with_dims(cfg_.net, state_dim, kNumLinks);
  const auto errs = check.validate();
  if (!errs.empty()) {
    std::string msg = "invalid agent configuration:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
}

double ActorCriticAgent::td_error(double reward, double v_next, double v_now,
                                  double discount) {
  return reward + discount * v_next - v_now;
}

std::vector<double> ActorCriticAgent::policy(const Observation& obs) const {
  const auto logits = actor_.forward_one(obs.flatten());
  std::vector<float> v(logits.data(), logits.data() + logits.size());
  return softmax<float>(v);
}

LinkId ActorCriticAgent::act(const Observation& obs, Rng& rng) {
  const auto p = policy(obs);
  return rng.uniform() < p[0] ? LinkId::kFso : LinkId::kRf;
}

std::pair<double, double> ActorCriticAgent::update(const Observation& state,
                                                   LinkId action, int reward,
                                                   const Observation& next_state) {
  using Matrix = Mlp<float>::Matrix;
  const auto flat = state.flatten();
  Matrix in(static_cast<int>(flat.size()), 1);
  for (std::size_t i = 0; i < flat.size(); ++i) in(static_cast<int>(i), 0) = flat[i];

  // Critic: regress v(state) toward the bootstrapped return; the target is
  // treated as constant, so dL/dv of (target - v)^2 is -2 * delta.
  const auto critic_pass = critic_.forward(in);
  const double v_now = critic_pass.output()(0, 0);
  const double v_next = critic_.forward_one(next_state.flatten())(0);
  const double delta = td_error(reward, v_next, v_now, cfg_.discount);
  Matrix dv(1, 1);
  dv(0, 0) = static_cast<float>(-2.0 * delta);
  critic_.adam_step(critic_.backward(critic_pass, dv), cfg_.critic_lr);

  // Actor: ascend delta * grad log pi(action). With a softmax head the logit
  // gradient of log pi(a) is onehot(a) - pi, and sgd_step descends, so the
  // handed-over gradient carries the sign flip.
  const auto actor_pass = actor_.forward(in);
  const auto& logits = actor_pass.output();
  std::vector<float> lv(logits.data(), logits.data() + logits.size());
  const auto pi = softmax<float>(lv);
  const int a = static_cast<int>(action);
  Matrix dlogits(kNumLinks, 1);
  for (int i = 0; i < kNumLinks; ++i) {
    const double onehot = i == a ? 1.0 : 0.0;
    dlogits(i, 0) = static_cast<float>(-delta * (onehot - pi[i]));
  }
  actor_.sgd_step(actor_.backward(actor_pass, dlogits), cfg_.actor_lr);

  const double critic_loss = delta * delta;
  const double actor_loss = -delta * std::log(std::max(pi[a], 1e-12));
  ep_critic_sum_ += critic_loss;
  ep_actor_sum_ += actor_loss;
  ++ep_updates_;
  losses_.push_back(critic_loss);
  return {critic_loss, actor_loss};
}

void ActorCriticAgent::on_transition(const Observation& state, LinkId action,
                                     int reward, const Observation& next_state,
                                     Rng& rng) {
  (void)rng;
  update(state, action, reward, next_state);
}

EpisodeStats ActorCriticAgent::drain_episode_stats() {
  EpisodeStats st;
  st.updates = ep_updates_;
  if (ep_updates_ > 0) {
    st.mean_loss = ep_critic_sum_ / ep_updates_;
    st.actor_loss = ep_actor_sum_ / ep_updates_;
  }
  ep_critic_sum_ = 0.0;
  ep_actor_sum_ = 0.0;
  ep_updates_ = 0;
  return st;
}

}  // namespace fsorf
