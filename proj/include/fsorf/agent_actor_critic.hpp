#pragma once

#include <utility>

#include "fsorf/agent.hpp"
#include "fsorf/neural.hpp"

namespace fsorf {

struct ActorCriticConfig {
  MlpSpec net;  // trunk shape shared by both networks; heads differ
  double actor_lr = 0.01;    // plain gradient ascent on the policy
  double critic_lr = 1e-4;   // Adam on the value regression
  double discount = 0.9;

  std::vector<std::string> validate() const;
};

// Online policy-gradient agent: a softmax actor over the two links and a
// scalar critic, both updated from every transition as it happens (no replay,
// no target copies). The policy changes continuously, so there are no
// discrete deployment events to count.
class ActorCriticAgent : public Agent {
 public:
  ActorCriticAgent(ActorCriticConfig cfg, int state_dim, Rng& init_rng);

  // One-step temporal-difference residual:
  //   delta = reward + discount * v_next - v_now
  static double td_error(double reward, double v_next, double v_now,
                         double discount);

  LinkId act(const Observation& obs, Rng& rng) override;
  void on_transition(const Observation& state, LinkId action, int reward,
                     const Observation& next_state, Rng& rng) override;
  EpisodeStats drain_episode_stats() override;
  long policy_switch_count() const override { return 0; }
  std::string kind() const override { return "actor_critic"; }

  // Applies one critic regression step (loss delta^2) and one actor ascent
  // step along delta * grad log pi(action). Returns (critic loss, actor
  // surrogate loss).
  std::pair<double, double> update(const Observation& state, LinkId action,
                                   int reward, const Observation& next_state);

  Mlp<float>& actor() { return actor_; }
  const Mlp<float>& actor() const { return actor_; }
  Mlp<float>& critic() { return critic_; }
  const Mlp<float>& critic() const { return critic_; }

  // Current action distribution of the policy in a given state.
  std::vector<double> policy(const Observation& obs) const;

  // Every update's critic loss, in order, for the error-trajectory report.
  const std::vector<double>& loss_history() const { return losses_; }

 private:
  ActorCriticConfig cfg_;
  Mlp<float> actor_;
  Mlp<float> critic_;
  double ep_critic_sum_ = 0.0;
  double ep_actor_sum_ = 0.0;
  long ep_updates_ = 0;
  std::vector<double> losses_;
};

}  // namespace fsorf
