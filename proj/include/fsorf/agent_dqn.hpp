#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fsorf/agent.hpp"
#include "fsorf/neural.hpp"
#include "fsorf/replay.hpp"

namespace fsorf {

struct DqnConfig {
  MlpSpec net;  // input/output dims are filled in from the environment
  std::size_t replay_capacity = 1000000;
  int batch_size = 32;
  double discount = 0.9;
  double learning_rate = 1e-4;
  long sync_period = 200;  // learn steps between target syncs; 0 disables
  std::size_t warmup_transitions = 1000;
  long learn_every = 1;  // env steps per learning update
  // Exploration temperature decays geometrically from temp_start to temp_end
  // over temp_decay_steps environment steps, then holds.
  double temp_start = 1.0;
  double temp_end = 0.1;
  long temp_decay_steps = 96000;

  std::vector<std::string> validate() const;
};

// One tabular Q-learning backup:
//   q(s,a) += alpha * (r + discount * max_a' q(s',a') - q(s,a))
// The table is states x actions. Shared by tests that pin the neural update
// against an exactly solvable case.
void q_update_tabular(Eigen::MatrixXd& q, int s, int a, double r, int s_next,
                      double alpha, double discount);

// Value-based switching agent: Boltzmann exploration over the online
// network's action values, uniform experience replay, and a hard-synced
// target network providing the bootstrap. Each target sync is a deployed
// policy change, which is what policy_switch_count() reports.
class DqnAgent : public Agent {
 public:
  DqnAgent(DqnConfig cfg, int state_dim, Rng& init_rng);

  LinkId act(const Observation& obs, Rng& rng) override;
  void on_transition(const Observation& state, LinkId action, int reward,
                     const Observation& next_state, Rng& rng) override;
  EpisodeStats drain_episode_stats() override;
  long policy_switch_count() const override { return switch_count_; }
  std::string kind() const override { return "dqn"; }

  // One batch update against the target network; returns the masked batch
  // loss. Callers normally reach this through on_transition.
  double learn_step(Rng& rng);

  // Syncs the target every sync_period learn steps; true when it fired.
  bool maybe_sync();
  void sync_target_now();

  double temperature() const;

  Mlp<float>& q_net() { return q_; }
  const Mlp<float>& q_net() const { return q_; }
  Mlp<float>& target_net() { return target_; }
  const Mlp<float>& target_net() const { return target_; }
  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  long learn_steps() const { return learn_steps_; }
  long env_steps() const { return env_steps_; }
  const DqnConfig& config() const { return cfg_; }

  // Every learning update's loss, in order; the harness slices this for the
  // error-trajectory report.
  const std::vector<double>& loss_history() const { return losses_; }

 protected:
  DqnConfig cfg_;
  Mlp<float> q_;
  Mlp<float> target_;
  ReplayBuffer buffer_;
  long env_steps_ = 0;
  long learn_steps_ = 0;
  long switch_count_ = 0;
  long last_sync_at_ = -1;
  std::vector<double> losses_;
  double ep_loss_sum_ = 0.0;
  long ep_updates_ = 0;

  // Scratch batch storage reused across learn steps.
  Eigen::MatrixXf batch_states_, batch_next_;
  std::vector<int> batch_actions_, batch_rewards_;
};

}  // namespace fsorf
