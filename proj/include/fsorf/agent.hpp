#pragma once

#include <string>

#include "fsorf/environment.hpp"
#include "fsorf/rng.hpp"

namespace fsorf {

// Training diagnostics drained once per episode by the harness. Fields a
// given agent does not produce stay at zero.
struct EpisodeStats {
  double mean_loss = 0.0;    // mean value-loss over the episode's updates
  double actor_loss = 0.0;   // policy-gradient surrogate, where applicable
  long updates = 0;          // learning updates contributing to the means
};

// A link-selection policy driven by the environment loop. All agents are
// deterministic functions of (construction seed, Rng stream handed in), so
// whole training runs replay exactly.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual LinkId act(const Observation& obs, Rng& rng) = 0;

  // Invoked once per environment step with the transition just taken.
  virtual void on_transition(const Observation& state, LinkId action,
                             int reward, const Observation& next_state,
                             Rng& rng) = 0;

  // Invoked after the terminal step of each episode.
  virtual void on_episode_end(Rng& rng) { (void)rng; }

  // Returns and clears the stats accumulated since the last drain.
  virtual EpisodeStats drain_episode_stats() = 0;

  // Cumulative count of deployed-policy changes, agent-specific semantics:
  // per-slot link changes for rule-based policies, target-network
  // synchronizations for the learned ones.
  virtual long policy_switch_count() const = 0;

  virtual std::string kind() const = 0;
};

}  // namespace fsorf
