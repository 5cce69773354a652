#pragma once

#include <array>
#include <optional>

#include "fsorf/agent.hpp"

namespace fsorf {

// Belief over the four link-availability indicators
// [optical ready, radio switching, radio ready, optical switching].
// Each link's (ready, switching) pair is complementary, so the pairs sum to
// one by construction.
struct Belief {
  double fso_ready = 0.5;
  double rf_ready = 0.5;

  std::array<double, 4> components() const {
    return {fso_ready, 1.0 - rf_ready, rf_ready, 1.0 - fso_ready};
  }
};

struct MyopicConfig {
  // Per-slot probability that a link's availability flips state; drives the
  // belief propagation between observations.
  double flip_p = 0.5;

  std::vector<std::string> validate() const {
    if (!(flip_p >= 0.0 && flip_p <= 1.0))
      return {"myopic.flip_p must lie in [0, 1]"};
    return {};
  }
};

// One-step lookahead policy: tracks per-link readiness beliefs with exact
// Bayesian filtering on a two-state flip chain and always rides the link it
// currently believes readier. Ties alternate away from the previous choice,
// which at flip_p = 0.5 degenerates to strict round-robin.
class MyopicAgent final : public Agent {
 public:
  explicit MyopicAgent(MyopicConfig cfg);

  // Propagates one slot of flip dynamics, then conditions on the observed
  // outcome of the selected link (+1 ready, -1 not ready).
  static Belief update(Belief b, LinkId selected, int reward, double flip_p);

  // Argmax over readiness; prev breaks exact ties by alternation.
  static LinkId select(const Belief& b, std::optional<LinkId> prev);

  LinkId act(const Observation& obs, Rng& rng) override;
  void on_transition(const Observation& state, LinkId action, int reward,
                     const Observation& next_state, Rng& rng) override;
  void on_episode_end(Rng& rng) override;
  EpisodeStats drain_episode_stats() override { return {}; }
  long policy_switch_count() const override { return switch_count_; }
  std::string kind() const override { return "myopic"; }

  const Belief& belief() const { return belief_; }

 private:
  MyopicConfig cfg_;
  Belief belief_;
  std::optional<LinkId> prev_;
  long switch_count_ = 0;
};

}  // namespace fsorf
