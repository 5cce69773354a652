#pragma once

#include <span>
#include <vector>

#include "fsorf/agent_dqn.hpp"

namespace fsorf {

struct EnsembleConfig {
  int m_workers = 10;       // independent batch evaluators
  double alpha = 0.5;       // sync when consensus drops to or below this
  int batch_size = 32;      // transitions per worker probe
  enum class Mode { kMin, kMean } mode = Mode::kMin;

  std::vector<std::string> validate() const;
};

// Cosine similarity between two feature vectors, clamped to [-1, 1].
// Degenerate norms resolve by convention: both zero compare equal (1),
// exactly one zero compares orthogonal (0). Bitwise-equal inputs return
// exactly 1 so that agreement detection is immune to rounding.
double feature_similarity(std::span<const float> a, std::span<const float> b);

// Mean cosine similarity between the two networks' penultimate-layer
// features over a batch of states (columns).
double avg_similarity(const Eigen::MatrixXf& states, const Mlp<float>& a,
                      const Mlp<float>& b);

// Folds per-worker scores into one consensus value: the minimum (default,
// most conservative) or the mean.
double consensus(std::span<const double> worker_scores, EnsembleConfig::Mode mode);

// Outcome of one consensus evaluation.
struct ConsensusReport {
  bool evaluated = false;            // false when the buffer was too short
  std::vector<double> worker_scores; // per-worker batch similarity
  double consensus = 1.0;
  bool synced = false;
};

// Value-based switching agent whose target-network syncs are gated on
// ensemble disagreement instead of a fixed period: M workers each probe an
// independent replay batch, the worker scores fold into a consensus, and the
// target follows the online network only when consensus falls to alpha or
// below. Checked once per episode.
class EnsembleDqnAgent final : public DqnAgent {
 public:
  // worker_seed_base separates the workers' sampling streams from the main
  // training stream; worker i draws from derive_seed(worker_seed_base, i).
  EnsembleDqnAgent(DqnConfig dqn_cfg, EnsembleConfig ens_cfg, int state_dim,
                   Rng& init_rng, std::uint64_t worker_seed_base);

  // Evaluates consensus and syncs if it has decayed. No-op (evaluated =
  // false) until the buffer holds a batch for every worker.
  ConsensusReport maybe_sync_consensus();

  void on_episode_end(Rng& rng) override;
  std::string kind() const override { return "dqn_ensemble"; }

  const EnsembleConfig& ensemble_config() const { return ens_cfg_; }

  // One report per evaluation since the last drain, episode-ordered.
  std::vector<ConsensusReport> drain_consensus_log();

 private:
  EnsembleConfig ens_cfg_;
  std::vector<Rng> worker_rngs_;
  std::vector<ConsensusReport> consensus_log_;
  // Scratch reused across evaluations.
  Eigen::MatrixXf probe_states_, probe_next_;
  std::vector<int> probe_actions_, probe_rewards_;
};

}  // namespace fsorf
