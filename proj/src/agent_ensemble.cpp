#include "fsorf/agent_ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace fsorf {

std::vector<std::string> EnsembleConfig::validate() const {
  std::vector<std::string> errs;
  if (m_workers < 1) errs.push_back("ensemble.m_workers must be at least 1");
  if (!(alpha >= -1.0 && alpha <= 1.0))
    errs.push_back("ensemble.alpha must lie in [-1, 1]");
  if (batch_size < 1) errs.push_back("ensemble.batch_size must be at least 1");
  return errs;
}

double feature_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("feature_similarity: length mismatch");
  if (a.empty()) throw std::invalid_argument("feature_similarity: empty vectors");
  // Bitwise-equal features are in agreement by definition; this keeps the
  // post-sync similarity at exactly 1 regardless of rounding.
  if (std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0) return 1.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  const bool a_zero = na == 0.0, b_zero = nb == 0.0;
  if (a_zero && b_zero) return 1.0;
  if (a_zero || b_zero) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double avg_similarity(const Eigen::MatrixXf& states, const Mlp<float>& a,
                      const Mlp<float>& b) {
  if (states.cols() < 1) throw std::invalid_argument("avg_similarity: empty batch");
  const auto pa = a.forward(states);
  const auto pb = b.forward(states);
  const auto& fa = pa.features();
  const auto& fb = pb.features();
  double sum = 0.0;
  for (Eigen::Index c = 0; c < states.cols(); ++c) {
    sum += feature_similarity(
        std::span<const float>(fa.col(c).data(), static_cast<std::size_t>(fa.rows())),
        std::span<const float>(fb.col(c).data(), static_cast<std::size_t>(fb.rows())));
  }
  return sum / static_cast<double>(states.cols());
}

double consensus(std::span<const double> worker_scores, EnsembleConfig::Mode mode) {
  if (worker_scores.empty())
    throw std::invalid_argument("consensus of zero workers");
  if (mode == EnsembleConfig::Mode::kMin)
    return *std::min_element(worker_scores.begin(), worker_scores.end());
  return std::accumulate(worker_scores.begin(), worker_scores.end(), 0.0) /
         static_cast<double>(worker_scores.size());
}

namespace {

DqnConfig consensus_gated(DqnConfig cfg) {
  // The fixed-period sync rule is replaced wholesale by the consensus gate.
  cfg.sync_period = 0;
  return cfg;
}

}  // namespace

EnsembleDqnAgent::EnsembleDqnAgent(DqnConfig dqn_cfg, EnsembleConfig ens_cfg,
                                   int state_dim, Rng& init_rng,
                                   std::uint64_t worker_seed_base)
    : DqnAgent(consensus_gated(std::move(dqn_cfg)), state_dim, init_rng),
      ens_cfg_(ens_cfg) {
  const auto errs = ens_cfg_.validate();
  if (!errs.empty()) {
    std::string msg = "invalid agent configuration:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  worker_rngs_.reserve(ens_cfg_.m_workers);
  for (int i = 0; i < ens_cfg_.m_workers; ++i)
    worker_rngs_.emplace_back(derive_seed(worker_seed_base, static_cast<std::uint64_t>(i)));
}

ConsensusReport EnsembleDqnAgent::maybe_sync_consensus() {
  ConsensusReport report;
  const std::size_t needed = static_cast<std::size_t>(ens_cfg_.m_workers) *
                             static_cast<std::size_t>(ens_cfg_.batch_size);
  if (buffer_.size() < needed) {
    consensus_log_.push_back(report);
    return report;
  }
  report.evaluated = true;
  report.worker_scores.reserve(ens_cfg_.m_workers);
  for (int i = 0; i < ens_cfg_.m_workers; ++i) {
    buffer_.sample(ens_cfg_.batch_size, worker_rngs_[i], probe_states_,
                   probe_actions_, probe_rewards_, probe_next_);
    report.worker_scores.push_back(avg_similarity(probe_states_, q_, target_));
  }
  report.consensus = consensus(report.worker_scores, ens_cfg_.mode);
  if (report.consensus <= ens_cfg_.alpha) {
    sync_target_now();
    report.synced = true;
  }
  consensus_log_.push_back(report);
  return report;
}

void EnsembleDqnAgent::on_episode_end(Rng& rng) {
  (void)rng;
  maybe_sync_consensus();
}

std::vector<ConsensusReport> EnsembleDqnAgent::drain_consensus_log() {
  return std::exchange(consensus_log_, {});
}

}  // namespace fsorf
