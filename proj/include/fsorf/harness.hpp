#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fsorf/agent.hpp"
#include "fsorf/agent_ensemble.hpp"
#include "fsorf/config.hpp"
#include "fsorf/forecast.hpp"

namespace fsorf {

// One finished training episode.
struct EpisodeRow {
  long episode = 0;                // 0-based position within the run
  double mean_loss = 0.0;          // mean value loss over the episode's updates
  double actor_loss = 0.0;         // mean policy surrogate (actor_critic only)
  double total_reward = 0.0;       // summed slot rewards
  double normalized_reward = 0.0;  // total_reward / episode_len
  double oracle_reward = 0.0;      // clairvoyant per-slot mean on the same trace
  long switch_count_cum = 0;       // policy switches since the run started
  double wall_ms = 0.0;            // in memory only: run CSVs must be byte-
                                   // reproducible, so timing goes to an
                                   // opt-in sidecar file instead
};

// Full record of one training run.
struct RunRecord {
  std::string agent;
  std::uint64_t seed = 0;
  std::vector<EpisodeRow> episodes;
  std::vector<double> loss_history;        // one entry per learning update
  std::vector<ConsensusReport> consensus;  // one per episode, ensemble runs only
  std::vector<std::int8_t> link_trace;     // selected link per slot, run-ordered
};

// Deployment-change count over an ordered trace: adjacent pairs that differ.
long switching_cost(std::span<const std::int8_t> trace);

// Builds the configured agent kind; state_dim is the flattened observation
// width. Network initialization draws from its own stream derived from
// cfg.seed, so agent and environment randomness never interleave.
std::unique_ptr<Agent> make_agent(const ExperimentConfig& cfg, int state_dim);

// Trains the configured agent for cfg.episodes episodes. A deterministic
// function of cfg: repeating a run reproduces it slot for slot, and a longer
// run with the same seed extends a shorter one as an exact prefix.
RunRecord run_experiment(const ExperimentConfig& cfg);

// run_experiment plus CSV flush into cfg.out_dir (created if missing):
//   run_<agent>_<seed>.csv          per-episode rows
//   transitions_<agent>_<seed>.csv  losses of the first and last 100 updates
//   consensus_<agent>_<seed>.csv    per-episode consensus checks (ensemble)
//   timings_<agent>_<seed>.csv      wall-clock sidecar (cfg.write_timings)
RunRecord run_and_write(const ExperimentConfig& cfg);

// One agent's line in the comparison table.
struct CompareRow {
  std::string agent;
  std::uint64_t seed = 0;
  double final_reward = 0.0;  // mean normalized reward, last 50 episodes
  double final_oracle = 0.0;  // oracle mean over the same window
  long switch_cost = 0;       // cumulative switches over the whole run
  // Episodes consumed until the trailing-20 reward mean first reaches 90% of
  // the trailing-20 oracle mean; -1 when the run never gets there.
  long episodes_to_90pct_oracle = -1;
};

CompareRow summarize(const RunRecord& rec);

// Runs each configuration (all must share environment, weather, and seed so
// the rows are comparable), writes every run's files plus compare.csv into
// the shared out_dir, and returns the table.
std::vector<CompareRow> compare_runs(std::span<const ExperimentConfig> cfgs);

// Forecast study: one fitted predictor per (visibility, seed) cell.
struct ForecastCell {
  double visibility_km = 0.0;
  std::uint64_t seed = 0;
  ForecastReport report;
};

std::vector<ForecastCell> run_forecast_experiment(
    const ForecastExperimentConfig& cfg);

// Writes mae_by_horizon.csv (one row per cell and horizon) and ae_cdf.csv
// (per-visibility error distribution pooled over seeds and horizons) into
// cfg.out_dir.
void write_forecast_csvs(const ForecastExperimentConfig& cfg,
                         std::span<const ForecastCell> cells);

// Re-reads the CSVs under in_dir and emits tidy per-figure files into
// out_dir: loss, reward, and switch-cost curves from run_*.csv; error-vs-
// horizon and error-CDF tables when the forecast files are present. Returns
// the paths written; throws std::runtime_error naming in_dir when it holds
// nothing to export.
std::vector<std::string> export_plots(const std::string& in_dir,
                                      const std::string& out_dir);

// Loads one of our own CSV files: header row first, cells split on commas
// (the dialect never quotes). Throws std::runtime_error with the path on
// unreadable files.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace fsorf
