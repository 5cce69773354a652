#include "fsorf/harness.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "fsorf/csv.hpp"

namespace fsorf {

namespace fs = std::filesystem;

long switching_cost(std::span<const std::int8_t> trace) {
  long count = 0;
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i] != trace[i - 1]) ++count;
  return count;
}

std::unique_ptr<Agent> make_agent(const ExperimentConfig& cfg, int state_dim) {
  Rng init(derive_seed(cfg.seed, 1));
  if (cfg.agent == "myopic") return std::make_unique<MyopicAgent>(cfg.myopic);
  if (cfg.agent == "actor_critic")
    return std::make_unique<ActorCriticAgent>(cfg.ac, state_dim, init);
  if (cfg.agent == "dqn")
    return std::make_unique<DqnAgent>(cfg.dqn, state_dim, init);
  if (cfg.agent == "dqn_ensemble")
    return std::make_unique<EnsembleDqnAgent>(cfg.dqn, cfg.ensemble, state_dim,
                                              init, derive_seed(cfg.seed, 3));
  throw std::invalid_argument("unknown agent kind: " + cfg.agent);
}

RunRecord run_experiment(const ExperimentConfig& cfg) {
  const auto errs = cfg.validate();
  if (!errs.empty()) {
    std::string msg = "invalid experiment configuration:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }

  RunRecord rec;
  rec.agent = cfg.agent;
  rec.seed = cfg.seed;
  rec.episodes.reserve(static_cast<std::size_t>(cfg.episodes));
  rec.link_trace.reserve(static_cast<std::size_t>(cfg.episodes) *
                         static_cast<std::size_t>(cfg.env.episode_len));

  // Separate randomness streams: the environment draws from the seed itself,
  // network initialization and action sampling from derived streams. This
  // keeps a longer run an exact slot-for-slot extension of a shorter one.
  Environment env(cfg.env, cfg.weather, cfg.seed);
  Observation obs(cfg.env.window_len);  // a fresh environment starts blank
  auto agent = make_agent(cfg, obs.flat_dim());
  Rng act_rng(derive_seed(cfg.seed, 2));

  const int slots = cfg.env.episode_len;
  std::vector<double> gammas;
  gammas.reserve(static_cast<std::size_t>(slots));

  for (long ep = 0; ep < cfg.episodes; ++ep) {
    const auto t0 = std::chrono::steady_clock::now();
    if (ep > 0) obs = env.reset();
    gammas.clear();
    double total = 0.0;
    for (int t = 0; t < slots; ++t) {
      const LinkId action = agent->act(obs, act_rng);
      StepResult sr = env.step(action);
      total += sr.reward;
      gammas.push_back(sr.gamma_db_km);
      rec.link_trace.push_back(static_cast<std::int8_t>(action));
      agent->on_transition(obs, action, sr.reward, sr.observation, act_rng);
      obs = std::move(sr.observation);
    }
    agent->on_episode_end(act_rng);

    const EpisodeStats st = agent->drain_episode_stats();
    EpisodeRow row;
    row.episode = ep;
    row.mean_loss = st.mean_loss;
    row.actor_loss = st.actor_loss;
    row.total_reward = total;
    row.normalized_reward = total / static_cast<double>(slots);
    row.oracle_reward = oracle_reward(gammas, cfg.env);
    row.switch_count_cum = agent->policy_switch_count();
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    rec.episodes.push_back(row);
  }

  if (const auto* dqn = dynamic_cast<const DqnAgent*>(agent.get()))
    rec.loss_history = dqn->loss_history();
  if (const auto* ac = dynamic_cast<const ActorCriticAgent*>(agent.get()))
    rec.loss_history = ac->loss_history();
  if (auto* ens = dynamic_cast<EnsembleDqnAgent*>(agent.get()))
    rec.consensus = ens->drain_consensus_log();
  return rec;
}

namespace {

void write_run_csv(const RunRecord& rec, const std::string& path) {
  csv::Writer w(path, {"episode", "mean_loss", "actor_loss", "total_reward",
                       "normalized_reward", "oracle_reward", "switch_count_cum"});
  for (const auto& e : rec.episodes)
    w.row({csv::fmt(e.episode), csv::fmt(e.mean_loss), csv::fmt(e.actor_loss),
           csv::fmt(e.total_reward), csv::fmt(e.normalized_reward),
           csv::fmt(e.oracle_reward), csv::fmt(e.switch_count_cum)});
}

void write_transitions_csv(const RunRecord& rec, const std::string& path) {
  // The error trajectory at both ends of training: the first and the last
  // (up to) 100 learning updates, indexed by global update number.
  csv::Writer w(path, {"phase", "update_index", "loss"});
  const auto& h = rec.loss_history;
  const std::size_t n = h.size();
  const std::size_t k = std::min<std::size_t>(100, n);
  for (std::size_t i = 0; i < k; ++i)
    w.row({"first", csv::fmt(static_cast<long>(i)), csv::fmt(h[i])});
  for (std::size_t i = n - k; i < n; ++i)
    w.row({"last", csv::fmt(static_cast<long>(i)), csv::fmt(h[i])});
}

void write_consensus_csv(const RunRecord& rec, int m_workers,
                         const std::string& path) {
  std::vector<std::string> header = {"episode", "evaluated", "consensus",
                                     "synced"};
  for (int i = 0; i < m_workers; ++i)
    header.push_back("worker_" + std::to_string(i));
  csv::Writer w(path, header);
  for (std::size_t ep = 0; ep < rec.consensus.size(); ++ep) {
    const auto& r = rec.consensus[ep];
    std::vector<std::string> cells = {
        csv::fmt(static_cast<long>(ep)), r.evaluated ? "1" : "0",
        r.evaluated ? csv::fmt(r.consensus) : std::string(),
        r.synced ? "1" : "0"};
    for (int i = 0; i < m_workers; ++i)
      cells.push_back(r.evaluated ? csv::fmt(r.worker_scores[static_cast<std::size_t>(i)])
                                  : std::string());
    w.row(cells);
  }
}

void write_timings_csv(const RunRecord& rec, const std::string& path) {
  csv::Writer w(path, {"episode", "wall_ms"});
  for (const auto& e : rec.episodes)
    w.row({csv::fmt(e.episode), csv::fmt(e.wall_ms)});
}

std::string file_stem(const RunRecord& rec) {
  return rec.agent + "_" + std::to_string(rec.seed);
}

}  // namespace

RunRecord run_and_write(const ExperimentConfig& cfg) {
  RunRecord rec = run_experiment(cfg);
  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  const std::string stem = file_stem(rec);
  write_run_csv(rec, (dir / ("run_" + stem + ".csv")).string());
  write_transitions_csv(rec, (dir / ("transitions_" + stem + ".csv")).string());
  if (rec.agent == "dqn_ensemble")
    write_consensus_csv(rec, cfg.ensemble.m_workers,
                        (dir / ("consensus_" + stem + ".csv")).string());
  if (cfg.write_timings)
    write_timings_csv(rec, (dir / ("timings_" + stem + ".csv")).string());
  return rec;
}

CompareRow summarize(const RunRecord& rec) {
  if (rec.episodes.empty())
    throw std::invalid_argument("summarize: run has no episodes");
  CompareRow row;
  row.agent = rec.agent;
  row.seed = rec.seed;
  const auto& eps = rec.episodes;
  const std::size_t n = eps.size();

  const std::size_t tail = std::min<std::size_t>(50, n);
  double reward_sum = 0.0, oracle_sum = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) {
    reward_sum += eps[i].normalized_reward;
    oracle_sum += eps[i].oracle_reward;
  }
  row.final_reward = reward_sum / static_cast<double>(tail);
  row.final_oracle = oracle_sum / static_cast<double>(tail);
  row.switch_cost = eps.back().switch_count_cum;

  // Rolling 20-episode means; the run "arrives" the first time its reward
  // window reaches 90% of the oracle's.
  const std::size_t window = 20;
  double rw = 0.0, ow = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rw += eps[i].normalized_reward;
    ow += eps[i].oracle_reward;
    if (i >= window) {
      rw -= eps[i - window].normalized_reward;
      ow -= eps[i - window].oracle_reward;
    }
    if (i + 1 >= window && rw >= 0.9 * ow) {
      row.episodes_to_90pct_oracle = static_cast<long>(i + 1);
      break;
    }
  }
  return row;
}

namespace {

bool same_env(const EnvConfig& a, const EnvConfig& b) {
  return a.gamma_low_db_km == b.gamma_low_db_km &&
         a.gamma_high_db_km == b.gamma_high_db_km &&
         a.window_len == b.window_len && a.episode_len == b.episode_len &&
         a.links_per_slot == b.links_per_slot;
}

bool same_weather(const WeatherParams& a, const WeatherParams& b) {
  if (a.lambda_um != b.lambda_um || a.link_distance_km != b.link_distance_km ||
      a.tx_power_dbm != b.tx_power_dbm ||
      a.regime_transition != b.regime_transition ||
      a.rssi_noise_sigma_db != b.rssi_noise_sigma_db ||
      a.regimes.size() != b.regimes.size())
    return false;
  for (std::size_t i = 0; i < a.regimes.size(); ++i)
    if (a.regimes[i].name != b.regimes[i].name ||
        a.regimes[i].concentration_g_m3 != b.regimes[i].concentration_g_m3)
      return false;
  return true;
}

}  // namespace

std::vector<CompareRow> compare_runs(std::span<const ExperimentConfig> cfgs) {
  if (cfgs.empty()) throw std::invalid_argument("compare: no configurations");
  for (const auto& c : cfgs.subspan(1)) {
    if (c.seed != cfgs[0].seed || c.episodes != cfgs[0].episodes ||
        c.out_dir != cfgs[0].out_dir || !same_env(c.env, cfgs[0].env) ||
        !same_weather(c.weather, cfgs[0].weather))
      throw std::invalid_argument(
          "compare: configurations must share environment, weather, seed, "
          "episodes, and out_dir");
  }
  std::vector<CompareRow> rows;
  rows.reserve(cfgs.size());
  for (const auto& c : cfgs) rows.push_back(summarize(run_and_write(c)));

  fs::create_directories(cfgs[0].out_dir);
  csv::Writer w((fs::path(cfgs[0].out_dir) / "compare.csv").string(),
                {"agent", "seed", "final_reward", "final_oracle", "switch_cost",
                 "episodes_to_90pct_oracle"});
  for (const auto& r : rows)
    w.row({r.agent, csv::fmt(r.seed), csv::fmt(r.final_reward),
           csv::fmt(r.final_oracle), csv::fmt(r.switch_cost),
           csv::fmt(r.episodes_to_90pct_oracle)});
  return rows;
}

std::vector<ForecastCell> run_forecast_experiment(
    const ForecastExperimentConfig& cfg) {
  const auto errs = cfg.validate();
  if (!errs.empty()) {
    std::string msg = "invalid forecast configuration:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  std::vector<ForecastCell> cells;
  cells.reserve(cfg.visibilities_km.size() * static_cast<std::size_t>(cfg.seeds));
  for (double v : cfg.visibilities_km) {
    const WeatherParams params =
        forecast_weather(v, cfg.regime_transition, cfg.rssi_noise_sigma_db);
    for (int s = 1; s <= cfg.seeds; ++s) {
      const auto seed = static_cast<std::uint64_t>(s);
      const RssiTrace trace = simulate_rssi_trace(params, cfg.trace_slots, seed);
      const auto series = rssi_series(trace);
      const RssiPredictor predictor = RssiPredictor::fit(series, cfg.model, seed);
      ForecastCell cell;
      cell.visibility_km = v;
      cell.seed = seed;
      cell.report = evaluate_forecast(predictor, series);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

void write_forecast_csvs(const ForecastExperimentConfig& cfg,
                         std::span<const ForecastCell> cells) {
  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  {
    csv::Writer w((dir / "mae_by_horizon.csv").string(),
                  {"visibility_km", "seed", "horizon", "mae"});
    for (const auto& c : cells)
      for (std::size_t h = 0; h < c.report.mae_by_horizon.size(); ++h)
        w.row({csv::fmt(c.visibility_km), csv::fmt(c.seed),
               csv::fmt(static_cast<long>(h + 1)),
               csv::fmt(c.report.mae_by_horizon[h])});
  }
  {
    // Error distribution per visibility, pooled over seeds and horizons.
    std::vector<double> vis_order;
    std::map<double, std::vector<double>> pooled;
    for (const auto& c : cells) {
      if (!pooled.count(c.visibility_km)) vis_order.push_back(c.visibility_km);
      auto errs = c.report.pooled_abs_errors();
      auto& bucket = pooled[c.visibility_km];
      bucket.insert(bucket.end(), errs.begin(), errs.end());
    }
    std::vector<double> thresholds;
    for (int i = 1; i <= 100; ++i) thresholds.push_back(i * 0.05);
    csv::Writer w((dir / "ae_cdf.csv").string(),
                  {"visibility_km", "threshold", "fraction"});
    for (double v : vis_order)
      for (const CdfPoint& p : ae_cdf(pooled[v], thresholds))
        w.row({csv::fmt(v), csv::fmt(p.threshold), csv::fmt(p.fraction)});
  }
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open csv: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    // getline drops a final empty field after a trailing comma; restore it.
    if (line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

namespace {

std::size_t column(const std::vector<std::string>& header,
                   const std::string& name, const std::string& path) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw std::runtime_error(path + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::vector<std::string> export_plots(const std::string& in_dir,
                                      const std::string& out_dir) {
  if (!fs::is_directory(in_dir))
    throw std::runtime_error("export-plots: not a directory: " + in_dir);

  std::vector<std::string> run_files;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.starts_with("run_") && name.ends_with(".csv"))
      run_files.push_back(entry.path().string());
  }
  std::sort(run_files.begin(), run_files.end());

  const fs::path mae_path = fs::path(in_dir) / "mae_by_horizon.csv";
  const fs::path cdf_path = fs::path(in_dir) / "ae_cdf.csv";
  const bool have_mae = fs::exists(mae_path);
  const bool have_cdf = fs::exists(cdf_path);
  if (run_files.empty() && !have_mae && !have_cdf)
    throw std::runtime_error("export-plots: no run_*.csv or forecast CSVs under " +
                             in_dir);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  std::vector<std::string> written;

  if (!run_files.empty()) {
    const std::string loss_path = (out / "plot_loss_vs_episode.csv").string();
    const std::string reward_path = (out / "plot_reward_vs_episode.csv").string();
    const std::string switch_path =
        (out / "plot_switch_cost_vs_episodes.csv").string();
    csv::Writer loss(loss_path,
                     {"agent", "seed", "episode", "mean_loss", "actor_loss"});
    csv::Writer reward(reward_path, {"agent", "seed", "episode",
                                     "normalized_reward", "oracle_reward"});
    csv::Writer switches(switch_path,
                         {"agent", "seed", "episode", "switch_count_cum"});
    for (const auto& file : run_files) {
      // Filenames look like run_<agent>_<seed>.csv; the agent name itself
      // may contain underscores, so the seed is everything after the last.
      const std::string stem = fs::path(file).stem().string();
      const auto cut = stem.rfind('_');
      if (cut == std::string::npos || cut <= 4) continue;
      const std::string agent = stem.substr(4, cut - 4);
      const std::string seed = stem.substr(cut + 1);

      const auto rows = read_csv(file);
      if (rows.size() < 2) continue;
      const auto& header = rows[0];
      const auto ep = column(header, "episode", file);
      const auto ml = column(header, "mean_loss", file);
      const auto al = column(header, "actor_loss", file);
      const auto nr = column(header, "normalized_reward", file);
      const auto orc = column(header, "oracle_reward", file);
      const auto sc = column(header, "switch_count_cum", file);
      for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        loss.row({agent, seed, r[ep], r[ml], r[al]});
        reward.row({agent, seed, r[ep], r[nr], r[orc]});
        switches.row({agent, seed, r[ep], r[sc]});
      }
    }
    written.push_back(loss_path);
    written.push_back(reward_path);
    written.push_back(switch_path);
  }

  if (have_mae) {
    const auto rows = read_csv(mae_path.string());
    const auto& header = rows.at(0);
    const auto vc = column(header, "visibility_km", mae_path.string());
    const auto hc = column(header, "horizon", mae_path.string());
    const auto mc = column(header, "mae", mae_path.string());
    // Mean over seeds for each (visibility, horizon), in file order.
    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::pair<std::string, std::string>, std::pair<double, long>> acc;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto key = std::make_pair(rows[i][vc], rows[i][hc]);
      if (!acc.count(key)) order.push_back(key);
      auto& slot = acc[key];
      slot.first += std::stod(rows[i][mc]);
      slot.second += 1;
    }
    const std::string path = (out / "plot_mae_vs_horizon.csv").string();
    csv::Writer w(path, {"visibility_km", "horizon", "mae_mean"});
    for (const auto& key : order) {
      const auto& slot = acc[key];
      w.row({key.first, key.second,
             csv::fmt(slot.first / static_cast<double>(slot.second))});
    }
    written.push_back(path);
  }

  if (have_cdf) {
    const auto rows = read_csv(cdf_path.string());
    const std::string path = (out / "plot_ae_cdf.csv").string();
    csv::Writer w(path, {"visibility_km", "threshold", "fraction"});
    for (std::size_t i = 1; i < rows.size(); ++i) w.row(rows[i]);
    written.push_back(path);
  }
  return written;
}

}  // namespace fsorf
