#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsorf/harness.hpp"

using namespace fsorf;
namespace fs = std::filesystem;

namespace {

// Desk-size run: tiny windows and networks so a whole training loop takes
// milliseconds while still exercising every code path.
ExperimentConfig small_cfg(const std::string& agent, std::uint64_t seed,
                           const std::string& out_dir) {
  ExperimentConfig c;
  c.agent = agent;
  c.episodes = 3;
  c.seed = seed;
  c.out_dir = out_dir;
  c.env.window_len = 6;
  c.env.episode_len = 40;
  c.dqn.net.hidden_dims = {16};
  c.dqn.replay_capacity = 2000;
  c.dqn.batch_size = 8;
  c.dqn.warmup_transitions = 30;
  c.dqn.sync_period = 10;
  c.dqn.temp_decay_steps = 200;
  c.ensemble.m_workers = 3;
  c.ensemble.batch_size = 8;
  c.ensemble.alpha = 0.99;
  c.ac.net.hidden_dims = {16};
  return c;
}

std::string fresh_dir(const std::string& name) {
  const std::string dir = "harness_test/" + name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool rows_match(const EpisodeRow& a, const EpisodeRow& b) {
  // wall_ms is timing noise by design; everything else must replay exactly.
  return a.episode == b.episode && a.mean_loss == b.mean_loss &&
         a.actor_loss == b.actor_loss && a.total_reward == b.total_reward &&
         a.normalized_reward == b.normalized_reward &&
         a.oracle_reward == b.oracle_reward &&
         a.switch_count_cum == b.switch_count_cum;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("switching cost counts adjacent changes") {
  CHECK(switching_cost({}) == 0);
  const std::vector<std::int8_t> one = {1};
  CHECK(switching_cost(one) == 0);
  const std::vector<std::int8_t> flat = {0, 0, 0, 0};
  CHECK(switching_cost(flat) == 0);
  std::vector<std::int8_t> alternating;
  for (int i = 0; i < 17; ++i) alternating.push_back(i % 2);
  CHECK(switching_cost(alternating) == 16);
  const std::vector<std::int8_t> mixed = {0, 1, 1, 0, 0, 0, 1};
  CHECK(switching_cost(mixed) == 3);
}

TEST_CASE("round-robin baseline switches every slot within episodes") {
  auto cfg = small_cfg("myopic", 11, "unused");
  cfg.episodes = 5;
  cfg.env.episode_len = 50;
  const RunRecord rec = run_experiment(cfg);
  REQUIRE(rec.episodes.size() == 5);
  // 49 in-episode changes per 50-slot episode; boundaries don't count.
  for (std::size_t i = 0; i < rec.episodes.size(); ++i)
    CHECK(rec.episodes[i].switch_count_cum == static_cast<long>((i + 1) * 49));
  // Recount from the raw per-slot trace, episode by episode: an independent
  // code path over the same events must land on the same totals.
  long recount = 0;
  const std::span<const std::int8_t> trace(rec.link_trace);
  for (int ep = 0; ep < 5; ++ep)
    recount += switching_cost(trace.subspan(static_cast<std::size_t>(ep) * 50, 50));
  CHECK(recount == rec.episodes.back().switch_count_cum);
  CHECK(rec.loss_history.empty());
  CHECK(rec.consensus.empty());
}

TEST_CASE("a one-episode run yields exactly one row") {
  auto cfg = small_cfg("myopic", 1, "unused");
  cfg.episodes = 1;
  const RunRecord rec = run_experiment(cfg);
  CHECK(rec.episodes.size() == 1);
  CHECK(rec.link_trace.size() == 40);
}

TEST_CASE("per-episode aggregates respect their ranges") {
  const RunRecord rec = run_experiment(small_cfg("dqn", 3, "unused"));
  long prev_switches = 0;
  for (const auto& row : rec.episodes) {
    CHECK(row.normalized_reward >= -1.0);
    CHECK(row.normalized_reward <= 1.0);
    CHECK(row.oracle_reward >= row.normalized_reward);
    CHECK(row.switch_count_cum >= prev_switches);
    prev_switches = row.switch_count_cum;
  }
}

TEST_CASE("value-agent switch count recounts from the update log") {
  const auto cfg = small_cfg("dqn", 7, "unused");
  const RunRecord rec = run_experiment(cfg);
  CHECK_FALSE(rec.loss_history.empty());
  const long learn_steps = static_cast<long>(rec.loss_history.size());
  CHECK(rec.episodes.back().switch_count_cum ==
        learn_steps / cfg.dqn.sync_period);
}

TEST_CASE("consensus-gated run logs one report per episode and recounts") {
  const RunRecord rec = run_experiment(small_cfg("dqn_ensemble", 5, "unused"));
  REQUIRE(rec.consensus.size() == rec.episodes.size());
  long synced = 0;
  bool any_evaluated = false;
  for (const auto& r : rec.consensus) {
    if (r.evaluated) any_evaluated = true;
    if (r.synced) ++synced;
  }
  CHECK(any_evaluated);  // 3 workers x batch 8 fit inside one 40-slot episode
  CHECK(synced == rec.episodes.back().switch_count_cum);
}

TEST_CASE("runs replay byte-identically and extend as exact prefixes") {
  const auto dir1 = fresh_dir("det1");
  const auto dir2 = fresh_dir("det2");
  auto cfg = small_cfg("dqn_ensemble", 9, dir1);
  const RunRecord first = run_and_write(cfg);
  cfg.out_dir = dir2;
  const RunRecord second = run_and_write(cfg);
  for (const std::string name :
       {"run_dqn_ensemble_9.csv", "transitions_dqn_ensemble_9.csv",
        "consensus_dqn_ensemble_9.csv"}) {
    CAPTURE(name);
    const std::string bytes = slurp(dir1 + "/" + name);
    CHECK(bytes == slurp(dir2 + "/" + name));
    CHECK_FALSE(bytes.empty());
  }

  // Same seed, more episodes: the longer run must begin with the shorter
  // one, slot for slot and update for update.
  auto longer_cfg = small_cfg("dqn_ensemble", 9, dir2);
  longer_cfg.episodes = 5;
  const RunRecord longer = run_experiment(longer_cfg);
  REQUIRE(longer.episodes.size() == 5);
  for (std::size_t i = 0; i < first.episodes.size(); ++i) {
    CAPTURE(i);
    CHECK(rows_match(first.episodes[i], longer.episodes[i]));
  }
  CHECK(std::equal(first.link_trace.begin(), first.link_trace.end(),
                   longer.link_trace.begin()));
  CHECK(std::equal(first.loss_history.begin(), first.loss_history.end(),
                   longer.loss_history.begin()));
}

TEST_CASE("run files land in the output directory per agent capability") {
  const auto dir = fresh_dir("files");
  auto cfg = small_cfg("myopic", 2, dir);
  cfg.write_timings = true;
  run_and_write(cfg);
  CHECK(fs::exists(dir + "/run_myopic_2.csv"));
  CHECK(fs::exists(dir + "/timings_myopic_2.csv"));
  CHECK_FALSE(fs::exists(dir + "/consensus_myopic_2.csv"));
  // No learning updates: the transition-error file is header-only.
  CHECK(read_csv(dir + "/transitions_myopic_2.csv").size() == 1);

  auto ac_cfg = small_cfg("actor_critic", 2, dir);
  run_and_write(ac_cfg);
  CHECK_FALSE(fs::exists(dir + "/timings_actor_critic_2.csv"));
  const auto transitions = read_csv(dir + "/transitions_actor_critic_2.csv");
  // 120 online updates -> 100 "first" rows plus 100 "last" rows.
  CHECK(transitions.size() == 201);
  CHECK(transitions[1][0] == "first");
  CHECK(transitions.back()[0] == "last");
  CHECK(transitions.back()[1] == "119");
}

TEST_CASE("summary condenses the tail and the time-to-threshold") {
  RunRecord rec;
  rec.agent = "synthetic";
  rec.seed = 4;
  for (int i = 0; i < 60; ++i) {
    EpisodeRow row;
    row.episode = i;
    row.normalized_reward = i < 30 ? 0.5 : 1.0;
    row.oracle_reward = 1.0;
    row.switch_count_cum = i;
    rec.episodes.push_back(row);
  }
  const CompareRow row = summarize(rec);
  CHECK(row.agent == "synthetic");
  CHECK(row.final_reward == doctest::Approx(0.8));  // (20 * 0.5 + 30 * 1) / 50
  CHECK(row.final_oracle == doctest::Approx(1.0));
  CHECK(row.switch_cost == 59);
  // Trailing-20 mean first reaches 0.9 once 16 of the window's episodes sit
  // at 1.0, i.e. at episode index 45.
  CHECK(row.episodes_to_90pct_oracle == 46);

  for (auto& e : rec.episodes) e.normalized_reward = 0.5;
  CHECK(summarize(rec).episodes_to_90pct_oracle == -1);
  rec.episodes.clear();
  CHECK_THROWS_AS(summarize(rec), std::invalid_argument);
}

TEST_CASE("comparison runs share a setting and produce one row each") {
  const auto dir = fresh_dir("compare");
  std::vector<ExperimentConfig> cfgs = {small_cfg("myopic", 6, dir),
                                        small_cfg("dqn", 6, dir)};
  const auto rows = compare_runs(cfgs);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].agent == "myopic");
  CHECK(rows[1].agent == "dqn");
  const auto table = read_csv(dir + "/compare.csv");
  REQUIRE(table.size() == 3);
  CHECK(table[0][0] == "agent");
  CHECK(table[1][0] == "myopic");
  CHECK(table[2][0] == "dqn");

  // The same configuration twice gives two identical rows.
  std::vector<ExperimentConfig> twice = {small_cfg("myopic", 6, dir),
                                         small_cfg("myopic", 6, dir)};
  const auto dup = compare_runs(twice);
  CHECK(dup[0].final_reward == dup[1].final_reward);
  CHECK(dup[0].switch_cost == dup[1].switch_cost);
  CHECK(dup[0].episodes_to_90pct_oracle == dup[1].episodes_to_90pct_oracle);

  auto mismatched = cfgs;
  mismatched[1].seed = 7;
  CHECK_THROWS_AS(compare_runs(mismatched), std::invalid_argument);
  mismatched = cfgs;
  mismatched[1].env.episode_len = 41;
  CHECK_THROWS_AS(compare_runs(mismatched), std::invalid_argument);
  CHECK_THROWS_AS(compare_runs({}), std::invalid_argument);
}

TEST_CASE("invalid configurations are rejected before any work") {
  auto cfg = small_cfg("nobody", 1, "unused");
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  auto bad = small_cfg("dqn", 1, "unused");
  bad.episodes = 0;
  CHECK_THROWS_AS(run_experiment(bad), std::invalid_argument);
}

TEST_CASE("forecast study produces one scored cell per visibility and seed") {
  ForecastExperimentConfig cfg;
  cfg.model.window = 4;
  cfg.model.max_horizon = 3;
  cfg.model.hidden = {8};
  cfg.model.epochs = 3;
  cfg.model.batch_size = 8;
  cfg.visibilities_km = {10.0, 5.0};
  cfg.seeds = 2;
  cfg.trace_slots = 150;
  cfg.regime_transition = 0.05;
  cfg.out_dir = fresh_dir("forecast");

  const auto cells = run_forecast_experiment(cfg);
  REQUIRE(cells.size() == 4);
  CHECK(cells[0].visibility_km == 10.0);
  CHECK(cells[0].seed == 1);
  CHECK(cells[3].visibility_km == 5.0);
  CHECK(cells[3].seed == 2);
  for (const auto& c : cells) {
    REQUIRE(c.report.mae_by_horizon.size() == 3);
    for (double mae : c.report.mae_by_horizon) CHECK(mae >= 0.0);
  }

  write_forecast_csvs(cfg, cells);
  const auto mae = read_csv(cfg.out_dir + "/mae_by_horizon.csv");
  CHECK(mae.size() == 1 + 4 * 3);
  const auto cdf = read_csv(cfg.out_dir + "/ae_cdf.csv");
  REQUIRE(cdf.size() == 1 + 2 * 100);
  // Within each visibility the distribution function never decreases.
  for (std::size_t i = 2; i < cdf.size(); ++i) {
    if (cdf[i][0] != cdf[i - 1][0]) continue;
    CHECK(std::stod(cdf[i][2]) >= std::stod(cdf[i - 1][2]));
  }
  CHECK(std::stod(cdf.back()[2]) <= 1.0);
}

TEST_CASE("plot export tidies run and forecast files") {
  const auto dir = fresh_dir("plots_in");
  const auto out = fresh_dir("plots_out");
  std::vector<ExperimentConfig> cfgs = {small_cfg("myopic", 8, dir),
                                        small_cfg("actor_critic", 8, dir),
                                        small_cfg("dqn", 8, dir)};
  compare_runs(cfgs);

  const auto written = export_plots(dir, out);
  CHECK(written.size() == 3);  // loss, reward, switch cost; no forecast inputs
  const auto loss = read_csv(out + "/plot_loss_vs_episode.csv");
  CHECK(loss.size() == 1 + 3 * 3);  // three runs of three episodes
  const auto switches = read_csv(out + "/plot_switch_cost_vs_episodes.csv");
  std::set<std::string> series;
  for (std::size_t i = 1; i < switches.size(); ++i) series.insert(switches[i][0]);
  CHECK(series == std::set<std::string>{"myopic", "actor_critic", "dqn"});

  // Forecast inputs present: the two error-table plots appear as well.
  ForecastExperimentConfig fcfg;
  fcfg.model.window = 4;
  fcfg.model.max_horizon = 2;
  fcfg.model.hidden = {8};
  fcfg.model.epochs = 2;
  fcfg.model.batch_size = 8;
  fcfg.visibilities_km = {10.0};
  fcfg.seeds = 2;
  fcfg.trace_slots = 120;
  fcfg.out_dir = dir;
  write_forecast_csvs(fcfg, run_forecast_experiment(fcfg));
  const auto all = export_plots(dir, out);
  CHECK(all.size() == 5);
  const auto mae_plot = read_csv(out + "/plot_mae_vs_horizon.csv");
  REQUIRE(mae_plot.size() == 3);  // one averaged row per horizon
  CHECK(mae_plot[1][1] == "1");
  CHECK(mae_plot[2][1] == "2");

  const auto empty = fresh_dir("plots_empty");
  CHECK_THROWS_AS(export_plots(empty, out), std::runtime_error);
  CHECK_THROWS_AS(export_plots(empty + "/missing", out), std::runtime_error);
}

TEST_CASE("csv loader round-trips our dialect including empty cells") {
  const auto dir = fresh_dir("csvload");
  {
    std::ofstream out(dir + "/t.csv", std::ios::binary);
    out << "a,b,c\n1,,\n,2,3\n";
  }
  const auto rows = read_csv(dir + "/t.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"a", "b", "c"});
  CHECK(rows[1] == std::vector<std::string>{"1", "", ""});
  CHECK(rows[2] == std::vector<std::string>{"", "2", "3"});
  CHECK_THROWS_AS(read_csv(dir + "/absent.csv"), std::runtime_error);
}

}  // TEST_SUITE
