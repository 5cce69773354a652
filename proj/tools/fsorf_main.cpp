#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "fsorf/csv.hpp"
#include "fsorf/harness.hpp"

using namespace fsorf;

namespace {

std::string trimmed(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

// Options shared by the experiment-driving subcommands. Flag overrides are
// funneled into the same key-value store the config file fills, so every
// setting passes through one validation path.
struct CommonOpts {
  std::string config;
  std::vector<std::string> sets;
  std::string out_dir;
  std::uint64_t seed = 0;
  long episodes = 0;
  bool timings = false;

  CLI::Option* out_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* episodes_opt = nullptr;
  CLI::Option* timings_opt = nullptr;

  void attach(CLI::App* sub, bool with_episodes) {
    sub->add_option("-c,--config", config, "key = value configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--set", sets,
                    "override one configuration key (key=value; repeatable)");
    out_opt = sub->add_option("-o,--out-dir", out_dir,
                              "directory the CSV files are written to");
    seed_opt = sub->add_option("-s,--seed", seed, "master random seed");
    if (with_episodes)
      episodes_opt = sub->add_option("-e,--episodes", episodes,
                                     "number of training episodes");
    timings_opt = sub->add_flag("--timings", timings,
                                "also write per-episode wall-clock sidecars");
  }

  KeyValueConfig to_kv() const {
    KeyValueConfig kv = config.empty() ? KeyValueConfig()
                                       : KeyValueConfig::parse_file(config);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + s + "'");
      const std::string key = trimmed(s.substr(0, eq));
      if (key.empty()) throw ConfigError("--set expects key=value, got '" + s + "'");
      kv.set(key, trimmed(s.substr(eq + 1)));
    }
    if (out_opt->count()) kv.set("out_dir", out_dir);
    if (seed_opt->count()) kv.set("seed", std::to_string(seed));
    if (episodes_opt && episodes_opt->count())
      kv.set("episodes", std::to_string(episodes));
    if (timings_opt->count()) kv.set("write_timings", "true");
    return kv;
  }
};

// Collects everything wrong with the assembled configuration: typo'd keys,
// unparseable values, out-of-range fields.
std::vector<std::string> config_problems(const KeyValueConfig& kv,
                                         bool experiment, bool forecast) {
  std::vector<std::string> problems;
  for (const auto& k : kv.unknown_keys(known_config_keys()))
    problems.push_back("unknown key '" + k + "'");
  if (experiment) {
    try {
      for (const auto& e : ExperimentConfig::from_config(kv).validate())
        problems.push_back(e);
    } catch (const ConfigError& e) {
      problems.push_back(e.what());
    }
  }
  if (forecast) {
    try {
      for (const auto& e : ForecastExperimentConfig::from_config(kv).validate())
        problems.push_back(e);
    } catch (const ConfigError& e) {
      problems.push_back(e.what());
    }
  }
  return problems;
}

int report_problems(const std::string& origin,
                    const std::vector<std::string>& problems) {
  std::cerr << origin << ": invalid configuration:\n";
  for (const auto& p : problems) std::cerr << "  " << p << '\n';
  return 1;
}

void print_summary(const CompareRow& row, const std::string& out_dir) {
  std::cout << row.agent << " seed=" << row.seed
            << ": final_reward=" << csv::fmt(row.final_reward)
            << " oracle=" << csv::fmt(row.final_oracle)
            << " switches=" << row.switch_cost
            << " episodes_to_90pct=" << row.episodes_to_90pct_oracle
            << " -> " << out_dir << "/run_" << row.agent << "_" << row.seed
            << ".csv\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Hybrid optical/radio link-switching laboratory: atmospheric channel "
      "simulation, switching agents, and received-power forecasting."};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress progress output");

  CommonOpts run_opts;
  std::string run_agent;
  CLI::App* run_cmd = app.add_subcommand(
      "run", "Train one agent and write its per-episode CSV files");
  run_opts.attach(run_cmd, true);
  CLI::Option* agent_opt = run_cmd->add_option(
      "-a,--agent", run_agent,
      "agent kind: myopic, actor_critic, dqn, dqn_ensemble");

  CommonOpts cmp_opts;
  CLI::App* cmp_cmd = app.add_subcommand(
      "compare",
      "Train every agent kind on one shared setting and write compare.csv");
  cmp_opts.attach(cmp_cmd, true);

  CommonOpts fc_opts;
  CLI::App* fc_cmd = app.add_subcommand(
      "forecast",
      "Fit and score the received-power predictor across the visibility grid");
  fc_opts.attach(fc_cmd, false);

  std::string plots_in = "out";
  std::string plots_out;
  CLI::App* plots_cmd = app.add_subcommand(
      "export-plots", "Re-shape run and forecast CSVs into tidy plot data");
  plots_cmd->add_option("--in", plots_in, "directory holding the CSVs to export");
  plots_cmd->add_option("--out", plots_out,
                        "destination directory (default: <in>/plots)");

  std::string validate_path;
  CLI::App* validate_cmd = app.add_subcommand(
      "validate-config", "Parse a configuration file and report every problem");
  validate_cmd->add_option("config_file", validate_path, "file to check")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (validate_cmd->parsed()) {
      const auto kv = KeyValueConfig::parse_file(validate_path);
      const auto problems = config_problems(kv, true, true);
      if (!problems.empty()) return report_problems(validate_path, problems);
      std::cout << validate_path << " is valid\n";
      return 0;
    }

    if (run_cmd->parsed()) {
      auto kv = run_opts.to_kv();
      if (agent_opt->count()) kv.set("agent", run_agent);
      const auto problems = config_problems(kv, true, false);
      if (!problems.empty()) return report_problems("run", problems);
      const auto cfg = ExperimentConfig::from_config(kv);
      try {
        const RunRecord rec = run_and_write(cfg);
        if (!quiet) print_summary(summarize(rec), cfg.out_dir);
        return 0;
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
      }
    }

    if (cmp_cmd->parsed()) {
      const auto kv = cmp_opts.to_kv();
      const auto problems = config_problems(kv, true, false);
      if (!problems.empty()) return report_problems("compare", problems);
      const auto base = ExperimentConfig::from_config(kv);
      std::vector<ExperimentConfig> cfgs;
      for (const std::string kind :
           {"myopic", "actor_critic", "dqn", "dqn_ensemble"}) {
        cfgs.push_back(base);
        cfgs.back().agent = kind;
      }
      try {
        const auto rows = compare_runs(cfgs);
        if (!quiet)
          for (const auto& row : rows) print_summary(row, base.out_dir);
        return 0;
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
      }
    }

    if (fc_cmd->parsed()) {
      const auto kv = fc_opts.to_kv();
      const auto problems = config_problems(kv, false, true);
      if (!problems.empty()) return report_problems("forecast", problems);
      const auto cfg = ForecastExperimentConfig::from_config(kv);
      try {
        const auto cells = run_forecast_experiment(cfg);
        write_forecast_csvs(cfg, cells);
        if (!quiet) {
          for (double v : cfg.visibilities_km) {
            double sum = 0.0;
            long count = 0;
            for (const auto& c : cells) {
              if (c.visibility_km != v || c.report.mae_by_horizon.empty())
                continue;
              sum += c.report.mae_by_horizon.front();
              ++count;
            }
            std::cout << "visibility " << csv::fmt(v) << " km: mean one-step MAE "
                      << csv::fmt(count ? sum / count : 0.0) << " dBm over "
                      << count << " seeds\n";
          }
          std::cout << "-> " << cfg.out_dir << "/mae_by_horizon.csv, "
                    << cfg.out_dir << "/ae_cdf.csv\n";
        }
        return 0;
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
      }
    }

    // export-plots
    try {
      const std::string dest =
          plots_cmd->get_option("--out")->count() ? plots_out : plots_in + "/plots";
      const auto written = export_plots(plots_in, dest);
      if (!quiet)
        for (const auto& path : written) std::cout << "wrote " << path << '\n';
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
