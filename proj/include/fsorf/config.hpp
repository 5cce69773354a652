#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsorf/agent_actor_critic.hpp"
#include "fsorf/agent_dqn.hpp"
#include "fsorf/agent_ensemble.hpp"
#include "fsorf/agent_myopic.hpp"
#include "fsorf/environment.hpp"
#include "fsorf/forecast.hpp"

namespace fsorf {

// Raised for unreadable or malformed configuration text, with the offending
// location in the message.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat `key = value` file: one pair per line, '#' starts a comment, blank
// lines ignored. Values keep internal whitespace; keys must be unique.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text,
                                     const std::string& origin = "<config>");

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key,
                                std::vector<int> fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> fallback) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

  // Keys present in the file but absent from the known set; typo guard.
  std::vector<std::string> unknown_keys(std::span<const std::string> known) const;

 private:
  std::map<std::string, std::string> kv_;
};

// Everything one training run needs. Field defaults are the reference
// experiment; a config file overrides selectively.
struct ExperimentConfig {
  std::string agent = "dqn_ensemble";
  long episodes = 600;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  bool write_timings = false;  // opt-in: wall-clock sidecar file

  EnvConfig env;
  WeatherParams weather = WeatherParams::defaults();
  DqnConfig dqn;
  EnsembleConfig ensemble;
  ActorCriticConfig ac;
  MyopicConfig myopic;

  static ExperimentConfig from_config(const KeyValueConfig& kv);
  std::vector<std::string> validate() const;
};

// The forecasting study: a ladder of visibility settings, each fitted and
// scored over a batch of seeds.
struct ForecastExperimentConfig {
  ForecastConfig model;
  std::vector<double> visibilities_km = {30.0, 20.0, 10.0, 5.0, 2.5, 1.5};
  int seeds = 10;
  long trace_slots = 3000;
  double regime_transition = 0.02;
  double rssi_noise_sigma_db = 0.1;
  std::string out_dir = "out";

  static ForecastExperimentConfig from_config(const KeyValueConfig& kv);
  std::vector<std::string> validate() const;
};

// Every key the experiment and forecast configs understand.
std::vector<std::string> known_config_keys();

}  // namespace fsorf
