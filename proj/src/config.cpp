#include "fsorf/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fsorf {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size())
    throw ConfigError(key + ": '" + v + "' is not a number");
  return d;
}

long parse_long(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  char* end = nullptr;
  const long l = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size())
    throw ConfigError(key + ": '" + v + "' is not an integer");
  return l;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_string(const std::string& text,
                                            const std::string& origin) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (cfg.kv_.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    cfg.kv_[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : parse_double(key, it->second);
}

long KeyValueConfig::get_long(const std::string& key, long fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : parse_long(key, it->second);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key,
                                      std::uint64_t fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const long v = parse_long(key, it->second);
  if (v < 0) throw ConfigError(key + ": must be non-negative");
  return static_cast<std::uint64_t>(v);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string v = trim(it->second);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": '" + v + "' is not a boolean");
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key,
                                              std::vector<int> fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<int> out;
  for (const auto& part : split(it->second, ','))
    out.push_back(static_cast<int>(parse_long(key, part)));
  return out;
}

std::vector<double> KeyValueConfig::get_double_list(
    const std::string& key, std::vector<double> fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<double> out;
  for (const auto& part : split(it->second, ','))
    out.push_back(parse_double(key, part));
  return out;
}

std::vector<std::string> KeyValueConfig::unknown_keys(
    std::span<const std::string> known) const {
  std::vector<std::string> out;
  for (const auto& [key, value] : kv_) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      out.push_back(key);
  }
  return out;
}

namespace {

std::vector<WeatherRegime> parse_regimes(const std::string& key,
                                         const std::string& raw) {
  // Comma-separated name:concentration pairs,
  // e.g. "clear:442423.9, haze:721514.7".
  std::vector<WeatherRegime> out;
  for (const auto& part : split(raw, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos)
      throw ConfigError(key + ": expected name:concentration, got '" + part + "'");
    WeatherRegime r;
    r.name = trim(part.substr(0, colon));
    r.concentration_g_m3 = parse_double(key, part.substr(colon + 1));
    if (r.name.empty()) throw ConfigError(key + ": empty regime name");
    out.push_back(r);
  }
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const KeyValueConfig& kv) {
  ExperimentConfig c;
  c.agent = kv.get_string("agent", c.agent);
  c.episodes = kv.get_long("episodes", c.episodes);
  c.seed = kv.get_u64("seed", c.seed);
  c.out_dir = kv.get_string("out_dir", c.out_dir);
  c.write_timings = kv.get_bool("write_timings", c.write_timings);

  c.env.gamma_low_db_km = kv.get_double("env.gamma_low_db_km", c.env.gamma_low_db_km);
  c.env.gamma_high_db_km = kv.get_double("env.gamma_high_db_km", c.env.gamma_high_db_km);
  c.env.window_len = static_cast<int>(kv.get_long("env.window_len", c.env.window_len));
  c.env.episode_len = static_cast<int>(kv.get_long("env.episode_len", c.env.episode_len));
  c.env.links_per_slot = static_cast<int>(kv.get_long("env.links_per_slot", c.env.links_per_slot));

  c.weather.lambda_um = kv.get_double("weather.lambda_um", c.weather.lambda_um);
  c.weather.link_distance_km =
      kv.get_double("weather.link_distance_km", c.weather.link_distance_km);
  c.weather.tx_power_dbm = kv.get_double("weather.tx_power_dbm", c.weather.tx_power_dbm);
  c.weather.regime_transition =
      kv.get_double("weather.regime_transition", c.weather.regime_transition);
  c.weather.rssi_noise_sigma_db =
      kv.get_double("weather.rssi_noise_sigma_db", c.weather.rssi_noise_sigma_db);
  if (kv.has("weather.regimes"))
    c.weather.regimes =
        parse_regimes("weather.regimes", kv.get_string("weather.regimes", ""));

  c.dqn.net.hidden_dims = kv.get_int_list("dqn.hidden", c.dqn.net.hidden_dims);
  c.dqn.replay_capacity = static_cast<std::size_t>(
      kv.get_long("dqn.replay_capacity", static_cast<long>(c.dqn.replay_capacity)));
  c.dqn.batch_size = static_cast<int>(kv.get_long("dqn.batch_size", c.dqn.batch_size));
  c.dqn.discount = kv.get_double("dqn.discount", c.dqn.discount);
  c.dqn.learning_rate = kv.get_double("dqn.learning_rate", c.dqn.learning_rate);
  c.dqn.sync_period = kv.get_long("dqn.sync_period", c.dqn.sync_period);
  c.dqn.warmup_transitions = static_cast<std::size_t>(kv.get_long(
      "dqn.warmup_transitions", static_cast<long>(c.dqn.warmup_transitions)));
  c.dqn.learn_every = kv.get_long("dqn.learn_every", c.dqn.learn_every);
  c.dqn.temp_start = kv.get_double("dqn.temp_start", c.dqn.temp_start);
  c.dqn.temp_end = kv.get_double("dqn.temp_end", c.dqn.temp_end);
  c.dqn.temp_decay_steps = kv.get_long("dqn.temp_decay_steps", c.dqn.temp_decay_steps);

  c.ensemble.m_workers =
      static_cast<int>(kv.get_long("ensemble.m_workers", c.ensemble.m_workers));
  c.ensemble.alpha = kv.get_double("ensemble.alpha", c.ensemble.alpha);
  c.ensemble.batch_size =
      static_cast<int>(kv.get_long("ensemble.batch_size", c.ensemble.batch_size));
  const std::string mode = kv.get_string("ensemble.consensus", "min");
  if (mode == "min")
    c.ensemble.mode = EnsembleConfig::Mode::kMin;
  else if (mode == "mean")
    c.ensemble.mode = EnsembleConfig::Mode::kMean;
  else
    throw ConfigError("ensemble.consensus: expected 'min' or 'mean', got '" +
                      mode + "'");

  c.ac.net.hidden_dims = kv.get_int_list("ac.hidden", c.ac.net.hidden_dims);
  c.ac.actor_lr = kv.get_double("ac.actor_lr", c.ac.actor_lr);
  c.ac.critic_lr = kv.get_double("ac.critic_lr", c.ac.critic_lr);
  c.ac.discount = kv.get_double("ac.discount", c.ac.discount);

  c.myopic.flip_p = kv.get_double("myopic.flip_p", c.myopic.flip_p);
  return c;
}

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> errs;
  static const std::vector<std::string> kinds = {"myopic", "actor_critic", "dqn",
                                                 "dqn_ensemble"};
  if (std::find(kinds.begin(), kinds.end(), agent) == kinds.end())
    errs.push_back("agent: unknown kind '" + agent +
                   "' (myopic, actor_critic, dqn, dqn_ensemble)");
  if (episodes < 1) errs.push_back("episodes must be at least 1");
  if (out_dir.empty()) errs.push_back("out_dir must not be empty");
  for (const auto& e : env.validate()) errs.push_back(e);
  for (const auto& e : weather.validate()) errs.push_back(e);
  // Net dims are derived from the environment at run time; validate the rest
  // against a plausible placeholder so shape fields never mask real errors.
  DqnConfig d = dqn;
  d.net.input_dim = 2 * std::max(env.window_len, 1);
  d.net.output_dim = kNumLinks;
  for (const auto& e : d.validate()) errs.push_back(e);
  for (const auto& e : ensemble.validate()) errs.push_back(e);
  ActorCriticConfig a = ac;
  a.net.input_dim = d.net.input_dim;
  a.net.output_dim = kNumLinks;
  for (const auto& e : a.validate()) errs.push_back(e);
  for (const auto& e : myopic.validate()) errs.push_back(e);
  return errs;
}

ForecastExperimentConfig ForecastExperimentConfig::from_config(
    const KeyValueConfig& kv) {
  ForecastExperimentConfig c;
  c.model.window = static_cast<int>(kv.get_long("forecast.window", c.model.window));
  c.model.max_horizon =
      static_cast<int>(kv.get_long("forecast.max_horizon", c.model.max_horizon));
  c.model.hidden = kv.get_int_list("forecast.hidden", c.model.hidden);
  c.model.learning_rate =
      kv.get_double("forecast.learning_rate", c.model.learning_rate);
  c.model.epochs = kv.get_long("forecast.epochs", c.model.epochs);
  c.model.batch_size =
      static_cast<int>(kv.get_long("forecast.batch_size", c.model.batch_size));
  c.model.train_fraction =
      kv.get_double("forecast.train_fraction", c.model.train_fraction);
  c.visibilities_km =
      kv.get_double_list("forecast.visibilities_km", c.visibilities_km);
  c.seeds = static_cast<int>(kv.get_long("forecast.seeds", c.seeds));
  c.trace_slots = kv.get_long("forecast.trace_slots", c.trace_slots);
  c.regime_transition =
      kv.get_double("forecast.regime_transition", c.regime_transition);
  c.rssi_noise_sigma_db =
      kv.get_double("forecast.rssi_noise_sigma_db", c.rssi_noise_sigma_db);
  c.out_dir = kv.get_string("out_dir", c.out_dir);
  return c;
}

std::vector<std::string> ForecastExperimentConfig::validate() const {
  std::vector<std::string> errs;
  for (const auto& e : model.validate()) errs.push_back(e);
  if (visibilities_km.empty())
    errs.push_back("forecast.visibilities_km must not be empty");
  for (double v : visibilities_km)
    if (!(v > 0.0)) errs.push_back("forecast.visibilities_km entries must be positive");
  if (seeds < 1) errs.push_back("forecast.seeds must be at least 1");
  if (trace_slots < 10) errs.push_back("forecast.trace_slots must be at least 10");
  if (!(regime_transition >= 0.0 && regime_transition <= 1.0))
    errs.push_back("forecast.regime_transition must lie in [0, 1]");
  if (!(rssi_noise_sigma_db >= 0.0))
    errs.push_back("forecast.rssi_noise_sigma_db must be non-negative");
  if (out_dir.empty()) errs.push_back("out_dir must not be empty");
  return errs;
}

std::vector<std::string> known_config_keys() {
  return {
      "agent", "episodes", "seed", "out_dir", "write_timings",
      "env.gamma_low_db_km", "env.gamma_high_db_km", "env.window_len",
      "env.episode_len", "env.links_per_slot",
      "weather.lambda_um", "weather.link_distance_km", "weather.tx_power_dbm",
      "weather.regime_transition", "weather.rssi_noise_sigma_db",
      "weather.regimes",
      "dqn.hidden", "dqn.replay_capacity", "dqn.batch_size", "dqn.discount",
      "dqn.learning_rate", "dqn.sync_period", "dqn.warmup_transitions",
      "dqn.learn_every", "dqn.temp_start", "dqn.temp_end",
      "dqn.temp_decay_steps",
      "ensemble.m_workers", "ensemble.alpha", "ensemble.batch_size",
      "ensemble.consensus",
      "ac.hidden", "ac.actor_lr", "ac.critic_lr", "ac.discount",
      "myopic.flip_p",
      "forecast.window", "forecast.max_horizon", "forecast.hidden",
      "forecast.learning_rate", "forecast.epochs", "forecast.batch_size",
      "forecast.train_fraction", "forecast.visibilities_km", "forecast.seeds",
      "forecast.trace_slots", "forecast.regime_transition",
      "forecast.rssi_noise_sigma_db",
  };
}

}  // namespace fsorf
