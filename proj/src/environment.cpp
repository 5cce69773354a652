#include "fsorf/environment.hpp"

#include <algorithm>

namespace fsorf {

std::vector<std::string> EnvConfig::validate() const {
  std::vector<std::string> errs;
  if (!(gamma_low_db_km > 0.0)) errs.push_back("env.gamma_low_db_km must be positive");
  if (!(gamma_high_db_km >= gamma_low_db_km))
    errs.push_back("env.gamma_high_db_km must be >= env.gamma_low_db_km");
  if (window_len < 1) errs.push_back("env.window_len must be at least 1");
  if (episode_len < 1) errs.push_back("env.episode_len must be at least 1");
  if (links_per_slot != 1)
    errs.push_back("env.links_per_slot: only single-link selection is supported");
  return errs;
}

int link_value(LinkId link, double gamma_db_km, const EnvConfig& cfg) {
  if (link == LinkId::kFso)
    return gamma_db_km < cfg.gamma_low_db_km ? 1 : -1;
  return gamma_db_km >= cfg.gamma_high_db_km ? 1 : -1;
}

Observation::Observation(int window_len)
    : window_len_(window_len), cells_(2 * static_cast<std::size_t>(window_len), 0) {
  if (window_len < 1) throw std::invalid_argument("window_len must be at least 1");
}

int Observation::at(int slots_back, LinkId link) const {
  if (slots_back < 0 || slots_back >= window_len_)
    throw std::out_of_range("slots_back outside window");
  return cells_[2 * slots_back + static_cast<int>(link)];
}

void Observation::push_front(LinkId selected, int value) {
  if (value != 1 && value != -1)
    throw std::invalid_argument("window values are -1 or +1");
  // Drop the oldest slot, shift everything one slot older.
  std::move_backward(cells_.begin(), cells_.end() - 2, cells_.end());
  cells_[0] = 0;
  cells_[1] = 0;
  cells_[static_cast<int>(selected)] = static_cast<std::int8_t>(value);
}

std::vector<float> Observation::flatten() const {
  return std::vector<float>(cells_.begin(), cells_.end());
}

Environment::Environment(EnvConfig cfg, WeatherParams weather, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      weather_(std::move(weather)),
      rng_(derive_seed(seed, 0)),
      window_(cfg_.window_len) {
  auto errs = cfg_.validate();
  const auto werrs = weather_.validate();
  errs.insert(errs.end(), werrs.begin(), werrs.end());
  if (!errs.empty()) {
    std::string msg = "invalid environment configuration:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  state_ = make_atmosphere_state(weather_, 0, 0, rng_);
}

Observation Environment::reset() {
  state_ = make_atmosphere_state(weather_, 0, 0, rng_);
  window_ = Observation(cfg_.window_len);
  steps_taken_ = 0;
  done_ = false;
  return window_;
}

Observation Environment::reset(std::uint64_t seed) {
  // Restores the exact post-construction state for this seed: a reseeded
  // environment and a freshly built one produce identical trajectories.
  rng_ = Rng(derive_seed(seed, 0));
  return reset();
}

StepResult Environment::step(LinkId action) {
  if (done_) throw std::logic_error("step() after episode end; call reset()");
  state_ = step_weather(state_, weather_, rng_);
  const int value = link_value(action, state_.gamma_db_km, cfg_);
  window_.push_front(action, value);
  ++steps_taken_;
  done_ = steps_taken_ >= cfg_.episode_len;
  return {window_, value, state_.gamma_db_km, done_};
}

double oracle_reward(std::span<const double> gamma_trace, const EnvConfig& cfg) {
  if (gamma_trace.empty()) throw std::invalid_argument("empty attenuation trace");
  double sum = 0.0;
  for (double g : gamma_trace)
    sum += std::max(link_value(LinkId::kFso, g, cfg), link_value(LinkId::kRf, g, cfg));
  return sum / static_cast<double>(gamma_trace.size());
}

}  // namespace fsorf
