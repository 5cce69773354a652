#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsorf/atmosphere.hpp"

namespace fsorf {

// The two transport links the controller can put traffic on.
enum class LinkId : int { kFso = 0, kRf = 1 };
inline constexpr int kNumLinks = 2;

struct EnvConfig {
  // Attenuation thresholds (dB/km): the optical link carries traffic below
  // gamma_low, the radio link at gamma_high and above. Between the two lies a
  // dead band where neither link earns a positive reward.
  double gamma_low_db_km = 100.0;
  double gamma_high_db_km = 120.0;
  int window_len = 16;   // observed history length, in slots
  int episode_len = 200; // slots per episode
  int links_per_slot = 1;

  std::vector<std::string> validate() const;
};

// Per-link availability given the current optical attenuation: +1 when the
// link would carry traffic, -1 when it would not.
int link_value(LinkId link, double gamma_db_km, const EnvConfig& cfg);

// Sliding history of per-link outcomes, newest slot first. Each cell holds
// -1/+1 for the link that was selected on that slot and 0 for the other.
class Observation {
 public:
  explicit Observation(int window_len);

  int window_len() const { return window_len_; }
  int at(int slots_back, LinkId link) const;

  // Shifts the window one slot and records the newest outcome.
  void push_front(LinkId selected, int value);

  // Slot-major layout: index 2 * slots_back + link.
  std::vector<float> flatten() const;
  int flat_dim() const { return 2 * window_len_; }

  const std::vector<std::int8_t>& raw() const { return cells_; }
  bool operator==(const Observation&) const = default;

 private:
  int window_len_;
  std::vector<std::int8_t> cells_;
};

struct StepResult {
  Observation observation;
  int reward = 0;
  double gamma_db_km = 0.0;
  bool done = false;
};

// Episodic link-selection task over the regime-switching channel. All
// randomness comes from the seed handed to the constructor, so trajectories
// are reproducible; reset() without arguments starts the next episode on the
// continuing random stream.
class Environment {
 public:
  Environment(EnvConfig cfg, WeatherParams weather, std::uint64_t seed);

  Observation reset();
  Observation reset(std::uint64_t seed);  // reseed, then reset

  // Advances the weather one slot, then scores the chosen link against the
  // new channel state. Throws std::logic_error once the episode is done.
  StepResult step(LinkId action);

  bool done() const { return done_; }
  long slot() const { return state_.slot; }
  const AtmosphereState& atmosphere() const { return state_; }
  const EnvConfig& config() const { return cfg_; }
  const WeatherParams& weather() const { return weather_; }

 private:
  EnvConfig cfg_;
  WeatherParams weather_;
  Rng rng_;
  AtmosphereState state_;
  Observation window_;
  int steps_taken_ = 0;
  bool done_ = false;
};

// Mean per-slot reward of a clairvoyant policy that always picks the better
// link; an upper bound for every causal policy on the same trace.
double oracle_reward(std::span<const double> gamma_trace, const EnvConfig& cfg);

}  // namespace fsorf
