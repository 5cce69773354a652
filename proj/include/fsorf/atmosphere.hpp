#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsorf/rng.hpp"

namespace fsorf {

// One dust/visibility operating regime of the optical channel, identified by
// the suspended particle concentration that produces it.
struct WeatherRegime {
  std::string name;
  double concentration_g_m3 = 0.0;
};

struct WeatherParams {
  double lambda_um = 1.55;            // optical carrier wavelength
  double link_distance_km = 1.0;      // one-way path length
  double tx_power_dbm = 20.0;         // transmit power feeding the RSSI model
  double regime_transition = 0.05;    // per-slot probability of a regime change
  double rssi_noise_sigma_db = 0.1;   // Gaussian measurement noise on RSSI
  std::vector<WeatherRegime> regimes; // ordered by increasing concentration

  // Clear / haze / dust / storm ladder used across the experiments.
  static WeatherParams defaults();

  // Empty when usable; otherwise one message per offending field.
  std::vector<std::string> validate() const;
};

// Instantaneous channel condition; regenerated by step_weather() each slot.
struct AtmosphereState {
  int regime_index = 0;
  double concentration_g_m3 = 0.0;
  double visibility_km = 0.0;
  double gamma_db_km = 0.0;  // specific attenuation of the optical carrier
  double rssi_dbm = 0.0;
  long slot = 0;
};

// Meteorological visibility (km) from dust concentration (g/m^3) and its
// inverse. Both throw std::domain_error on non-positive input.
double visibility_from_concentration(double c_g_m3);
double concentration_for_visibility(double v_km);

// Size-distribution exponent of the scattering model, piecewise in visibility.
double q_exponent(double v_km);

// Specific attenuation (dB/km) at wavelength lambda_um given visibility v_km.
double specific_attenuation(double v_km, double lambda_um);

// Fractional optical power surviving range_km of scattering.
double scattering_transmission(double c_g_m3, double lambda_um, double range_km);

// Channel state for a given regime; draws RSSI noise from rng unless
// rssi_noise_sigma_db is zero.
AtmosphereState make_atmosphere_state(const WeatherParams& params,
                                      int regime_index, long slot, Rng& rng);

// Advances the regime birth-death chain one slot: with probability
// regime_transition the index moves to a uniformly chosen valid neighbour
// (so edge regimes move with the full transition probability), otherwise it
// holds. Returns the state for the next slot.
AtmosphereState step_weather(const AtmosphereState& state,
                             const WeatherParams& params, Rng& rng);

}  // namespace fsorf
