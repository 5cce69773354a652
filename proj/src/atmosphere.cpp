#include "fsorf/atmosphere.hpp"

#include <cmath>
#include <stdexcept>

namespace fsorf {

namespace {

// 10 * log10(e): converts a natural-log extinction coefficient to dB.
constexpr double kNepersToDb = 4.342944819032518;

void check_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::domain_error(std::string(what) + " must be positive");
}

}  // namespace

WeatherParams WeatherParams::defaults() {
  WeatherParams p;
  // Concentrations chosen so the optical specific attenuation at 1.55um sits
  // at 55 / 85 / 130 / 160 dB/km: two regimes clearly favouring the optical
  // link and two clearly favouring the radio fallback.
  p.regimes = {
      {"clear", 442423.933307},
      {"haze", 721514.690954},
      {"dust", 1169885.318088},
      {"storm", 1484492.907546},
  };
  return p;
}

std::vector<std::string> WeatherParams::validate() const {
  std::vector<std::string> errs;
  if (!(lambda_um > 0.0)) errs.push_back("weather.lambda_um must be positive");
  if (!(link_distance_km > 0.0))
    errs.push_back("weather.link_distance_km must be positive");
  if (!(regime_transition >= 0.0 && regime_transition <= 1.0))
    errs.push_back("weather.regime_transition must lie in [0, 1]");
  if (!(rssi_noise_sigma_db >= 0.0))
    errs.push_back("weather.rssi_noise_sigma_db must be non-negative");
  if (regimes.empty()) errs.push_back("weather.regimes must not be empty");
  for (std::size_t i = 0; i < regimes.size(); ++i) {
    if (!(regimes[i].concentration_g_m3 > 0.0))
      errs.push_back("weather.regimes[" + std::to_string(i) +
                     "].concentration must be positive");
    if (i > 0 &&
        !(regimes[i].concentration_g_m3 > regimes[i - 1].concentration_g_m3))
      errs.push_back("weather.regimes must be ordered by increasing concentration");
  }
  return errs;
}

double visibility_from_concentration(double c_g_m3) {
  check_positive(c_g_m3, "concentration");
  return 7080.0 * std::pow(c_g_m3, -0.8);
}

double concentration_for_visibility(double v_km) {
  check_positive(v_km, "visibility");
  return std::pow(7080.0 / v_km, 1.25);
}

double q_exponent(double v_km) {
  check_positive(v_km, "visibility");
  if (v_km > 50.0) return 1.6;
  if (v_km > 6.0) return 1.3;
  return 0.58 * std::cbrt(v_km);
}

double specific_attenuation(double v_km, double lambda_um) {
  check_positive(v_km, "visibility");
  check_positive(lambda_um, "wavelength");
  const double q = q_exponent(v_km);
  return kNepersToDb * (3.912 / v_km) * std::pow(lambda_um / 0.55, -q);
}

double scattering_transmission(double c_g_m3, double lambda_um, double range_km) {
  check_positive(lambda_um, "wavelength");
  check_positive(range_km, "range");
  const double v = visibility_from_concentration(c_g_m3);
  const double q = q_exponent(v);
  return std::exp((-3.91 / v) * std::pow(lambda_um / 0.55, q) * range_km);
}

AtmosphereState make_atmosphere_state(const WeatherParams& params,
                                      int regime_index, long slot, Rng& rng) {
  if (regime_index < 0 || regime_index >= static_cast<int>(params.regimes.size()))
    throw std::out_of_range("regime index outside configured regimes");
  AtmosphereState s;
  s.regime_index = regime_index;
  s.concentration_g_m3 = params.regimes[regime_index].concentration_g_m3;
  s.visibility_km = visibility_from_concentration(s.concentration_g_m3);
  s.gamma_db_km = specific_attenuation(s.visibility_km, params.lambda_um);
  s.rssi_dbm = params.tx_power_dbm - s.gamma_db_km * params.link_distance_km;
  if (params.rssi_noise_sigma_db > 0.0)
    s.rssi_dbm += rng.normal(0.0, params.rssi_noise_sigma_db);
  s.slot = slot;
  return s;
}

AtmosphereState step_weather(const AtmosphereState& state,
                             const WeatherParams& params, Rng& rng) {
  const int n = static_cast<int>(params.regimes.size());
  int next = state.regime_index;
  if (n > 1 && rng.bernoulli(params.regime_transition)) {
    const bool has_down = state.regime_index > 0;
    const bool has_up = state.regime_index < n - 1;
    if (has_down && has_up)
      next += rng.bernoulli(0.5) ? 1 : -1;
    else
      next += has_up ? 1 : -1;
  }
  return make_atmosphere_state(params, next, state.slot + 1, rng);
}

}  // namespace fsorf
