#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fsorf/atmosphere.hpp"
#include "fsorf/neural.hpp"

namespace fsorf {

struct RssiSample {
  long slot = 0;
  double rssi_dbm = 0.0;
  double visibility_km = 0.0;
};

struct RssiTrace {
  std::vector<RssiSample> samples;
};

// Rolls the weather chain forward n_slots from the middle regime and records
// the noisy received power each slot.
RssiTrace simulate_rssi_trace(const WeatherParams& params, long n_slots,
                              std::uint64_t seed);

// Three-regime ladder centred on a target visibility (25% above, the value
// itself, 20% below): the channel family used in the forecasting studies,
// parameterized by how calm or turbulent the sky is.
WeatherParams forecast_weather(double visibility_km,
                               double regime_transition = 0.02,
                               double rssi_noise_sigma_db = 0.1);

std::vector<double> rssi_series(const RssiTrace& trace);

struct ForecastConfig {
  int window = 12;       // lagged samples fed to the regressor
  int max_horizon = 5;   // furthest slot predicted ahead
  std::vector<int> hidden = {64, 32};
  double learning_rate = 1e-3;
  long epochs = 150;
  int batch_size = 16;
  double train_fraction = 0.8;  // chronological split; the tail is held out

  std::vector<std::string> validate() const;
};

// Sliding-window regressor over an RSSI series. Inputs and target share one
// standardization fitted on the training span; a constant series degrades
// gracefully (unit scale guard).
class RssiPredictor {
 public:
  static RssiPredictor fit(std::span<const double> series,
                           const ForecastConfig& cfg, std::uint64_t seed);

  // One-slot-ahead prediction from the latest cfg.window samples.
  double predict_next(std::span<const double> window) const;

  // Recursive multi-step: each prediction feeds the next window. Returns
  // horizons 1..n_horizons in order.
  std::vector<double> predict(std::span<const double> window,
                              int n_horizons) const;

  const ForecastConfig& config() const { return cfg_; }
  double scale_mean() const { return mean_; }
  double scale_std() const { return std_; }

 private:
  RssiPredictor(Mlp<float> net, ForecastConfig cfg, double mean, double stddev)
      : net_(std::move(net)), cfg_(std::move(cfg)), mean_(mean), std_(stddev) {}

  Mlp<float> net_;
  ForecastConfig cfg_;
  double mean_;
  double std_;
};

struct CdfPoint {
  double threshold = 0.0;
  double fraction = 0.0;  // share of absolute errors strictly below threshold
};

struct ForecastReport {
  std::vector<double> mae_by_horizon;                     // index h-1
  std::vector<std::vector<double>> abs_errors_by_horizon; // raw samples
  std::vector<double> pooled_abs_errors() const;
};

// Scores the predictor on the held-out chronological tail of the series the
// way it will be used: anchored at every tail position, predicting 1..H
// slots ahead recursively.
ForecastReport evaluate_forecast(const RssiPredictor& predictor,
                                 std::span<const double> series);

std::vector<CdfPoint> ae_cdf(std::span<const double> abs_errors,
                             std::span<const double> thresholds);

}  // namespace fsorf
