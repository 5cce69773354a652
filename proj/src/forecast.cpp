#include "fsorf/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fsorf {

RssiTrace simulate_rssi_trace(const WeatherParams& params, long n_slots,
                              std::uint64_t seed) {
  const auto errs = params.validate();
  if (!errs.empty())
    throw std::invalid_argument("invalid weather parameters: " + errs.front());
  if (n_slots < 1) throw std::invalid_argument("trace length must be positive");
  Rng rng(derive_seed(seed, 0));
  RssiTrace trace;
  trace.samples.reserve(n_slots);
  // Starting mid-ladder gives both improvement and degradation headroom.
  const int mid = static_cast<int>(params.regimes.size()) / 2;
  AtmosphereState s = make_atmosphere_state(params, mid, 0, rng);
  trace.samples.push_back({s.slot, s.rssi_dbm, s.visibility_km});
  for (long t = 1; t < n_slots; ++t) {
    s = step_weather(s, params, rng);
    trace.samples.push_back({s.slot, s.rssi_dbm, s.visibility_km});
  }
  return trace;
}

WeatherParams forecast_weather(double visibility_km, double regime_transition,
                               double rssi_noise_sigma_db) {
  if (!(visibility_km > 0.0))
    throw std::domain_error("visibility must be positive");
  WeatherParams p;
  p.regime_transition = regime_transition;
  p.rssi_noise_sigma_db = rssi_noise_sigma_db;
  p.regimes = {
      {"lifting", concentration_for_visibility(1.25 * visibility_km)},
      {"steady", concentration_for_visibility(visibility_km)},
      {"thickening", concentration_for_visibility(0.8 * visibility_km)},
  };
  return p;
}

std::vector<double> rssi_series(const RssiTrace& trace) {
  std::vector<double> out;
  out.reserve(trace.samples.size());
  for (const auto& s : trace.samples) out.push_back(s.rssi_dbm);
  return out;
}

std::vector<std::string> ForecastConfig::validate() const {
  std::vector<std::string> errs;
  if (window < 1) errs.push_back("forecast.window must be at least 1");
  if (max_horizon < 1) errs.push_back("forecast.max_horizon must be at least 1");
  if (!(learning_rate > 0.0)) errs.push_back("forecast.learning_rate must be positive");
  if (epochs < 1) errs.push_back("forecast.epochs must be at least 1");
  if (batch_size < 1) errs.push_back("forecast.batch_size must be at least 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    errs.push_back("forecast.train_fraction must lie in (0, 1)");
  for (int h : hidden)
    if (h < 1) errs.push_back("forecast.hidden entries must be at least 1");
  return errs;
}

RssiPredictor RssiPredictor::fit(std::span<const double> series,
                                 const ForecastConfig& cfg, std::uint64_t seed) {
  {
    const auto errs = cfg.validate();
    if (!errs.empty())
      throw std::invalid_argument("invalid forecast configuration: " + errs.front());
  }
  const long n = static_cast<long>(series.size());
  const long n_train = static_cast<long>(cfg.train_fraction * n);
  if (n_train <= cfg.window + 1)
    throw std::invalid_argument("series too short for the requested window");

  // One scale for inputs and target, fitted on the training span only.
  double mean = 0.0;
  for (long i = 0; i < n_train; ++i) mean += series[i];
  mean /= static_cast<double>(n_train);
  double var = 0.0;
  for (long i = 0; i < n_train; ++i) {
    const double d = series[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(n_train);
  double stddev = std::sqrt(var);
  if (stddev < 1e-12) stddev = 1.0;  // constant series: plain centering

  MlpSpec spec;
  spec.input_dim = cfg.window;
  spec.hidden_dims = cfg.hidden;
  spec.output_dim = 1;
  Rng rng(derive_seed(seed, 1));
  Mlp<float> net(spec, rng);

  const long n_pairs = n_train - cfg.window;
  std::vector<long> order(n_pairs);
  std::iota(order.begin(), order.end(), 0);

  using Matrix = Mlp<float>::Matrix;
  Matrix in(cfg.window, cfg.batch_size);
  Matrix tgt(1, cfg.batch_size);
  const Matrix full_mask = Matrix::Ones(1, cfg.batch_size);
  for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the owned generator keeps runs replayable.
    for (long i = n_pairs - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_int(static_cast<int>(i + 1))]);
    for (long start = 0; start + cfg.batch_size <= n_pairs;
         start += cfg.batch_size) {
      for (int c = 0; c < cfg.batch_size; ++c) {
        const long t = order[start + c] + cfg.window;  // predict series[t]
        for (int k = 0; k < cfg.window; ++k)
          in(k, c) = static_cast<float>((series[t - cfg.window + k] - mean) / stddev);
        tgt(0, c) = static_cast<float>((series[t] - mean) / stddev);
      }
      const auto pass = net.forward(in);
      const auto [loss, grads] = net.backward_mse(pass, tgt, full_mask);
      net.adam_step(grads, cfg.learning_rate);
    }
  }
  return RssiPredictor(std::move(net), cfg, mean, stddev);
}

double RssiPredictor::predict_next(std::span<const double> window) const {
  if (static_cast<int>(window.size()) != cfg_.window)
    throw std::invalid_argument("prediction window length mismatch");
  std::vector<float> in(cfg_.window);
  for (int i = 0; i < cfg_.window; ++i)
    in[i] = static_cast<float>((window[i] - mean_) / std_);
  const double out = net_.forward_one(in)(0);
  return out * std_ + mean_;
}

std::vector<double> RssiPredictor::predict(std::span<const double> window,
                                           int n_horizons) const {
  if (n_horizons < 1) throw std::invalid_argument("need at least one horizon");
  std::vector<double> rolling(window.begin(), window.end());
  std::vector<double> out;
  out.reserve(n_horizons);
  for (int h = 0; h < n_horizons; ++h) {
    const double next = predict_next(
        std::span<const double>(rolling).last(cfg_.window));
    out.push_back(next);
    rolling.push_back(next);
  }
  return out;
}

ForecastReport evaluate_forecast(const RssiPredictor& predictor,
                                 std::span<const double> series) {
  const ForecastConfig& cfg = predictor.config();
  const long n = static_cast<long>(series.size());
  const long n_train = static_cast<long>(cfg.train_fraction * n);
  ForecastReport report;
  report.mae_by_horizon.assign(cfg.max_horizon, 0.0);
  report.abs_errors_by_horizon.assign(cfg.max_horizon, {});
  // Anchor t: history series[t-window .. t-1] is known, slots t .. t+H-1 are
  // predicted. Anchors stay fully inside the held-out tail.
  const long first = std::max<long>(n_train, cfg.window);
  long anchors = 0;
  for (long t = first; t + cfg.max_horizon <= n; ++t) {
    const auto pred = predictor.predict(
        series.subspan(t - cfg.window, cfg.window), cfg.max_horizon);
    for (int h = 0; h < cfg.max_horizon; ++h) {
      const double ae = std::abs(pred[h] - series[t + h]);
      report.mae_by_horizon[h] += ae;
      report.abs_errors_by_horizon[h].push_back(ae);
    }
    ++anchors;
  }
  if (anchors == 0)
    throw std::invalid_argument("series leaves no held-out window to score");
  for (double& m : report.mae_by_horizon) m /= static_cast<double>(anchors);
  return report;
}

std::vector<double> ForecastReport::pooled_abs_errors() const {
  std::vector<double> all;
  for (const auto& v : abs_errors_by_horizon)
    all.insert(all.end(), v.begin(), v.end());
  return all;
}

std::vector<CdfPoint> ae_cdf(std::span<const double> abs_errors,
                             std::span<const double> thresholds) {
  if (abs_errors.empty()) throw std::invalid_argument("no absolute errors");
  std::vector<CdfPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    long below = 0;
    for (double e : abs_errors)
      if (e < t) ++below;
    out.push_back({t, static_cast<double>(below) /
                          static_cast<double>(abs_errors.size())});
  }
  return out;
}

}  // namespace fsorf
