#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "fsorf/environment.hpp"

using namespace fsorf;

namespace {

// Single-regime weather pinned at a chosen optical attenuation.
WeatherParams pinned_weather(double gamma_db_km) {
  WeatherParams w;
  w.regime_transition = 0.0;
  w.rssi_noise_sigma_db = 0.0;
  // Invert attenuation numerically: gamma is strictly decreasing in
  // visibility, so bisection over visibility converges fast.
  double lo = 1e-3, hi = 1e3;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (specific_attenuation(mid, w.lambda_um) > gamma_db_km)
      lo = mid;
    else
      hi = mid;
  }
  w.regimes = {{"pin", concentration_for_visibility(0.5 * (lo + hi))}};
  return w;
}

}  // namespace

TEST_SUITE("environment") {

TEST_CASE("link availability truth table") {
  EnvConfig cfg;
  CHECK(link_value(LinkId::kFso, 50.0, cfg) == 1);
  CHECK(link_value(LinkId::kRf, 50.0, cfg) == -1);
  CHECK(link_value(LinkId::kFso, 130.0, cfg) == -1);
  CHECK(link_value(LinkId::kRf, 130.0, cfg) == 1);
  // Dead band: neither link carries.
  CHECK(link_value(LinkId::kFso, 110.0, cfg) == -1);
  CHECK(link_value(LinkId::kRf, 110.0, cfg) == -1);
  // Boundaries: the optical threshold is strict, the radio one inclusive.
  CHECK(link_value(LinkId::kFso, 100.0, cfg) == -1);
  CHECK(link_value(LinkId::kRf, 120.0, cfg) == 1);
  CHECK(link_value(LinkId::kFso, 99.9999, cfg) == 1);
  CHECK(link_value(LinkId::kRf, 119.9999, cfg) == -1);
}

TEST_CASE("observation starts empty and reports fixed geometry") {
  Observation obs(5);
  CHECK(obs.window_len() == 5);
  CHECK(obs.flat_dim() == 10);
  for (int s = 0; s < 5; ++s)
    for (LinkId l : {LinkId::kFso, LinkId::kRf}) CHECK(obs.at(s, l) == 0);
  CHECK_THROWS_AS(obs.at(5, LinkId::kFso), std::out_of_range);
  CHECK_THROWS_AS(Observation(0), std::invalid_argument);
}

TEST_CASE("push_front keeps newest slot first and zeros the unselected link") {
  Observation obs(3);
  obs.push_front(LinkId::kFso, 1);
  obs.push_front(LinkId::kRf, -1);
  // Newest slot: radio was tried and failed, optical untouched.
  CHECK(obs.at(0, LinkId::kRf) == -1);
  CHECK(obs.at(0, LinkId::kFso) == 0);
  // One slot back: optical succeeded.
  CHECK(obs.at(1, LinkId::kFso) == 1);
  CHECK(obs.at(1, LinkId::kRf) == 0);
  CHECK(obs.at(2, LinkId::kFso) == 0);

  CHECK_THROWS_AS(obs.push_front(LinkId::kFso, 0), std::invalid_argument);
  CHECK_THROWS_AS(obs.push_front(LinkId::kFso, 2), std::invalid_argument);
}

TEST_CASE("entries age out after window_len pushes") {
  Observation obs(3);
  obs.push_front(LinkId::kFso, 1);
  for (int i = 0; i < 3; ++i) obs.push_front(LinkId::kRf, -1);
  for (int s = 0; s < 3; ++s) CHECK(obs.at(s, LinkId::kFso) == 0);
}

TEST_CASE("flatten is slot-major") {
  Observation obs(2);
  obs.push_front(LinkId::kRf, 1);
  obs.push_front(LinkId::kFso, -1);
  const auto f = obs.flatten();
  REQUIRE(f.size() == 4);
  CHECK(f[0] == -1.0f);  // newest slot, optical
  CHECK(f[1] == 0.0f);   // newest slot, radio
  CHECK(f[2] == 0.0f);   // previous slot, optical
  CHECK(f[3] == 1.0f);   // previous slot, radio
}

TEST_CASE("rewards are plus-minus one and follow the channel") {
  EnvConfig cfg;
  cfg.episode_len = 40;
  Environment env(cfg, pinned_weather(55.0), 3);
  env.reset();
  for (int i = 0; i < 40; ++i) {
    const auto r = env.step(LinkId::kFso);
    CHECK(r.reward == 1);
    CHECK(r.observation.at(0, LinkId::kFso) == 1);
    CHECK(r.observation.at(0, LinkId::kRf) == 0);
  }
  Environment env2(cfg, pinned_weather(55.0), 3);
  env2.reset();
  for (int i = 0; i < 40; ++i) CHECK(env2.step(LinkId::kRf).reward == -1);
}

TEST_CASE("dead band punishes both links") {
  EnvConfig cfg;
  cfg.episode_len = 10;
  Environment env(cfg, pinned_weather(110.0), 5);
  env.reset();
  CHECK(env.step(LinkId::kFso).reward == -1);
  CHECK(env.step(LinkId::kRf).reward == -1);
}

TEST_CASE("episode terminates after episode_len steps and refuses more") {
  EnvConfig cfg;
  cfg.episode_len = 7;
  Environment env(cfg, WeatherParams::defaults(), 1);
  env.reset();
  for (int i = 0; i < 6; ++i) CHECK_FALSE(env.step(LinkId::kFso).done);
  CHECK(env.step(LinkId::kFso).done);
  CHECK(env.done());
  CHECK_THROWS_AS(env.step(LinkId::kFso), std::logic_error);
  env.reset();
  CHECK_FALSE(env.done());
  CHECK(env.slot() == 0);
}

TEST_CASE("same seed reproduces the trajectory exactly") {
  EnvConfig cfg;
  auto roll = [&cfg](std::uint64_t seed) {
    Environment env(cfg, WeatherParams::defaults(), seed);
    env.reset();
    std::vector<double> g;
    for (int i = 0; i < 200; ++i)
      g.push_back(env.step(i % 2 ? LinkId::kRf : LinkId::kFso).gamma_db_km);
    return g;
  };
  CHECK(roll(11) == roll(11));
  CHECK(roll(11) != roll(12));
}

TEST_CASE("plain reset continues the random stream, seeded reset rewinds it") {
  EnvConfig cfg;
  // A freshly constructed environment is episode-ready; no reset needed.
  Environment env(cfg, WeatherParams::defaults(), 21);
  std::vector<double> first;
  for (int i = 0; i < 200; ++i) first.push_back(env.step(LinkId::kFso).gamma_db_km);
  env.reset();
  std::vector<double> second;
  for (int i = 0; i < 200; ++i) second.push_back(env.step(LinkId::kFso).gamma_db_km);
  CHECK(first != second);  // fresh weather, continuing stream

  // Seeded reset restores the exact post-construction state.
  env.reset(21);
  std::vector<double> replay;
  for (int i = 0; i < 200; ++i) replay.push_back(env.step(LinkId::kFso).gamma_db_km);
  CHECK(replay == first);
}

TEST_CASE("oracle reward bounds every policy on the same trace") {
  EnvConfig cfg;
  Environment env(cfg, WeatherParams::defaults(), 77);
  env.reset();
  Rng policy_rng(5);
  std::vector<double> gammas;
  double total = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto r = env.step(policy_rng.bernoulli(0.5) ? LinkId::kRf : LinkId::kFso);
    gammas.push_back(r.gamma_db_km);
    total += r.reward;
  }
  const double oracle = oracle_reward(gammas, cfg);
  CHECK(total / 200.0 <= oracle + 1e-12);
  CHECK(oracle == 1.0);  // default regimes never enter the dead band
}

TEST_CASE("oracle reward is -1 inside the dead band") {
  EnvConfig cfg;
  const std::vector<double> trace(10, 110.0);
  CHECK(oracle_reward(trace, cfg) == -1.0);
  CHECK_THROWS_AS(oracle_reward(std::vector<double>{}, cfg), std::invalid_argument);
}

TEST_CASE("constructor rejects invalid configuration") {
  EnvConfig cfg;
  cfg.window_len = 0;
  cfg.episode_len = -1;
  CHECK(cfg.validate().size() == 2);
  CHECK_THROWS_AS(Environment(cfg, WeatherParams::defaults(), 1),
                  std::invalid_argument);
  EnvConfig cfg2;
  cfg2.gamma_high_db_km = 90.0;  // below gamma_low
  CHECK_FALSE(cfg2.validate().empty());
  EnvConfig cfg3;
  cfg3.links_per_slot = 2;
  CHECK_FALSE(cfg3.validate().empty());
}

}  // TEST_SUITE
