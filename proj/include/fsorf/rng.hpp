#pragma once

#include <cstdint>
#include <random>

namespace fsorf {

// Mixes a run seed with a stream index so every component of an experiment
// (weather chain, agent exploration, each ensemble worker, ...) draws from an
// independent generator instead of interleaving on a shared one.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Deterministic random source. The engine (mt19937_64) is fully specified by
// the standard, and the distributions are implemented here rather than taken
// from <random>, so the same seed yields bit-identical draws on any
// platform/standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform();

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos();

  // Uniform integer in {0, ..., n - 1}; n must be positive.
  int uniform_int(int n);

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller transform; consumes two uniform draws per call.
  double normal(double mean = 0.0, double stddev = 1.0);

 private:
  std::mt19937_64 engine_;
};

}  // namespace fsorf
