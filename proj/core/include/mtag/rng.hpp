#pragma once

#include <cstdint>
#include <random>

namespace mtag {

// Deterministic random source for simulations. Both the engine
// (std::mt19937_64, fully specified by the standard) and the uniform mapping
// below are fixed, so a given seed reproduces the same draw sequence on any
// platform. Experiment output records kAlgorithm next to the seed.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53-bit resolution.
  double next_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // True with probability prob; prob=0 never fires, prob=1 always does.
  bool bernoulli(double prob) { return next_unit() < prob; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mtag
