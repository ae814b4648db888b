// Copyright 2026 The bdmatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Seeded random streams.
//
// Every random decision in the library is drawn from an Rng whose seed is
// derived from a master seed by DeriveSeed(). Derivation is counter-based: a
// child seed depends only on the parent seed and the integer labels, never on
// how many numbers were drawn elsewhere. That makes trials reproducible and
// independent of evaluation order or thread count.
//
// Seed tree used by the simulator:
//   master
//    ├─ (kRealizationStream, i)          realization for trial i
//    └─ (kTrialStream, i)                trial seed
//        ├─ (kPlanStream, u, t)          pre-match draw for donor u, step t
//        └─ (kDecisionStream, u, t)      policy decision for donor u, step t

#ifndef BDMATCH_RNG_H_
#define BDMATCH_RNG_H_

#include <cstdint>
#include <limits>

namespace bdmatch {

inline constexpr std::uint64_t kRealizationStream = 0x5245414c;  // "REAL"
inline constexpr std::uint64_t kTrialStream = 0x545249414c;      // "TRIAL"
inline constexpr std::uint64_t kPlanStream = 0x504c414e;         // "PLAN"
inline constexpr std::uint64_t kDecisionStream = 0x44454349;     // "DECI"
inline constexpr std::uint64_t kBetaStream = 0x42455441;         // "BETA"

// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t DeriveSeed(std::uint64_t parent, std::uint64_t a) {
  return Mix64(parent ^ Mix64(a + 0x632be59bd9b4e019ULL));
}
constexpr std::uint64_t DeriveSeed(std::uint64_t parent, std::uint64_t a,
                                   std::uint64_t b) {
  return DeriveSeed(DeriveSeed(parent, a), b);
}
constexpr std::uint64_t DeriveSeed(std::uint64_t parent, std::uint64_t a,
                                   std::uint64_t b, std::uint64_t c) {
  return DeriveSeed(DeriveSeed(parent, a, b), c);
}

// SplitMix64 generator. Satisfies UniformRandomBitGenerator so it can drive
// the standard distributions, while Uniform01/UniformInt give results that do
// not depend on the standard library implementation.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  double Uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform01(); }

  // Uniform integer in [0, n), n > 0. Lemire's multiply-shift with rejection.
  int UniformInt(int n) {
    const std::uint64_t range = static_cast<std::uint64_t>(n);
    std::uint64_t x = (*this)();
    __uint128_t m = static_cast<__uint128_t>(x) * range;
    std::uint64_t low = static_cast<std::uint64_t>(m);
    if (low < range) {
      const std::uint64_t threshold = (0 - range) % range;
      while (low < threshold) {
        x = (*this)();
        m = static_cast<__uint128_t>(x) * range;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<int>(m >> 64);
  }

  bool Bernoulli(double p) { return Uniform01() < p; }

 private:
  std::uint64_t state_;
};

}  // namespace bdmatch

#endif  // BDMATCH_RNG_H_
