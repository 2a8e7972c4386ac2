#pragma once

#include <cstdint>
#include <random>

namespace wavekit {

// Reproducible stream-split generator.
//
// Each (seed, worker, stream) triple is mixed through three splitmix64 rounds
// into a 64-bit state that seeds an independent std::mt19937_64. Draw
// algorithms are fixed here rather than delegated to <random> distributions so
// results are stable for a given build:
//   - uniform01: top 53 bits of one mt19937_64 output, scaled by 2^-53
//   - normal:    Marsaglia polar method, pairs cached
//   - poisson:   Knuth multiplication below rate 700, else a rounded normal
//                approximation (rates that large only occur in clipped,
//                pathological configurations)
//   - student_t3: normal / sqrt(chi^2_3 / 3) from four normal draws
class Rng {
 public:
  enum class Stream : std::uint64_t {
    Covariates = 1,
    Noise = 2,
    WorkerParams = 3,
  };

  Rng(std::uint64_t seed, std::uint64_t worker, Stream stream)
      : engine_(mix(mix(mix(seed) ^ worker) ^ static_cast<std::uint64_t>(stream))) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  long poisson(double rate);

  double student_t3() {
    const double z = normal();
    const double a = normal();
    const double b = normal();
    const double c = normal();
    return z / std::sqrt((a * a + b * b + c * c) / 3.0);
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace wavekit
