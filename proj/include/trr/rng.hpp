#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace trr {

// splitmix64 finalizer; used both to whiten seeds and to derive
// independent streams from a base seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based derivation: stream 0, 1, 2, ... of a base seed are
// mutually independent and reproducible regardless of draw order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(base ^ mix64(stream + 0x6a09e667f3bcc909ULL));
}

// mt19937_64 raw output is bit-exact across platforms; the standard
// distributions are not, so all conversions below are hand-rolled.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix64(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform on [0, 1), 53-bit mantissa
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool coin() { return (gen_() >> 63) != 0; }

  // standard normal via Box-Muller; one (u1, u2) pair per call
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // circularly-symmetric complex normal with unit total variance
  std::complex<double> cnormal() {
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-std::log(u1));  // -2 log u1, scaled by 1/2 variance
    const double th = 2.0 * 3.14159265358979323846 * u2;
    return {r * std::cos(th), r * std::sin(th)};
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace trr
