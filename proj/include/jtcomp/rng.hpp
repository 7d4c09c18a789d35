#pragma once
// Seeded random streams. The master seed expands into independent named
// sub-streams (one per purpose and replication) so that enabling or
// disabling one randomized feature never perturbs the draws of another.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace jtcomp {

enum class StreamPurpose : std::uint64_t {
  Geometry = 1,
  Fading = 2,
  Blockage = 3,
  Arrivals = 4,
  SolverInit = 5,
};

namespace detail {
// splitmix64; used only to spread (seed, purpose, replication) into
// well-separated engine seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// One random stream. Samplers are hand-rolled on top of mt19937_64 so the
// produced sequences are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal, Box-Muller
  double normal() {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
  }

  // circularly symmetric complex Gaussian with E|w|^2 = 1
  std::complex<double> cnormal() {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    const double r = std::sqrt(-std::log(u));
    const double th = 2.0 * M_PI * uniform();
    return {r * std::cos(th), r * std::sin(th)};
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Poisson via Knuth's product-of-uniforms; fine for the small rates used here
  int poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::mt19937_64 eng_;
};

inline std::uint64_t stream_seed(std::uint64_t master, StreamPurpose purpose,
                                 std::uint64_t replication) {
  const std::uint64_t a = detail::mix64(master);
  const std::uint64_t b = detail::mix64(a ^ static_cast<std::uint64_t>(purpose));
  return detail::mix64(b ^ (replication * 0xd1342543de82ef95ULL + 1));
}

inline Rng make_stream(std::uint64_t master, StreamPurpose purpose,
                       std::uint64_t replication = 0) {
  return Rng(stream_seed(master, purpose, replication));
}

}  // namespace jtcomp
