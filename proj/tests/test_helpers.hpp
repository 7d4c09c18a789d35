#pragma once
// Shared fixtures for the unit tests: tiny scenarios plus brute-force
// evaluators kept independent of the library's stacked-vector code paths.

#include <cmath>
#include <complex>
#include <vector>

#include "jtcomp/blockage_sets.hpp"
#include "jtcomp/channel.hpp"
#include "jtcomp/config.hpp"
#include "jtcomp/rng.hpp"

namespace testutil {

using jtcomp::ChannelState;
using jtcomp::cplx;
using jtcomp::StackedVector;

inline jtcomp::ScenarioConfig small_config(int rrus, int ues, int antennas) {
  jtcomp::ScenarioConfig cfg;
  cfg.num_rrus = rrus;
  cfg.num_ues = ues;
  cfg.antennas_per_rru = antennas;
  cfg.subset_param_l = 1;
  cfg.noise_power_mw = 1.0;
  return cfg;
}

inline ChannelState random_channel(int rrus, int ues, int antennas, std::uint64_t seed) {
  ChannelState H;
  H.num_rrus = rrus;
  H.num_ues = ues;
  H.antennas = antennas;
  H.h.resize(static_cast<std::size_t>(rrus) * ues * antennas);
  jtcomp::Rng rng(seed);
  for (auto& v : H.h) v = rng.cnormal();
  return H;
}

inline std::vector<StackedVector> random_beamformers(int users, int rrus, int antennas,
                                                     std::uint64_t seed) {
  std::vector<StackedVector> F(users, StackedVector(static_cast<std::size_t>(rrus) * antennas));
  jtcomp::Rng rng(seed);
  for (auto& f : F) {
    for (auto& v : f) v = rng.cnormal();
  }
  return F;
}

// Eq.-(4)-style SINR via explicit per-RRU double sums, written without the
// stacked-vector machinery so the two routes stay independent.
inline double sinr_subset_direct(const std::vector<StackedVector>& F,
                                 const ChannelState& H, int k,
                                 const std::vector<int>& subset,
                                 const std::vector<std::vector<int>>& serving_sets,
                                 const std::vector<int>& excluded, double sigma2) {
  const int N = H.antennas;
  auto pair_dot = [&](int b, int u) {
    cplx acc(0.0, 0.0);
    for (int n = 0; n < N; ++n) {
      acc += std::conj(H.vec(b, k)[n]) * F[u][static_cast<std::size_t>(b) * N + n];
    }
    return acc;
  };
  cplx num(0.0, 0.0);
  for (int b : subset) num += pair_dot(b, k);
  double den = sigma2;
  for (std::size_t u = 0; u < F.size(); ++u) {
    if (static_cast<int>(u) == k) continue;
    cplx cross(0.0, 0.0);
    for (int g : serving_sets[u]) {
      bool dropped = false;
      for (int d : excluded) dropped = dropped || d == g;
      if (!dropped) cross += pair_dot(g, u);
    }
    den += std::norm(cross);
  }
  return std::norm(num) / den;
}

}  // namespace testutil
