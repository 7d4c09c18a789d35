#pragma once
// Per-slot sparse geometric mmWave channels with ULA responses and
// independent Bernoulli link blockage.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "jtcomp/config.hpp"
#include "jtcomp/rng.hpp"

namespace jtcomp {

using cplx = std::complex<double>;

struct ChannelState {
  int num_rrus = 0;
  int num_ues = 0;
  int antennas = 0;
  int slot = 0;
  // nominal channel vectors, layout [(b * K + k) * N + n]
  std::vector<cplx> h;
  // realized blockage mask per (b,k); empty until apply_blockage. Blocked
  // pairs expose an all-zeros effective channel in h.
  std::vector<std::uint8_t> blocked;

  const cplx* vec(int b, int k) const {
    return h.data() + (static_cast<std::size_t>(b) * num_ues + k) * antennas;
  }
  cplx* vec(int b, int k) {
    return h.data() + (static_cast<std::size_t>(b) * num_ues + k) * antennas;
  }
  bool is_blocked(int b, int k) const {
    return !blocked.empty() && blocked[static_cast<std::size_t>(b) * num_ues + k] != 0;
  }
};

// Half-wavelength ULA steering vector; element n is exp(j*pi*n*sin(phi)).
std::vector<cplx> ula_response(double phi, int antennas);

struct PathDraw {
  cplx gain;            // omega_m
  double pathloss_exp;  // psi_m
  double aod;           // phi_m, radians
};

// h = sqrt(N/M) * sum_m omega_m * d^-psi_m * conj(a_T(phi_m))
std::vector<cplx> compose_paths(std::span<const PathDraw> paths, double distance,
                                int antennas);

// Fresh per-slot draw for every RRU-UE pair from the fading stream.
ChannelState draw_channel(const Geometry& geom, const ScenarioConfig& cfg, int slot,
                          Rng& fading);

// Independent Bernoulli(q) blockage per link; blocked pairs get a zero
// effective channel, unblocked pairs keep the nominal one.
ChannelState apply_blockage(const ChannelState& nominal, double q, Rng& blockage);

}  // namespace jtcomp
