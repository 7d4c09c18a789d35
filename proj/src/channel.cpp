#include "jtcomp/channel.hpp"

#include <cmath>

namespace jtcomp {

std::vector<cplx> ula_response(double phi, int antennas) {
  std::vector<cplx> a(antennas);
  const double step = M_PI * std::sin(phi);
  for (int n = 0; n < antennas; ++n) {
    a[n] = std::polar(1.0, step * n);
  }
  return a;
}

std::vector<cplx> compose_paths(std::span<const PathDraw> paths, double distance,
                                int antennas) {
  std::vector<cplx> h(antennas, cplx(0.0, 0.0));
  const double scale = std::sqrt(static_cast<double>(antennas) /
                                 static_cast<double>(paths.size()));
  for (const PathDraw& p : paths) {
    const cplx w = p.gain * std::pow(distance, -p.pathloss_exp);
    const double step = M_PI * std::sin(p.aod);
    for (int n = 0; n < antennas; ++n) {
      h[n] += w * std::polar(1.0, -step * n);  // conj of the steering vector
    }
  }
  for (auto& v : h) v *= scale;
  return h;
}

ChannelState draw_channel(const Geometry& geom, const ScenarioConfig& cfg, int slot,
                          Rng& fading) {
  ChannelState st;
  st.num_rrus = geom.rru_count();
  st.num_ues = geom.ue_count();
  st.antennas = cfg.antennas_per_rru;
  st.slot = slot;
  st.h.resize(static_cast<std::size_t>(st.num_rrus) * st.num_ues * st.antennas);

  std::vector<PathDraw> paths(cfg.num_paths);
  for (int b = 0; b < st.num_rrus; ++b) {
    for (int k = 0; k < st.num_ues; ++k) {
      for (auto& p : paths) {
        p.gain = fading.cnormal();
        p.pathloss_exp = fading.uniform(cfg.pathloss_exp_min, cfg.pathloss_exp_max);
        p.aod = fading.uniform(-M_PI / 2.0, M_PI / 2.0);
      }
      const double rel_dist = std::max(1.0, geom.distance(b, k) / cfg.pathloss_ref_dist_m);
      const auto hv = compose_paths(paths, rel_dist, st.antennas);
      std::copy(hv.begin(), hv.end(), st.vec(b, k));
    }
  }
  return st;
}

ChannelState apply_blockage(const ChannelState& nominal, double q, Rng& blockage) {
  ChannelState out = nominal;
  out.blocked.assign(static_cast<std::size_t>(out.num_rrus) * out.num_ues, 0);
  for (int b = 0; b < out.num_rrus; ++b) {
    for (int k = 0; k < out.num_ues; ++k) {
      if (blockage.bernoulli(q)) {
        out.blocked[static_cast<std::size_t>(b) * out.num_ues + k] = 1;
        cplx* v = out.vec(b, k);
        std::fill(v, v + out.antennas, cplx(0.0, 0.0));
      }
    }
  }
  return out;
}

}  // namespace jtcomp
