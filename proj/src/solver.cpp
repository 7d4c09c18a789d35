#include "jtcomp/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "jtcomp/kernels.hpp"

namespace jtcomp {

namespace {

using Mat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

// largest per-iteration growth of one user's transmit power (20 dB)
constexpr double kPowerGrowth = 100.0;

std::vector<int> active_indices(const SubsetFamily& fam, int antennas) {
  std::vector<int> idx;
  idx.reserve(fam.base.size() * antennas);
  for (int b : fam.base) {
    for (int n = 0; n < antennas; ++n) idx.push_back(b * antennas + n);
  }
  return idx;
}

// Hermitian solve M x = b through a Cholesky factorization; adds the ridge
// up front when V is zero and escalates it if the factorization fails.
// Returns the relative residual ||M x - b|| / ||b||.
double hermitian_solve(Mat& M, const Vec& b, double V, Vec& x) {
  const int dim = static_cast<int>(M.rows());
  double trace = 0.0;
  for (int i = 0; i < dim; ++i) trace += M(i, i).real();
  double ridge = 1e-10 * (1.0 + trace / dim);
  if (V == 0.0) {
    for (int i = 0; i < dim; ++i) M(i, i) += ridge;
  }
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::LLT<Mat, Eigen::Lower> llt(M.rows());
    llt.compute(M);
    if (llt.info() == Eigen::Success) {
      x = llt.solve(b);
      if (x.allFinite()) break;
    }
    for (int i = 0; i < dim; ++i) M(i, i) += ridge;
    ridge *= 100.0;
    x = Vec::Zero(dim);
  }
  const double bn = b.norm();
  if (bn <= 0.0) return 0.0;
  return (M.selfadjointView<Eigen::Lower>() * x - b).norm() / bn;
}

}  // namespace

cplx update_aux_nu(const std::vector<StackedVector>& F, const ChannelState& H, int k,
                   int c, const SubsetFamily& family, double sigma2) {
  const StackedVector hk = build_stacked_channel(H, k, family.excluded_mask[c]);
  const std::size_t n = hk.size();
  const cplx num = kernels::cdot(hk.data(), F[k].data(), n);
  double den = sigma2;
  for (std::size_t u = 0; u < F.size(); ++u) {
    if (static_cast<int>(u) == k) continue;
    den += std::norm(kernels::cdot(hk.data(), F[u].data(), n));
  }
  return num / den;
}

double fp_surrogate(const std::vector<StackedVector>& F, const ChannelState& H, cplx nu,
                    int k, int c, const SubsetFamily& family, double sigma2) {
  const StackedVector hk = build_stacked_channel(H, k, family.excluded_mask[c]);
  const std::size_t n = hk.size();
  const cplx sk = kernels::cdot(hk.data(), F[k].data(), n);
  double den = sigma2;
  for (std::size_t u = 0; u < F.size(); ++u) {
    if (static_cast<int>(u) == k) continue;
    den += std::norm(kernels::cdot(hk.data(), F[u].data(), n));
  }
  return 2.0 * (std::conj(nu) * sk).real() - std::norm(nu) * den;
}

SolverState init_feasible(const ChannelState& H, const std::vector<SubsetFamily>& families,
                          const std::vector<double>& weights, double sigma2, Rng& stream) {
  const int K = static_cast<int>(families.size());
  const int BN = H.num_rrus * H.antennas;
  SolverState st;
  st.f.assign(K, StackedVector(BN, cplx(0.0, 0.0)));
  st.gamma.assign(K, 0.0);
  st.nu.resize(K);
  st.e.resize(K);

  for (int k = 0; k < K; ++k) {
    const int C = families[k].count();
    st.nu[k].assign(C, cplx(0.0, 0.0));
    st.e[k].assign(C, 0.0);
    if (weights[k] <= 0.0) continue;
    const auto act = active_indices(families[k], H.antennas);
    for (int i : act) st.f[k][i] = stream.cnormal();
    const double nrm = std::sqrt(kernels::norm2(st.f[k].data(), st.f[k].size()));
    if (nrm > 0.0) {
      for (int i : act) st.f[k][i] /= nrm;
    }
  }

  for (int k = 0; k < K; ++k) {
    if (weights[k] <= 0.0) continue;
    const int C = families[k].count();
    double gmin = std::numeric_limits<double>::infinity();
    for (int c = 0; c < C; ++c) {
      gmin = std::min(gmin, sinr_subset(st.f, H, k, c, families[k], sigma2));
      st.nu[k][c] = update_aux_nu(st.f, H, k, c, families[k], sigma2);
    }
    st.gamma[k] = gmin;
    const double e0 = weights[k] / (C * (1.0 + gmin));
    std::fill(st.e[k].begin(), st.e[k].end(), e0);
  }
  return st;
}

double kkt_gamma_update(double weight, std::span<const double> duals) {
  double sum = 0.0;
  for (double d : duals) sum += d;
  if (!(sum > 0.0)) {
    throw std::invalid_argument("kkt_gamma_update: dual sum must be positive");
  }
  return std::max(0.0, weight / sum - 1.0);
}

double dual_update(double e, double gamma, double surrogate, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("dual_update: step size must be positive");
  return std::max(0.0, e + beta * (gamma - surrogate));
}

double objective(const std::vector<StackedVector>& F, const std::vector<double>& gamma,
                 const std::vector<double>& weights, double V) {
  double power = 0.0;
  for (const auto& f : F) power += kernels::norm2(f.data(), f.size());
  double utility = 0.0;
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    utility += weights[k] * std::log2(1.0 + gamma[k]);
  }
  return V * power - utility;
}

double kkt_beamformer_update(SolverState& state, const ChannelState& H,
                             const std::vector<SubsetFamily>& families, double V, int k,
                             double sigma2) {
  (void)sigma2;
  const int K = static_cast<int>(families.size());
  const int BN = H.num_rrus * H.antennas;
  const auto act = active_indices(families[k], H.antennas);
  const int a = static_cast<int>(act.size());

  Mat M = Mat::Zero(a, a);
  for (int i = 0; i < a; ++i) M(i, i) = V;
  Vec hg(a);
  for (int u = 0; u < K; ++u) {
    if (u == k) continue;
    for (int c = 0; c < families[u].count(); ++c) {
      const double coeff = state.e[u][c] * std::norm(state.nu[u][c]);
      if (coeff == 0.0) continue;
      const StackedVector hu = build_stacked_channel(H, u, families[u].excluded_mask[c]);
      for (int i = 0; i < a; ++i) hg(i) = hu[act[i]];
      M.selfadjointView<Eigen::Lower>().rankUpdate(hg, coeff);
    }
  }

  Vec b = Vec::Zero(a);
  for (int c = 0; c < families[k].count(); ++c) {
    const cplx s = state.e[k][c] * state.nu[k][c];
    if (s == cplx(0.0, 0.0)) continue;
    const StackedVector hk = build_stacked_channel(H, k, families[k].excluded_mask[c]);
    for (int i = 0; i < a; ++i) b(i) += s * hk[act[i]];
  }

  Vec x(a);
  const double residual = hermitian_solve(M, b, V, x);
  state.f[k].assign(BN, cplx(0.0, 0.0));
  for (int i = 0; i < a; ++i) state.f[k][act[i]] = x(i);
  return residual;
}

namespace {

// Flattened per-(user, subset) caches reused across solver iterations.
struct Workspace {
  int K = 0, BN = 0;
  std::vector<int> offset;  // per-user start into the flat (k,c) arrays
  int total_c = 0;
  std::vector<StackedVector> hmask;    // stacked masked channel per (k,c)
  std::vector<cplx> s;                 // [flat * K + u] = h_k^cH f_u
  std::vector<double> interference;    // per flat: sigma2 + sum_{u != k} |s|^2
  std::vector<double> subset_sinr;     // per flat
  std::vector<double> dual_grad;       // per flat: gamma - surrogate
  std::vector<double> gamma_min;       // per user: min_c subset_sinr
  std::vector<std::vector<int>> active;
  std::vector<StackedVector> probe_mf;    // unit-power seed direction per user
  std::vector<std::vector<cplx>> s_user;  // per-user interference operator, BN x BN
  std::vector<cplx> s_all;

  int flat(int k, int c) const { return offset[k] + c; }
};

// Per-user stacked seed direction: regularized zero-forcing within each
// serving RRU's antenna block, with per-block amplitudes equalized so that
// every surviving-subset hypothesis keeps a comparable desired term.
std::vector<StackedVector> seed_directions(const ChannelState& H,
                                           const std::vector<SubsetFamily>& fams,
                                           double sigma2) {
  const int K = static_cast<int>(fams.size());
  const int N = H.antennas;
  const int BN = H.num_rrus * N;
  std::vector<StackedVector> dirs(K, StackedVector(BN, cplx(0.0, 0.0)));
  Mat reg(N, N);
  Vec rhs(N), sol(N);
  for (int k = 0; k < K; ++k) {
    std::vector<double> amp(fams[k].base.size(), 0.0);
    std::vector<Vec> block(fams[k].base.size());
    for (std::size_t bi = 0; bi < fams[k].base.size(); ++bi) {
      const int b = fams[k].base[bi];
      reg = Mat::Zero(N, N);
      for (int i = 0; i < N; ++i) reg(i, i) = sigma2;
      for (int u = 0; u < K; ++u) {
        if (u == k) continue;
        Eigen::Map<const Vec> hu(H.vec(b, u), N);
        reg.selfadjointView<Eigen::Lower>().rankUpdate(hu, 1.0);
      }
      Eigen::Map<const Vec> hk(H.vec(b, k), N);
      rhs = hk;
      sol = Eigen::LLT<Mat, Eigen::Lower>(reg).solve(rhs);
      const double nrm = sol.norm();
      if (nrm > 0.0) sol /= nrm;
      block[bi] = sol;
      amp[bi] = std::abs(hk.dot(sol));
    }
    double amp_max = 0.0;
    for (double a : amp) amp_max = std::max(amp_max, a);
    if (amp_max <= 0.0) continue;
    double total = 0.0;
    std::vector<double> q(amp.size(), 0.0);
    for (std::size_t bi = 0; bi < amp.size(); ++bi) {
      const double a = std::max(amp[bi], 1e-3 * amp_max);
      q[bi] = 1.0 / (a * a);
      total += q[bi];
    }
    for (std::size_t bi = 0; bi < amp.size(); ++bi) {
      const double scale = std::sqrt(q[bi] / total);
      const int b = fams[k].base[bi];
      for (int n = 0; n < N; ++n) {
        dirs[k][static_cast<std::size_t>(b) * N + n] = scale * block[bi](n);
      }
    }
  }
  return dirs;
}

Workspace make_workspace(const ChannelState& H, const std::vector<SubsetFamily>& fams,
                         double sigma2) {
  Workspace ws;
  ws.K = static_cast<int>(fams.size());
  ws.BN = H.num_rrus * H.antennas;
  ws.offset.resize(ws.K);
  for (int k = 0; k < ws.K; ++k) {
    ws.offset[k] = ws.total_c;
    ws.total_c += fams[k].count();
  }
  ws.hmask.reserve(ws.total_c);
  for (int k = 0; k < ws.K; ++k) {
    for (int c = 0; c < fams[k].count(); ++c) {
      ws.hmask.push_back(build_stacked_channel(H, k, fams[k].excluded_mask[c]));
    }
  }
  ws.s.assign(static_cast<std::size_t>(ws.total_c) * ws.K, cplx(0.0, 0.0));
  ws.interference.assign(ws.total_c, 0.0);
  ws.subset_sinr.assign(ws.total_c, 0.0);
  ws.dual_grad.assign(ws.total_c, 0.0);
  ws.gamma_min.assign(ws.K, 0.0);
  ws.active.resize(ws.K);
  for (int k = 0; k < ws.K; ++k) ws.active[k] = active_indices(fams[k], H.antennas);
  ws.probe_mf = seed_directions(H, fams, sigma2);
  ws.s_user.assign(ws.K, std::vector<cplx>(static_cast<std::size_t>(ws.BN) * ws.BN));
  ws.s_all.assign(static_cast<std::size_t>(ws.BN) * ws.BN, cplx(0.0, 0.0));
  return ws;
}

// refresh s, interference, subset SINRs, and per-user minima for current F
void refresh_ratios(Workspace& ws, const std::vector<StackedVector>& F,
                    const std::vector<bool>& on, double sigma2) {
  for (int k = 0; k < ws.K; ++k) {
    if (!on[k]) continue;
    double gmin = std::numeric_limits<double>::infinity();
    const int count = (k + 1 < ws.K ? ws.offset[k + 1] : ws.total_c) - ws.offset[k];
    for (int c = 0; c < count; ++c) {
      const int fl = ws.flat(k, c);
      const cplx* hk = ws.hmask[fl].data();
      double den = sigma2;
      for (int u = 0; u < ws.K; ++u) {
        const cplx su = kernels::cdot(hk, F[u].data(), ws.BN);
        ws.s[static_cast<std::size_t>(fl) * ws.K + u] = su;
        if (u != k) den += std::norm(su);
      }
      ws.interference[fl] = den;
      const double g = std::norm(ws.s[static_cast<std::size_t>(fl) * ws.K + k]) / den;
      ws.subset_sinr[fl] = g;
      gmin = std::min(gmin, g);
    }
    ws.gamma_min[k] = gmin;
  }
}

}  // namespace

namespace {

// Feasible starting point built from matched-filter directions and a damped
// Jacobi power-control iteration on the scalarized subset-SINR game. The
// loop only polishes from here, so the quality of this seed bounds the
// returned solution from below.
void seed_power_control(const Workspace& ws, const std::vector<SubsetFamily>& families,
                        const std::vector<double>& weights, double V, double sigma2,
                        const std::vector<bool>& on, double power_cap,
                        std::vector<StackedVector>& f_out) {
  const int K = ws.K;
  // gain tables at fixed directions: a[(fl)u] = |h_k^cH d_u|^2
  std::vector<double> gain(static_cast<std::size_t>(ws.total_c) * K, 0.0);
  for (int k = 0; k < K; ++k) {
    if (!on[k]) continue;
    for (int c = 0; c < families[k].count(); ++c) {
      const int fl = ws.flat(k, c);
      for (int u = 0; u < K; ++u) {
        if (!on[u]) continue;
        gain[static_cast<std::size_t>(fl) * K + u] = std::norm(
            kernels::cdot(ws.hmask[fl].data(), ws.probe_mf[u].data(),
                          static_cast<std::size_t>(ws.BN)));
      }
    }
  }
  std::vector<double> p(K, 0.0), p_next(K, 0.0);
  for (int round = 0; round < 25; ++round) {
    for (int k = 0; k < K; ++k) {
      if (!on[k]) continue;
      // slope of the pessimistic SINR in this user's own power
      double slope = std::numeric_limits<double>::infinity();
      for (int c = 0; c < families[k].count(); ++c) {
        const int fl = ws.flat(k, c);
        double denom = sigma2;
        for (int u = 0; u < K; ++u) {
          if (u != k) denom += p[u] * gain[static_cast<std::size_t>(fl) * K + u];
        }
        slope = std::min(slope, gain[static_cast<std::size_t>(fl) * K + k] / denom);
      }
      if (!(slope > 0.0) || !std::isfinite(slope)) {
        p_next[k] = 0.0;
        continue;
      }
      // optimum of V p - w ln(1 + p slope) at fixed interference
      const double ideal = (weights[k] * slope / std::max(V, 1e-12) - 1.0) / slope;
      p_next[k] = std::clamp(ideal, 0.0, power_cap);
    }
    for (int k = 0; k < K; ++k) p[k] = 0.5 * p[k] + 0.5 * p_next[k];
  }
  for (int k = 0; k < K; ++k) {
    f_out[k].assign(static_cast<std::size_t>(ws.BN), cplx(0.0, 0.0));
    if (!on[k] || p[k] <= 0.0) continue;
    const double amp = std::sqrt(p[k]);
    for (int i : ws.active[k]) f_out[k][i] = amp * ws.probe_mf[k][i];
  }
}

}  // namespace

SolveResult solve_subproblem(const std::vector<double>& weights, const ChannelState& H,
                             const std::vector<SubsetFamily>& families, double V,
                             const SolverOpts& opts, Rng& init_stream) {
  const int K = static_cast<int>(families.size());
  if (static_cast<int>(weights.size()) != K || H.num_ues != K) {
    throw std::invalid_argument("solve_subproblem: inconsistent user counts");
  }
  const int BN = H.num_rrus * H.antennas;
  const double sigma2 = opts.sigma2;

  SolveResult res;
  res.kkt_residual.assign(
      [&] {
        std::size_t t = 0;
        for (const auto& f : families) t += f.count();
        return t;
      }(),
      0.0);

  std::vector<bool> on(K);
  bool any_on = false;
  for (int k = 0; k < K; ++k) {
    on[k] = weights[k] > 0.0;
    any_on = any_on || on[k];
  }
  res.f.assign(K, StackedVector(BN, cplx(0.0, 0.0)));
  res.gamma.assign(K, 0.0);
  if (!any_on) {
    res.converged = true;
    return res;  // power-only objective: all-zero beamformers are optimal
  }

  Workspace ws = make_workspace(H, families, sigma2);

  // any iterate spending more than this total power is provably worse than
  // the all-zero solution: V*P > sum_k w_k log2(1 + P g_max / sigma2)
  double power_cap = std::numeric_limits<double>::infinity();
  if (V > 0.0) {
    double g_max = 0.0;
    double w_sum = 0.0;
    for (int k = 0; k < K; ++k) {
      if (!on[k]) continue;
      const StackedVector hk = build_stacked_channel(H, k, 0);
      g_max = std::max(g_max, kernels::norm2(hk.data(), hk.size()));
      w_sum += weights[k];
    }
    double lo = 1.0, hi = 1.0;
    auto margin = [&](double p) {
      return w_sum * std::log2(1.0 + p * g_max / sigma2) - V * p;
    };
    while (margin(hi) > 0.0 && hi < 1e300) hi *= 2.0;
    for (int it2 = 0; it2 < 200 && hi / lo > 1.0001; ++it2) {
      const double mid = std::sqrt(lo * hi);
      (margin(mid) > 0.0 ? lo : hi) = mid;
    }
    power_cap = hi;
  }
  // no feasible target can beat the interference-free SINR at the power cap
  std::vector<double> target_cap(K, 1e12);
  if (std::isfinite(power_cap)) {
    for (int k = 0; k < K; ++k) {
      if (!on[k]) continue;
      const StackedVector hk = build_stacked_channel(H, k, 0);
      target_cap[k] = power_cap * kernels::norm2(hk.data(), hk.size()) / sigma2;
    }
  }

  struct Best {
    std::vector<StackedVector> f;
    std::vector<double> gamma;
    double objective = std::numeric_limits<double>::infinity();
    double returned_objective = std::numeric_limits<double>::infinity();
    int iteration = -1;
    bool valid = false;
  } best;

  SolverState st;
  // candidates are scored at the pessimistic SINR their vectors support
  // (the rate cap the controller could assign for them); the kept targets
  // are the iterate's own, clamped into feasibility
  auto consider_state = [&](int iteration) {
    std::vector<double> g_score(K, 0.0), g_ret(K, 0.0);
    for (int k = 0; k < K; ++k) {
      if (!on[k]) continue;
      g_score[k] = ws.gamma_min[k];
      g_ret[k] = std::min(st.gamma[k], ws.gamma_min[k]);
    }
    const double obj = objective(st.f, g_score, weights, V);
    if (std::isfinite(obj) && obj < best.objective) {
      best.f = st.f;
      best.returned_objective = objective(st.f, g_ret, weights, V);
      best.gamma = std::move(g_ret);
      best.objective = obj;
      best.iteration = iteration;
      best.valid = true;
    }
    return obj;
  };
  // derive targets, auxiliaries, and duals from the current vectors the way
  // the feasible initialization does
  auto complete_state_from_vectors = [&]() {
    refresh_ratios(ws, st.f, on, sigma2);
    for (int k = 0; k < K; ++k) {
      if (!on[k]) continue;
      st.gamma[k] = ws.gamma_min[k];
      const double e0 = weights[k] / (families[k].count() * (1.0 + st.gamma[k]));
      for (int c = 0; c < families[k].count(); ++c) {
        const int fl = ws.flat(k, c);
        st.e[k][c] = e0;
        st.nu[k][c] = ws.s[static_cast<std::size_t>(fl) * K + k] / ws.interference[fl];
      }
    }
  };

  // power-controlled matched-filter seed; it doubles as the floor candidate
  st.f.assign(K, StackedVector(BN, cplx(0.0, 0.0)));
  st.gamma.assign(K, 0.0);
  st.nu.resize(K);
  st.e.resize(K);
  for (int k = 0; k < K; ++k) {
    st.nu[k].assign(families[k].count(), cplx(0.0, 0.0));
    st.e[k].assign(families[k].count(), 0.0);
  }
  seed_power_control(ws, families, weights, V, sigma2, on, power_cap, st.f);
  bool have_seed = false;
  for (const auto& f : st.f) {
    have_seed = have_seed || kernels::norm2(f.data(), f.size()) > 0.0;
  }
  if (!have_seed) {
    st = init_feasible(H, families, weights, sigma2, init_stream);
  }
  complete_state_from_vectors();
  st.weights = weights;
  consider_state(0);

  // a carried-over solution competes with the seed for the starting point
  bool warm = false;
  if (opts.warm_start != nullptr && static_cast<int>(opts.warm_start->f.size()) == K) {
    warm = static_cast<int>(opts.warm_start->weights.size()) == K;
    for (int k = 0; warm && k < K; ++k) {
      warm = static_cast<int>(opts.warm_start->f[k].size()) == BN &&
             static_cast<int>(opts.warm_start->e[k].size()) == families[k].count();
    }
  }
  if (warm) {
    const double seed_obj = best.valid ? best.objective
                                       : std::numeric_limits<double>::infinity();
    SolverState seed = std::move(st);
    st = *opts.warm_start;
    for (int k = 0; k < K; ++k) {
      if (!on[k]) {
        std::fill(st.f[k].begin(), st.f[k].end(), cplx(0.0, 0.0));
        st.gamma[k] = 0.0;
        std::fill(st.e[k].begin(), st.e[k].end(), 0.0);
        std::fill(st.nu[k].begin(), st.nu[k].end(), cplx(0.0, 0.0));
      }
    }
    complete_state_from_vectors();
    st.weights = weights;
    const double warm_obj = consider_state(0);
    if (!(warm_obj < seed_obj)) {
      st = std::move(seed);
      refresh_ratios(ws, st.f, on, sigma2);
    }
  }

  const Best starting_candidate = best;

  Mat M;
  Vec b, x;
  double prev_obj = best.valid ? best.objective : 0.0;
  int streak = 0;
  int iter = 0;
  double last_stationarity = 0.0;
  std::vector<double> prev_power(K, 0.0);
  for (int k = 0; k < K; ++k) {
    prev_power[k] = kernels::norm2(st.f[k].data(), st.f[k].size());
  }

  for (iter = 1; iter <= opts.max_iters; ++iter) {
    // The auxiliaries stay fixed for a handful of beamformer/dual passes so
    // each round works the convex subproblem they define; refreshing them
    // every pass couples two loops whose joint power scale is neutrally
    // stable and drifts apart at these gain spreads.
    double dual_best = -std::numeric_limits<double>::infinity();
    double dual_margin = -1.0;
    for (int pass = 0; pass < std::max(1, opts.inner_passes); ++pass) {
      // (1) interference operators from the current duals/auxiliaries
      std::fill(ws.s_all.begin(), ws.s_all.end(), cplx(0.0, 0.0));
      for (int u = 0; u < K; ++u) {
        auto& su = ws.s_user[u];
        std::fill(su.begin(), su.end(), cplx(0.0, 0.0));
        if (!on[u]) continue;
        for (int c = 0; c < families[u].count(); ++c) {
          const double coeff = st.e[u][c] * std::norm(st.nu[u][c]);
          if (coeff == 0.0) continue;
          kernels::rank1_herm_update(su.data(), ws.hmask[ws.flat(u, c)].data(), coeff,
                                     BN);
        }
        for (std::size_t i = 0; i < ws.s_all.size(); ++i) ws.s_all[i] += su[i];
      }

      // (2) closed-form beamformer refresh, all users against one snapshot
      last_stationarity = 0.0;
      for (int k = 0; k < K; ++k) {
        if (!on[k]) continue;
        const auto& act = ws.active[k];
        const int a = static_cast<int>(act.size());
        M.resize(a, a);
        const auto& sk = ws.s_user[k];
        for (int j = 0; j < a; ++j) {
          const std::size_t col = static_cast<std::size_t>(act[j]);
          for (int i = 0; i < a; ++i) {
            const std::size_t row = static_cast<std::size_t>(act[i]);
            M(i, j) = ws.s_all[row * BN + col] - sk[row * BN + col];
          }
          M(j, j) += V;
        }
        b = Vec::Zero(a);
        for (int c = 0; c < families[k].count(); ++c) {
          const cplx scale = st.e[k][c] * st.nu[k][c];
          if (scale == cplx(0.0, 0.0)) continue;
          const auto& hk = ws.hmask[ws.flat(k, c)];
          for (int i = 0; i < a; ++i) b(i) += scale * hk[act[i]];
        }
        const double r = hermitian_solve(M, b, V, x);
        last_stationarity = std::max(last_stationarity, r);
        std::fill(st.f[k].begin(), st.f[k].end(), cplx(0.0, 0.0));
        for (int i = 0; i < a; ++i) st.f[k][act[i]] = x(i);
      }

      // trust region on the per-user power step: a dual mis-scale otherwise
      // amplifies geometrically before the subgradient can correct it
      for (int k = 0; k < K; ++k) {
        if (!on[k]) continue;
        const double p_new = kernels::norm2(st.f[k].data(), st.f[k].size());
        const double p_cap = std::min(
            kPowerGrowth * std::max(prev_power[k], 1e-3 * sigma2), power_cap);
        if (p_new > p_cap) {
          const double scale = std::sqrt(p_cap / p_new);
          for (auto& v : st.f[k]) v *= scale;
          prev_power[k] = p_cap;
        } else {
          prev_power[k] = p_new;
        }
      }

      // (3) subset SINRs at the refreshed beamformers
      refresh_ratios(ws, st.f, on, sigma2);

      // (4) targets from the dual sums, then a projected dual ascent step.
      // One (33a)/(33b) pass minimizes the Lagrangian exactly for fixed
      // duals and auxiliaries, so the constraint residuals form an exact
      // subgradient of the dual function; a Polyak-style step self-scales
      // across the widely different subset-constraint magnitudes.
      double dual_value = 0.0;
      double dir_deriv = 0.0;  // <g, d> for the preconditioned direction d
      for (int k = 0; k < K; ++k) {
        if (!on[k]) continue;
        // targets beyond the interference-free bound are transients of a
        // collapsed dual sum; clamping them keeps the subgradient bounded
        st.gamma[k] = std::min(kkt_gamma_update(weights[k], st.e[k]), target_cap[k]);
        dual_value += V * kernels::norm2(st.f[k].data(), st.f[k].size()) -
                      weights[k] * std::log1p(st.gamma[k]);
        for (int c = 0; c < families[k].count(); ++c) {
          const int fl = ws.flat(k, c);
          const cplx sk = ws.s[static_cast<std::size_t>(fl) * K + k];
          const cplx nu = st.nu[k][c];
          const double surr = 2.0 * (std::conj(nu) * sk).real() -
                              std::norm(nu) * ws.interference[fl];
          const double resid = st.gamma[k] - surr;
          // the constraint scales differ by orders of magnitude, so ascend
          // along a diagonally preconditioned direction
          const double dir = resid / (1.0 + st.gamma[k] + std::abs(surr));
          ws.dual_grad[fl] = dir;
          dual_value += st.e[k][c] * resid;
          dir_deriv += resid * dir;
        }
      }
      if (dual_margin < 0.0) {
        dual_margin = 0.05 * (1.0 + std::abs(dual_value)) * (opts.step_size / 0.01);
      }
      if (dual_value > dual_best) {
        dual_best = dual_value;
      } else {
        dual_margin *= 0.7;
      }
      const double ascent = std::max(0.0, dual_best + dual_margin - dual_value) /
                            std::max(dir_deriv, 1e-300);
      if (const char* dbg = std::getenv("JTCOMP_SOLVER_DEBUG");
          dbg != nullptr && dbg[0] == '2') {
        std::fprintf(stderr,
                     "  round %d pass %d L=%.6g best=%.6g margin=%.4g gd=%.4g "
                     "alpha=%.4g g0=%.4g\n",
                     iter, pass, dual_value, dual_best, dual_margin, dir_deriv,
                     ascent, st.gamma[0]);
      }
      for (int k = 0; k < K; ++k) {
        if (!on[k]) continue;
        double new_sum = 0.0;
        for (int c = 0; c < families[k].count(); ++c) {
          double delta = ascent * ws.dual_grad[ws.flat(k, c)];
          // keep single moves commensurate with the dual's own scale
          const double move_cap =
              0.5 * st.e[k][c] + 0.2 * weights[k] / families[k].count();
          delta = std::clamp(delta, -move_cap, move_cap);
          // the dual optimum satisfies sum_c e = w/(1+gamma) <= w, so the
          // projection box [0, w] still contains it
          st.e[k][c] =
              std::min(std::max(0.0, st.e[k][c] + delta), weights[k]);
          new_sum += st.e[k][c];
        }
        if (new_sum <= 0.0) {
          // keep the dual sum positive at the scale of its stationary value
          const double base = weights[k] / (families[k].count() * (1.0 + st.gamma[k]));
          for (auto& v : st.e[k]) v = std::max(v, 0.5 * base);
        }
      }
    }

    // (5) auxiliaries at the refreshed beamformers. A user whose ratios all
    // collapsed would freeze at a zero-rate stationary point (zero auxiliary
    // means zero numerator forever); the surrogate stays valid at any
    // auxiliary, so starved users get theirs from a unit-power matched
    // filter probed against the current interference field instead.
    double gamma_ceiling = 0.0;
    for (int k = 0; k < K; ++k) {
      if (on[k]) gamma_ceiling = std::max(gamma_ceiling, ws.gamma_min[k]);
    }
    for (int k = 0; k < K; ++k) {
      if (!on[k]) continue;
      const bool starved = ws.gamma_min[k] < 1e-6 * (1.0 + gamma_ceiling);
      for (int c = 0; c < families[k].count(); ++c) {
        const int fl = ws.flat(k, c);
        if (!starved) {
          st.nu[k][c] =
              ws.s[static_cast<std::size_t>(fl) * K + k] / ws.interference[fl];
        } else {
          const cplx probe = kernels::cdot(ws.hmask[fl].data(), ws.probe_mf[k].data(),
                                           static_cast<std::size_t>(BN));
          st.nu[k][c] = probe / ws.interference[fl];
        }
      }
    }

    // the streak tracks the feasibility-projected objective so stalls in an
    // infeasible corner do not count as convergence
    const double obj = consider_state(iter);
    if (std::isfinite(obj) && std::isfinite(prev_obj) &&
        std::abs(obj - prev_obj) < opts.tolerance * std::max(1.0, std::abs(obj))) {
      ++streak;
    } else {
      streak = 0;
    }
    prev_obj = obj;

    if (std::getenv("JTCOMP_SOLVER_DEBUG") != nullptr) {
      double p = 0.0;
      for (const auto& f : st.f) p += kernels::norm2(f.data(), f.size());
      double esum0 = 0.0;
      for (double e : st.e[0]) esum0 += e;
      std::fprintf(stderr,
                   "it %3d P=%10.4g g0=%8.4g minG0=%8.4g esum0=%8.4g obj=%10.6g\n",
                   iter, p, st.gamma[0], ws.gamma_min[0], esum0,
                   objective(st.f, st.gamma, weights, V));
    }
    if (opts.trace != nullptr) {
      double max_cs = 0.0;
      for (int k = 0; k < K; ++k) {
        if (!on[k]) continue;
        for (int c = 0; c < families[k].count(); ++c) {
          const int fl = ws.flat(k, c);
          max_cs = std::max(max_cs, std::abs(st.e[k][c] *
                                             (st.gamma[k] - ws.subset_sinr[fl])));
        }
      }
      (*opts.trace) << iter << ',' << obj << ',' << max_cs << '\n';
    }

    if (iter >= opts.min_iters) {
      if (streak >= opts.patience) {
        res.converged = true;
        break;
      }
      const bool improved_once = best.iteration > 0;
      if (best.valid && (improved_once || iter >= 2 * opts.min_iters) &&
          iter - std::max(best.iteration, 0) >= opts.staleness) {
        res.converged = true;  // best iterate stopped improving
        break;
      }
    }
  }
  res.iterations = std::min(iter, opts.max_iters);
  res.stationarity_residual = last_stationarity;
  st.iteration = res.iterations;
  res.state = st;

  // complementary slackness at the final iterate: the optimal auxiliary makes
  // the surrogate equal the subset SINR, so the residual is e * (gamma - SINR)
  for (int k = 0; k < K; ++k) {
    if (!on[k]) continue;
    for (int c = 0; c < families[k].count(); ++c) {
      const int fl = ws.flat(k, c);
      res.kkt_residual[fl] =
          std::abs(st.e[k][c] * (st.gamma[k] - ws.subset_sinr[fl]));
    }
  }

  if (best.valid) {
    if (starting_candidate.valid &&
        starting_candidate.returned_objective < best.returned_objective) {
      best = starting_candidate;
    }
    res.f = std::move(best.f);
    res.gamma = std::move(best.gamma);
    res.objective = best.returned_objective;
  } else {
    // defensive fallback: last vectors with their own pessimistic targets
    refresh_ratios(ws, st.f, on, sigma2);
    res.f = st.f;
    for (int k = 0; k < K; ++k) res.gamma[k] = on[k] ? ws.gamma_min[k] : 0.0;
    res.objective = objective(res.f, res.gamma, weights, V);
    res.converged = false;
  }
  return res;
}

}  // namespace jtcomp
