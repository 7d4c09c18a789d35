#pragma once
// Per-slot weighted subproblem solver: quadratic-transform surrogate around
// the SINR ratios plus a closed-form KKT/subgradient iteration over stacked
// beamformers, SINR targets, auxiliaries, and constraint duals.

#include <iosfwd>
#include <span>
#include <vector>

#include "jtcomp/blockage_sets.hpp"
#include "jtcomp/rng.hpp"

namespace jtcomp {

struct SolverState;

struct SolverOpts {
  int max_iters = 100;      // cap on auxiliary rounds
  int inner_passes = 4;     // beamformer/dual passes per auxiliary round
  double tolerance = 1e-4;  // relative objective-change tolerance
  int patience = 5;         // consecutive small-change rounds before stop
  int min_iters = 30;       // rounds before any stopping rule may fire
  int staleness = 15;       // stop when the best iterate is this stale
  double step_size = 0.01;  // beta_e
  double sigma2 = 1.0;
  std::ostream* trace = nullptr;  // per-round "iter,objective,residual" rows
  // previous solution to continue from; the random feasible initialization
  // is used when absent or dimensionally incompatible
  const SolverState* warm_start = nullptr;
};

struct SolverState {
  std::vector<StackedVector> f;        // stacked beamformers, one per user
  std::vector<double> gamma;           // SINR targets
  std::vector<std::vector<cplx>> nu;   // auxiliaries per (user, subset)
  std::vector<std::vector<double>> e;  // nonnegative duals per (user, subset)
  std::vector<double> weights;         // weights the state was solved under
  int iteration = 0;
};

struct SolveResult {
  std::vector<StackedVector> f;
  std::vector<double> gamma;
  double objective = 0.0;
  // complementary-slackness residuals |e*(gamma - surrogate)| per (user,
  // subset), flattened user-major, at the final iterate
  std::vector<double> kkt_residual;
  // max relative ||M f - b|| over users, measured right after the last
  // beamformer update
  double stationarity_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  // final iterate, usable as the next slot's warm start
  SolverState state;
};

// Random unit-power beamformers on the active blocks, pessimistic-SINR
// targets, auxiliaries from the ratio optimum, and duals spread so that
// sum_c e_{k,c} = w_k / (1 + gamma_k) holds exactly at the start.
SolverState init_feasible(const ChannelState& H, const std::vector<SubsetFamily>& families,
                          const std::vector<double>& weights, double sigma2, Rng& stream);

// Optimal auxiliary for one (user, subset) ratio at the current beamformers.
cplx update_aux_nu(const std::vector<StackedVector>& F, const ChannelState& H, int k,
                   int c, const SubsetFamily& family, double sigma2);

// Concave quadratic surrogate of the SINR ratio at a fixed auxiliary.
double fp_surrogate(const std::vector<StackedVector>& F, const ChannelState& H, cplx nu,
                    int k, int c, const SubsetFamily& family, double sigma2);

// Closed-form beamformer update for user k on its active subspace; the other
// users' duals and auxiliaries enter through the Hermitian system matrix.
// Returns the relative stationarity residual of the refreshed vector.
double kkt_beamformer_update(SolverState& state, const ChannelState& H,
                             const std::vector<SubsetFamily>& families, double V, int k,
                             double sigma2);

// gamma = w / sum(duals) - 1, floored at zero. Throws std::invalid_argument
// when the dual sum is not positive.
double kkt_gamma_update(double weight, std::span<const double> duals);

// Projected subgradient step on one dual.
double dual_update(double e, double gamma, double surrogate, double beta);

// V * sum ||f||^2 - sum w_k log2(1 + gamma_k)
double objective(const std::vector<StackedVector>& F, const std::vector<double>& gamma,
                 const std::vector<double>& weights, double V);

// Full solve of the per-slot subproblem; returns the best feasible iterate
// with the target clamped to the pessimistic SINR of the returned vectors.
SolveResult solve_subproblem(const std::vector<double>& weights, const ChannelState& H,
                             const std::vector<SubsetFamily>& families, double V,
                             const SolverOpts& opts, Rng& init_stream);

}  // namespace jtcomp
