#pragma once
// Blockage estimation from outage history and per-slot serving-subset-size
// selection.

#include "jtcomp/queueing.hpp"

namespace jtcomp {

// Probability that at least L of n independent links survive when each is
// blocked with probability rho.
double success_prob(int n, int L, double rho);

double outage_prob(int n, int L, double rho);

// Largest L in [1, n] whose success probability stays above 1 - eps; falls
// back to 1 when no size qualifies.
int select_L(int n, double rho, double eps);

struct BlockageEstimate {
  double rho = 0.0;  // estimated per-user blockage probability
  int window = 0;    // delta_k actually used
};

// Mean of the last min(tau, t-1) outage indicators; the configured prior is
// returned on the cold-start slot (empty history).
BlockageEstimate estimate_blockage(const OutageRing& history, int tau, int t,
                                   double prior = 0.0);

}  // namespace jtcomp
