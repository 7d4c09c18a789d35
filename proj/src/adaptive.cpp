#include "jtcomp/adaptive.hpp"

#include <cmath>
#include <stdexcept>

namespace jtcomp {

double success_prob(int n, int L, double rho) {
  if (n < 1 || L < 1 || L > n) {
    throw std::invalid_argument("success_prob: require 1 <= L <= n");
  }
  if (rho < 0.0 || rho > 1.0) {
    throw std::invalid_argument("success_prob: rho must lie in [0,1]");
  }
  double p = 0.0;
  double binom = 1.0;
  for (int l = 0; l <= n - L; ++l) {
    p += binom * std::pow(1.0 - rho, n - l) * std::pow(rho, l);
    binom = binom * (n - l) / (l + 1);
  }
  return std::min(1.0, std::max(0.0, p));
}

double outage_prob(int n, int L, double rho) { return 1.0 - success_prob(n, L, rho); }

int select_L(int n, double rho, double eps) {
  for (int L = n; L >= 1; --L) {
    if (success_prob(n, L, rho) >= 1.0 - eps) return L;
  }
  return 1;  // most conservative fallback
}

BlockageEstimate estimate_blockage(const OutageRing& history, int tau, int t,
                                   double prior) {
  BlockageEstimate est;
  const int window = std::min(tau, t - 1);
  if (window <= 0 || history.size() == 0) {
    est.rho = prior;
    est.window = 0;
    return est;
  }
  // the ring holds at most tau entries, so its content is the last
  // min(tau, t-1) indicators
  est.rho = history.mean();
  est.window = history.size();
  return est;
}

}  // namespace jtcomp
