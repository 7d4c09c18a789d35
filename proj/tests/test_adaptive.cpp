#include <doctest.h>

#include <cmath>

#include "jtcomp/adaptive.hpp"
#include "jtcomp/rng.hpp"

using namespace jtcomp;

TEST_CASE("success probability closed form") {
  CHECK(success_prob(4, 2, 0.0) == doctest::Approx(1.0));
  CHECK(success_prob(3, 1, 0.0) == doctest::Approx(1.0));
  CHECK(success_prob(4, 2, 0.1) == doctest::Approx(0.9963).epsilon(1e-4));
  CHECK(success_prob(4, 4, 0.5) == doctest::Approx(0.0625));
  CHECK(outage_prob(4, 4, 0.5) == doctest::Approx(0.9375));
  CHECK(outage_prob(4, 1, 0.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(success_prob(4, 0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(success_prob(4, 5, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(success_prob(4, 2, 1.5), std::invalid_argument);
}

TEST_CASE("success probability is nonincreasing in L and rho") {
  for (int n = 1; n <= 8; ++n) {
    for (double rho = 0.0; rho <= 1.0001; rho += 0.125) {
      double prev = 2.0;
      for (int L = 1; L <= n; ++L) {
        const double p = success_prob(n, L, std::min(rho, 1.0));
        CHECK(p <= prev + 1e-12);
        prev = p;
      }
    }
    for (int L = 1; L <= n; ++L) {
      double prev = 2.0;
      for (double rho = 0.0; rho <= 1.0001; rho += 0.0625) {
        const double p = success_prob(n, L, std::min(rho, 1.0));
        CHECK(p <= prev + 1e-12);
        prev = p;
      }
    }
  }
}

TEST_CASE("success probability matches Bernoulli Monte-Carlo") {
  Rng rng(17);
  const int samples = 200000;
  for (double rho : {0.1, 0.5}) {
    for (int L = 1; L <= 4; ++L) {
      int good = 0;
      for (int s = 0; s < samples; ++s) {
        int up = 0;
        for (int link = 0; link < 4; ++link) {
          if (!rng.bernoulli(rho)) ++up;
        }
        if (up >= L) ++good;
      }
      const double mc = static_cast<double>(good) / samples;
      const double p = success_prob(4, L, rho);
      const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / samples);
      CHECK(std::abs(mc - p) <= 3.0 * se + 1e-9);
    }
  }
}

TEST_CASE("subset size selection") {
  CHECK(select_L(4, 0.0, 0.1) == 4);
  CHECK(select_L(4, 0.1, 0.1) == 3);   // p(3)=0.9477 >= 0.9, p(4)=0.6561 < 0.9
  CHECK(select_L(4, 0.9, 0.01) == 1);  // nothing qualifies, conservative fallback
}

TEST_CASE("selection depends only on the threshold crossing") {
  // brute force: the largest feasible L, scanned in any order
  Rng rng(18);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform(0.0, 6.0));
    const double rho = rng.uniform();
    const double eps = rng.uniform(0.01, 0.5);
    int expect = 1;
    for (int L = 1; L <= n; ++L) {
      if (success_prob(n, L, rho) >= 1.0 - eps) expect = L;
    }
    CHECK(select_L(n, rho, eps) == expect);
  }
}

TEST_CASE("blockage estimation from the outage history") {
  OutageRing ring(8);
  CHECK(estimate_blockage(ring, 8, 1).rho == 0.0);          // cold start, default prior
  CHECK(estimate_blockage(ring, 8, 1, 0.25).rho == 0.25);   // configurable prior

  ring.push(true);
  ring.push(false);
  ring.push(true);
  ring.push(false);
  const auto est = estimate_blockage(ring, 8, 5);
  CHECK(est.rho == doctest::Approx(0.5));
  CHECK(est.window == 4);

  for (int i = 0; i < 16; ++i) ring.push(false);
  const auto est2 = estimate_blockage(ring, 8, 21);
  CHECK(est2.rho == 0.0);
  CHECK(est2.window == 8);  // capped by tau
}
