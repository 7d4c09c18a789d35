// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. JTCOMP_ACCEPT_PROFILE selects the scenario scale:
//   ci   (default): N=8,  T=500,  R=5
//   desk          : N=16, T=2000, R=20

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "jtcomp/blockage_sets.hpp"
#include "jtcomp/channel.hpp"
#include "jtcomp/harness.hpp"
#include "jtcomp/kernels.hpp"
#include "jtcomp/solver.hpp"

using namespace jtcomp;

namespace {

struct Profile {
  const char* name;
  int antennas;
  int slots;
  int reps;
};

Profile select_profile() {
  const char* env = std::getenv("JTCOMP_ACCEPT_PROFILE");
  if (env != nullptr && std::strcmp(env, "desk") == 0) {
    return {"desk", 16, 2000, 20};
  }
  return {"ci", 8, 500, 5};
}

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

struct PolicyRun {
  std::string label;
  RunSummary summary;
  std::vector<SlotRow> rows;  // kept only where a criterion needs them
};

class RunCache {
 public:
  RunCache(const Profile& profile) : profile_(profile) {}

  ScenarioConfig base_config() const {
    ScenarioConfig cfg;
    cfg.antennas_per_rru = profile_.antennas;
    cfg.num_slots = profile_.slots;
    cfg.blockage_prob = 0.1;
    cfg.master_seed = 1;
    return cfg;
  }

  const PolicyRun& get(const std::string& policy, int L, double V, bool keep_rows) {
    std::ostringstream key;
    key << policy << '/' << L << '/' << V;
    auto it = cache_.find(key.str());
    if (it != cache_.end() && (!keep_rows || !it->second.rows.empty())) {
      return it->second;
    }

    ScenarioConfig cfg = base_config();
    cfg.tradeoff_v = V;
    if (policy == "fixed") {
      cfg.serving_set_policy = ServingPolicy::FixedL;
      cfg.subset_param_l = L;
    } else {
      cfg.serving_set_policy = parse_policy(policy);
    }
    validate(cfg);

    RunOptions opts;
    opts.replications = profile_.reps;
    opts.keep_rows = keep_rows;
    const RunResult res = run_simulation(cfg, opts);

    PolicyRun run;
    run.label = key.str();
    run.summary = res.summary;
    run.rows = std::move(const_cast<RunResult&>(res).rows);
    std::printf("  [run %s] avg power %.4g mW (%.2f dBm), max Pr{Q>=th} %.4f\n",
                run.label.c_str(), run.summary.avg_sum_power_mw,
                run.summary.avg_sum_power_dbm,
                *std::max_element(run.summary.prob_queue_exceed.begin(),
                                  run.summary.prob_queue_exceed.end()));
    std::fflush(stdout);
    auto [pos, _] = cache_.insert_or_assign(key.str(), std::move(run));
    return pos->second;
  }

 private:
  Profile profile_;
  std::map<std::string, PolicyRun> cache_;
};

struct PolicySpec {
  std::string policy;
  int L;
};

const std::vector<PolicySpec> kPolicies = {
    {"fixed", 1}, {"fixed", 2}, {"fixed", 3},
    {"cb_baseline", 0}, {"full_jt_baseline", 0}, {"dynamic", 0},
};

// ---- criteria ---------------------------------------------------------------

void criterion_latency(RunCache& cache) {
  bool pass = true;
  std::ostringstream detail;
  for (const auto& spec : kPolicies) {
    const auto& run = cache.get(spec.policy, spec.L, 1.0, false);
    const double worst = *std::max_element(run.summary.prob_queue_exceed.begin(),
                                           run.summary.prob_queue_exceed.end());
    detail << run.label << "=" << worst << ' ';
    pass = pass && worst <= 0.12;
  }
  report(1, pass, "Pr{Q>=5} per policy: " + detail.str());
}

void criterion_power_gaps(RunCache& cache) {
  const double p_l2 = cache.get("fixed", 2, 1.0, false).summary.avg_sum_power_mw;
  const double p_cb = cache.get("cb_baseline", 0, 1.0, false).summary.avg_sum_power_mw;
  const double p_jt =
      cache.get("full_jt_baseline", 0, 1.0, false).summary.avg_sum_power_mw;
  const bool order = p_l2 < p_cb && p_cb < p_jt;
  const double gap_cb = 10.0 * std::log10(p_cb / p_l2);
  const double gap_jt = 10.0 * std::log10(p_jt / p_l2);
  const bool gaps = gap_cb >= 5.0 && gap_cb <= 11.0 && gap_jt >= 14.0 && gap_jt <= 22.0;
  std::ostringstream detail;
  detail << "P(L2)=" << p_l2 << " P(CB)=" << p_cb << " P(JT)=" << p_jt
         << " gapCB=" << gap_cb << "dB gapJT=" << gap_jt << "dB";
  report(2, order && gaps, detail.str());
}

void criterion_v_monotonicity(RunCache& cache) {
  const std::vector<double> vs = {0.1, 1.0, 10.0};
  bool pass = true;
  std::ostringstream detail;
  for (const auto& spec : kPolicies) {
    double prev_dbm = std::numeric_limits<double>::infinity();
    for (double v : vs) {
      const double p = cache.get(spec.policy, spec.L, v, false).summary.avg_sum_power_mw;
      const double dbm = 10.0 * std::log10(p);
      if (std::isfinite(prev_dbm) && dbm > prev_dbm + 0.5) {
        pass = false;
        detail << spec.policy << spec.L << "@V=" << v << " rose " << dbm - prev_dbm
               << "dB ";
      }
      prev_dbm = dbm;
    }
  }
  report(3, pass, pass ? "power nonincreasing in V for every policy" : detail.str());
}

void criterion_outage(RunCache& cache) {
  const auto& jt = cache.get("full_jt_baseline", 0, 1.0, false).summary;
  const auto& l2 = cache.get("fixed", 2, 1.0, false).summary;
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
  };
  const double out_jt = mean(jt.outage_rate);
  const double out_l2 = mean(l2.outage_rate);
  const bool pass = out_jt >= 0.25 && out_jt <= 0.45 && out_l2 < 0.02;
  std::ostringstream detail;
  detail << "outage(L=4)=" << out_jt << " outage(L=2)=" << out_l2;
  report(4, pass, detail.str());
}

void criterion_blockage_estimator(RunCache& cache, const Profile& profile) {
  const auto& run = cache.get("full_jt_baseline", 0, 1.0, true);
  const int K = 4;
  const int t_ref = std::min(500, profile.slots - 1);
  const ScenarioConfig cfg = cache.base_config();
  const int tau = cfg.averaging_window_slots;
  const int window = std::min(tau, t_ref);

  // per user, averaged across replications: estimator at t_ref against an
  // offline recount of the same logged outage flags
  std::vector<double> est(K, 0.0), recount(K, 0.0);
  int reps = 0;
  std::map<int, std::vector<const SlotRow*>> by_rep;
  for (const auto& row : run.rows) by_rep[row.replication].push_back(&row);
  for (const auto& [rep, rows] : by_rep) {
    ++reps;
    for (int k = 0; k < K; ++k) {
      est[k] += rows[t_ref]->blockage_est[k];
      double sum = 0.0;
      for (int t = t_ref - window; t < t_ref; ++t) sum += rows[t]->outage[k];
      recount[k] += sum / window;
    }
  }
  bool pass = true;
  std::ostringstream detail;
  for (int k = 0; k < K; ++k) {
    const double diff = std::abs(est[k] / reps - recount[k] / reps);
    detail << "u" << k << "=" << diff << ' ';
    pass = pass && diff <= 0.05;
  }
  report(5, pass, "|rho_est - outage recount| per user: " + detail.str());
}

void criterion_proposition1() {
  Rng rng(501);
  double worst = 0.0;
  int done = 0;
  for (int trial = 0; done < 1000; ++trial) {
    const int B = 2, K = 2, N = 2;
    ChannelState H;
    H.num_rrus = B;
    H.num_ues = K;
    H.antennas = N;
    H.h.resize(static_cast<std::size_t>(B) * K * N);
    for (auto& v : H.h) v = rng.cnormal();
    std::vector<StackedVector> F(K, StackedVector(static_cast<std::size_t>(B) * N));
    for (auto& f : F) {
      for (auto& v : f) v = rng.cnormal();
    }
    const auto fam = enumerate_subsets({0, 1}, 1);
    for (int k = 0; k < K && done < 1000; ++k) {
      for (int c = 0; c < fam.count() && done < 1000; ++c, ++done) {
        const double ratio = sinr_subset(F, H, k, c, fam, 1.0);
        const cplx nu = update_aux_nu(F, H, k, c, fam, 1.0);
        const double surr = fp_surrogate(F, H, nu, k, c, fam, 1.0);
        worst = std::max(worst, std::abs(ratio - surr));
      }
    }
  }
  std::ostringstream detail;
  detail << "max |ratio - surrogate(nu*)| = " << worst << " over 1000 instances";
  report(6, worst <= 1e-9, detail.str());
}

void criterion_kkt() {
  // random small instances
  double worst_stationarity = 0.0, worst_cs = 0.0;
  int converged = 0;
  Rng seeder(601);
  for (int trial = 0; trial < 100; ++trial) {
    const int B = 2, K = 2, N = 2;
    ChannelState H;
    H.num_rrus = B;
    H.num_ues = K;
    H.antennas = N;
    H.h.resize(static_cast<std::size_t>(B) * K * N);
    Rng hr(7000 + trial);
    for (auto& v : H.h) v = hr.cnormal();
    std::vector<SubsetFamily> fams(K);
    for (int k = 0; k < K; ++k) {
      fams[k] = enumerate_subsets({0, 1}, 1);
      fams[k].user = k;
    }
    Rng wr(7100 + trial);
    const std::vector<double> w = {wr.uniform(0.5, 5.0), wr.uniform(0.5, 5.0)};
    SolverOpts opts;
    opts.sigma2 = 1.0;
    opts.max_iters = 6000;
    opts.tolerance = 1e-8;
    opts.patience = 20;
    Rng stream(7200 + trial);
    const SolveResult res = solve_subproblem(w, H, fams, 1.0, opts, stream);
    if (res.converged) ++converged;
    worst_stationarity = std::max(worst_stationarity, res.stationarity_residual);
    for (double r : res.kkt_residual) worst_cs = std::max(worst_cs, r);
  }

  // single-user analytic case against the grid-search oracle
  ChannelState H;
  H.num_rrus = 1;
  H.num_ues = 1;
  H.antennas = 2;
  H.h = {cplx(1.2, 0.3), cplx(-0.5, 0.9)};
  const double g = kernels::norm2(H.h.data(), 2);
  const std::vector<SubsetFamily> fams = {enumerate_subsets({0}, 1)};
  SolverOpts opts;
  opts.sigma2 = 1.0;
  opts.max_iters = 20000;
  opts.tolerance = 1e-10;
  opts.patience = 25;
  Rng stream(602);
  const SolveResult res = solve_subproblem({1.0}, H, fams, 1.0, opts, stream);
  const double p_solver = kernels::norm2(res.f[0].data(), 2);
  auto encoded = [&](double p) { return p - std::log(1.0 + p * g); };
  double best_val = encoded(0.0);
  for (int i = 1; i <= 400000; ++i) {
    const double p = 8.0 * std::max(1.0, g) * i / 400000.0;
    best_val = std::min(best_val, encoded(p));
  }
  const double rel = std::abs(encoded(p_solver) - best_val) / std::abs(best_val);

  std::ostringstream detail;
  detail << "converged " << converged << "/100, max stationarity "
         << worst_stationarity << ", max compl-slack " << worst_cs
         << ", grid-oracle rel err " << rel;
  report(7, worst_stationarity <= 1e-6 && worst_cs <= 1e-3 && rel <= 1e-2 &&
                converged == 100,
         detail.str());
}

void criterion_combinatorics() {
  bool subsets_ok = true;
  for (int n = 1; n <= 8; ++n) {
    std::vector<int> base(n);
    for (int i = 0; i < n; ++i) base[i] = i;
    for (int L = 1; L <= n; ++L) {
      int count = 0;
      std::vector<std::vector<int>> expect;
      for (unsigned mask = 1; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) < L) continue;
        ++count;
        std::vector<int> s;
        for (int i = 0; i < n; ++i) {
          if (mask & (1u << i)) s.push_back(i);
        }
        expect.push_back(std::move(s));
      }
      std::sort(expect.begin(), expect.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
      });
      const auto fam = enumerate_subsets(base, L);
      subsets_ok = subsets_ok && fam.count() == count && subset_count(n, L) == count;
      for (int c = 0; subsets_ok && c < fam.count(); ++c) {
        subsets_ok = fam.subsets[c] == expect[c];
      }
    }
  }

  // success probability against 1e6-sample Monte-Carlo on a 5x5 grid
  bool mc_ok = true;
  double worst_sigma = 0.0;
  Rng rng(801);
  const int samples = 1000000;
  const std::vector<std::pair<int, int>> nl = {{4, 1}, {4, 2}, {4, 3}, {4, 4}, {6, 3}};
  const std::vector<double> rhos = {0.05, 0.1, 0.3, 0.5, 0.8};
  for (const auto& [n, L] : nl) {
    for (double rho : rhos) {
      long long good = 0;
      for (int s = 0; s < samples; ++s) {
        int up = 0;
        for (int link = 0; link < n; ++link) {
          if (!rng.bernoulli(rho)) ++up;
        }
        if (up >= L) ++good;
      }
      const double mc = static_cast<double>(good) / samples;
      const double p = success_prob(n, L, rho);
      const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / samples);
      const double sigmas = std::abs(mc - p) / se;
      worst_sigma = std::max(worst_sigma, sigmas);
      mc_ok = mc_ok && std::abs(mc - p) <= 3.0 * se;
    }
  }
  std::ostringstream detail;
  detail << "power-set filter match: " << (subsets_ok ? "yes" : "no")
         << ", success-prob MC worst deviation " << worst_sigma << " SE";
  report(8, subsets_ok && mc_ok, detail.str());
}

void criterion_determinism(const Profile& profile) {
  ScenarioConfig cfg;
  cfg.antennas_per_rru = profile.antennas;
  cfg.num_slots = 100;
  cfg.master_seed = 77;
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "jtcomp_accept_det";
  std::error_code ec;
  fs::remove_all(base, ec);

  RunOptions opts;
  opts.replications = 2;
  std::string text[2];
  for (int i = 0; i < 2; ++i) {
    opts.out_dir = (base / std::to_string(i)).string();
    run_simulation(cfg, opts);
    std::ifstream in(opts.out_dir + "/slots.csv", std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    text[i] = ss.str();
  }
  const bool pass = !text[0].empty() && text[0] == text[1];
  std::ostringstream detail;
  detail << "slots.csv bytes " << text[0].size() << (pass ? " identical" : " differ");
  report(9, pass, detail.str());
  fs::remove_all(base, ec);
}

}  // namespace

int main() {
  const Profile profile = select_profile();
  std::printf("acceptance profile: %s (N=%d, T=%d, R=%d)\n", profile.name,
              profile.antennas, profile.slots, profile.reps);
  std::fflush(stdout);

  RunCache cache(profile);

  // cheap analytic criteria first
  criterion_proposition1();
  criterion_combinatorics();
  criterion_kkt();
  criterion_determinism(profile);

  // simulation-scale criteria
  criterion_latency(cache);
  criterion_power_gaps(cache);
  criterion_outage(cache);
  criterion_blockage_estimator(cache, profile);
  criterion_v_monotonicity(cache);

  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criteria failed\n", g_failures);
  }
  return g_failures == 0 ? 0 : 1;
}
