// Command-line front end: scenario runs, parameter sweeps, and a self-check
// suite over small instances.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "jtcomp/blockage_sets.hpp"
#include "jtcomp/channel.hpp"
#include "jtcomp/harness.hpp"
#include "jtcomp/kernels.hpp"
#include "jtcomp/solver.hpp"

namespace {

using namespace jtcomp;

ScenarioConfig resolve_config(const std::string& path,
                              const std::vector<std::string>& overrides) {
  ScenarioConfig cfg;
  if (!path.empty()) cfg = load_config_file(path);
  for (const auto& kv : overrides) apply_override(cfg, kv);
  validate(cfg);
  return cfg;
}

void print_summary(const RunSummary& s) {
  std::printf("replications: %d, slots: %d\n", s.replications, s.slots);
  std::printf("avg sum power: %.6g mW", s.avg_sum_power_mw);
  if (std::isfinite(s.avg_sum_power_dbm)) {
    std::printf(" (%.2f dBm)", s.avg_sum_power_dbm);
  }
  std::printf("\n");
  for (std::size_t k = 0; k < s.prob_queue_exceed.size(); ++k) {
    std::printf(
        "user %zu: Pr{Q>=th}=%.4f outage=%.4f avg_queue=%.3f Z(T)/T=%.4f\n", k,
        s.prob_queue_exceed[k], s.outage_rate[k], s.avg_queue[k], s.virtual_rate[k]);
  }
}

// ---- validate: property checks on small instances ---------------------------

struct Validator {
  int failures = 0;

  void check(bool ok, const std::string& name, const std::string& detail = "") {
    std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
                detail.empty() ? "" : ": ", detail.c_str());
    if (!ok) ++failures;
  }
};

void validate_kernels(Validator& v) {
  Rng rng(11);
  const auto& scalar = kernels::scalar_kernels();
  const auto& active = kernels::active_kernels();
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform(0.0, 130.0));
    std::vector<cplx> a(n), b(n);
    for (auto& x : a) x = rng.cnormal();
    for (auto& x : b) x = rng.cnormal();
    const cplx d0 = scalar.cdot(a.data(), b.data(), n);
    const cplx d1 = active.cdot(a.data(), b.data(), n);
    worst = std::max(worst, std::abs(d0 - d1) / std::max(1.0, std::abs(d0)));
    const double n0 = scalar.norm2(a.data(), n);
    const double n1 = active.norm2(a.data(), n);
    worst = std::max(worst, std::abs(n0 - n1) / std::max(1.0, n0));
  }
  v.check(worst < 1e-12, "kernel dispatch equivalence",
          std::string("backend=") + active.name);
}

void validate_proposition1(Validator& v) {
  Rng rng(12);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    ScenarioConfig cfg;
    cfg.num_rrus = 2;
    cfg.num_ues = 2;
    cfg.antennas_per_rru = 2;
    cfg.subset_param_l = 1;
    const Geometry geom = generate_geometry(cfg, 5 + trial);
    Rng fading(100 + trial);
    const ChannelState H = draw_channel(geom, cfg, 0, fading);
    std::vector<StackedVector> F(2, StackedVector(4, cplx(0, 0)));
    for (auto& f : F) {
      for (auto& x : f) x = rng.cnormal();
    }
    const auto fam = enumerate_subsets({0, 1}, 1);
    for (int c = 0; c < fam.count(); ++c) {
      const double ratio = sinr_subset(F, H, 0, c, fam, 1.0);
      const cplx nu = update_aux_nu(F, H, 0, c, fam, 1.0);
      const double surr = fp_surrogate(F, H, nu, 0, c, fam, 1.0);
      worst = std::max(worst, std::abs(ratio - surr));
    }
  }
  v.check(worst <= 1e-9, "quadratic-transform identity at the optimal auxiliary");
}

void validate_sinr_forms(Validator& v) {
  Rng rng(13);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ScenarioConfig cfg;
    cfg.num_rrus = 2;
    cfg.num_ues = 2;
    cfg.antennas_per_rru = 2;
    const Geometry geom = generate_geometry(cfg, trial);
    Rng fading(300 + trial);
    const ChannelState H = draw_channel(geom, cfg, 0, fading);
    std::vector<StackedVector> F(2, StackedVector(4));
    for (auto& f : F) {
      for (auto& x : f) x = rng.cnormal();
    }
    const auto fam = enumerate_subsets({0, 1}, 1);
    for (int c = 0; c < fam.count(); ++c) {
      // explicit per-RRU double-sum form of the masked SINR
      const double sigma2 = 1.0;
      cplx num(0, 0);
      for (int b : fam.subsets[c]) {
        num += kernels::cdot(H.vec(b, 0), F[0].data() + b * 2, 2);
      }
      double den = sigma2;
      cplx cross(0, 0);
      for (int g = 0; g < 2; ++g) {
        if (fam.excluded_mask[c] & (1ULL << g)) continue;
        cross += kernels::cdot(H.vec(g, 0), F[1].data() + g * 2, 2);
      }
      den += std::norm(cross);
      const double direct = std::norm(num) / den;
      const double stacked = sinr_subset(F, H, 0, c, fam, sigma2);
      worst = std::max(worst, std::abs(direct - stacked) /
                                  std::max(1e-300, std::abs(direct)));
    }
  }
  v.check(worst <= 1e-12, "per-RRU-sum and stacked-mask SINR forms agree");
}

void validate_combinatorics(Validator& v) {
  bool ok = true;
  for (int n = 1; n <= 8 && ok; ++n) {
    std::vector<int> base(n);
    for (int i = 0; i < n; ++i) base[i] = i;
    for (int L = 1; L <= n && ok; ++L) {
      int count = 0;
      for (unsigned mask = 1; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) >= L) ++count;
      }
      const auto fam = enumerate_subsets(base, L);
      ok = ok && count == fam.count() && count == subset_count(n, L);
    }
  }
  v.check(ok, "subset enumeration matches power-set filtering for n <= 8");
}

void validate_success_prob(Validator& v) {
  Rng rng(14);
  bool ok = true;
  for (double rho : {0.05, 0.3, 0.7}) {
    for (int L = 1; L <= 4; ++L) {
      const int samples = 100000;
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
      const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / samples);
      if (std::abs(mc - p) > 5.0 * se + 1e-12) ok = false;
    }
  }
  v.check(ok, "success probability matches Monte-Carlo link draws");
}

void validate_small_run(Validator& v) {
  ScenarioConfig cfg;
  cfg.num_rrus = 2;
  cfg.num_ues = 2;
  cfg.antennas_per_rru = 4;
  cfg.subset_param_l = 1;
  cfg.num_slots = 40;
  cfg.outer_iters = 40;
  cfg.master_seed = 7;
  RunOptions opts;
  opts.replications = 2;
  opts.keep_rows = true;
  const RunResult a = run_simulation(cfg, opts);
  const RunResult b = run_simulation(cfg, opts);

  bool identical = a.rows.size() == b.rows.size();
  for (std::size_t i = 0; identical && i < a.rows.size(); ++i) {
    identical = a.rows[i].sum_power_mw == b.rows[i].sum_power_mw &&
                a.rows[i].queue == b.rows[i].queue &&
                a.rows[i].rate == b.rows[i].rate;
  }
  v.check(identical, "rerun with the same seed is bit-identical");

  // queue conservation recomputed from the rows alone
  bool conserves = true;
  for (int rep = 0; rep < 2 && conserves; ++rep) {
    std::vector<double> q(cfg.num_ues, 0.0);
    for (const auto& row : a.rows) {
      if (row.replication != rep) continue;
      for (int k = 0; k < cfg.num_ues; ++k) {
        const double served =
            (row.rate[k] <= row.supported[k]) ? row.rate[k] : 0.0;
        const double expect = std::max(0.0, q[k] - served + row.arrivals[k]);
        if (std::abs(expect - row.queue[k]) > 1e-9) conserves = false;
        q[k] = row.queue[k];
      }
    }
  }
  v.check(conserves, "queue dynamics recomputable from logged rows");

  bool power_matches = true;
  for (const auto& row : a.rows) {
    double total = 0.0;
    for (double p : row.user_power) total += p;
    if (std::abs(total - row.sum_power_mw) > 1e-9 * std::max(1.0, total)) {
      power_matches = false;
    }
  }
  v.check(power_matches, "sum power equals the per-user beamformer norms");
}

void validate_config_roundtrip(Validator& v) {
  ScenarioConfig cfg;
  cfg.blockage_prob = 0.23;
  cfg.tradeoff_v = 2.5;
  cfg.master_seed = 99;
  const ScenarioConfig back = load_config(emit_config(cfg));
  v.check(back == cfg, "emitted config round-trips");

  const Geometry g1 = generate_geometry(cfg, 42);
  const Geometry g2 = generate_geometry(cfg, 42);
  v.check(g1 == g2, "geometry is a pure function of (config, seed)");
}

int run_validate() {
  Validator v;
  validate_kernels(v);
  validate_combinatorics(v);
  validate_proposition1(v);
  validate_sinr_forms(v);
  validate_success_prob(v);
  validate_config_roundtrip(v);
  validate_small_run(v);
  if (v.failures > 0) {
    std::printf("%d check(s) failed\n", v.failures);
    return 1;
  }
  std::printf("all checks passed\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blockage-robust CoMP downlink beamforming simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int reps = 1;
  int threads = 0;
  std::string channel_dump;
  std::string solver_trace;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "scenario config file");
    cmd->add_option("--set", overrides, "key=value override, repeatable");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--reps", reps, "Monte-Carlo replications");
    cmd->add_option("--threads", threads, "worker threads (0 = auto)");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "simulate one scenario");
  add_common(run_cmd);
  run_cmd->add_option("--channel-dump", channel_dump,
                      "CSV dump of per-slot channels (replication 0)");
  run_cmd->add_option("--solver-trace", solver_trace,
                      "CSV trace of the first per-slot solve (replication 0)");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run one scenario per axis value");
  add_common(sweep_cmd);
  std::string axis;
  std::vector<std::string> values;
  sweep_cmd->add_option("--axis", axis, "sweep axis: V, q, L or policy")->required();
  sweep_cmd->add_option("--values", values, "axis values")->required()->delimiter(',');

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "run the property suites on small instances");
  (void)validate_cmd;

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("validate")) {
      return run_validate();
    }
    const ScenarioConfig cfg = resolve_config(config_path, overrides);
    RunOptions opts;
    opts.replications = reps;
    opts.threads = threads;
    opts.out_dir = out_dir;
    opts.channel_dump_path = channel_dump;
    opts.solver_trace_path = solver_trace;

    if (app.got_subcommand("run")) {
      const RunResult result = run_simulation(cfg, opts);
      print_summary(result.summary);
      if (!out_dir.empty()) {
        std::printf("wrote %s/slots.csv, summary.csv, resolved_config\n", out_dir.c_str());
      }
    } else if (app.got_subcommand("sweep")) {
      const auto points = sweep(cfg, axis, values, opts);
      for (const auto& pt : points) {
        if (pt.ok) {
          std::printf("%s=%s: avg power %.6g mW", pt.axis.c_str(), pt.value.c_str(),
                      pt.summary.avg_sum_power_mw);
          if (std::isfinite(pt.summary.avg_sum_power_dbm)) {
            std::printf(" (%.2f dBm)", pt.summary.avg_sum_power_dbm);
          }
          std::printf("\n");
        } else {
          std::printf("%s=%s: FAILED (%s)\n", pt.axis.c_str(), pt.value.c_str(),
                      pt.error.c_str());
        }
      }
      if (!out_dir.empty()) {
        std::printf("wrote %s/sweep.csv\n", out_dir.c_str());
      }
    }
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}
