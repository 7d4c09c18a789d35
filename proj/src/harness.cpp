#include "jtcomp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "jtcomp/blockage_sets.hpp"
#include "jtcomp/channel.hpp"
#include "jtcomp/kernels.hpp"

namespace jtcomp {

namespace {

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int policy_subset_size(const ScenarioConfig& cfg, const SimState& state, int k,
                       double blockage_estimate) {
  const int n = static_cast<int>(state.geometry.serving_sets[k].size());
  switch (cfg.serving_set_policy) {
    case ServingPolicy::FixedL:
      return std::min(cfg.subset_param_l, n);
    case ServingPolicy::Dynamic:
      return select_L(n, blockage_estimate, cfg.violation_tolerance);
    case ServingPolicy::CbBaseline:
      return 1;
    case ServingPolicy::FullJtBaseline:
      return n;
  }
  return n;
}

}  // namespace

SimStreams make_streams(const ScenarioConfig& cfg, int replication) {
  return SimStreams{
      make_stream(cfg.master_seed, StreamPurpose::Fading, replication),
      make_stream(cfg.master_seed, StreamPurpose::Blockage, replication),
      make_stream(cfg.master_seed, StreamPurpose::Arrivals, replication),
      make_stream(cfg.master_seed, StreamPurpose::SolverInit, replication),
  };
}

SlotRow run_slot(SimState& state, const ScenarioConfig& cfg, SimStreams& streams) {
  const int K = cfg.num_ues;
  const int t = state.slot;
  auto& qs = state.queues;

  qs.arrivals = draw_arrivals(cfg.arrival_rate_bits, K, streams.arrivals);
  const ChannelState nominal = draw_channel(state.geometry, cfg, t, streams.fading);

  SlotRow row;
  row.replication = state.replication;
  row.slot = t;
  row.rate.assign(K, 0.0);
  row.supported.assign(K, 0.0);
  row.outage.assign(K, 0);
  row.arrivals = qs.arrivals;
  row.queue.assign(K, 0.0);
  row.virtual_queue.assign(K, 0.0);
  row.subset_size.assign(K, 0);
  row.blockage_est.assign(K, 0.0);
  row.user_power.assign(K, 0.0);

  // the estimator runs for every policy so its trace is always available
  std::vector<SubsetFamily> families(K);
  for (int k = 0; k < K; ++k) {
    const BlockageEstimate est =
        estimate_blockage(qs.outage_hist[k], cfg.averaging_window_slots, t + 1);
    row.blockage_est[k] = est.rho;
    const int L = policy_subset_size(cfg, state, k, est.rho);
    row.subset_size[k] = L;
    families[k] = enumerate_subsets(state.geometry.serving_sets[k], L);
    families[k].user = k;
  }

  std::vector<double> weights(K);
  for (int k = 0; k < K; ++k) {
    weights[k] = slot_weight(qs.q_bits[k], qs.arrivals[k], qs.z_bits[k]);
  }

  SolverOpts opts;
  opts.max_iters = cfg.outer_iters;
  opts.inner_passes = cfg.inner_iters;
  opts.tolerance = cfg.solver_tolerance;
  opts.step_size = cfg.dual_step_size;
  opts.sigma2 = cfg.noise_power_mw;
  opts.trace = streams.solver_trace;
  streams.solver_trace = nullptr;
  if (state.solver_memory != nullptr) opts.warm_start = state.solver_memory.get();

  SolveResult sol = solve_subproblem(weights, nominal, families, cfg.tradeoff_v,
                                     opts, streams.solver_init);
  state.solver_memory = std::make_shared<SolverState>(std::move(sol.state));
  row.solver_iterations = sol.iterations;
  row.solver_converged = sol.converged;

  for (int k = 0; k < K; ++k) {
    row.rate[k] = std::log2(1.0 + sol.gamma[k]);
    row.user_power[k] = kernels::norm2(sol.f[k].data(), sol.f[k].size());
    row.sum_power_mw += row.user_power[k];
  }

  const ChannelState realized = apply_blockage(nominal, cfg.blockage_prob, streams.blockage);
  if (streams.channel_dump != nullptr) {
    for (int b = 0; b < nominal.num_rrus; ++b) {
      for (int k = 0; k < K; ++k) {
        (*streams.channel_dump)
            << t << ',' << b << ',' << k << ','
            << (realized.is_blocked(b, k) ? 1 : 0) << ','
            << g17(kernels::norm2(nominal.vec(b, k), nominal.antennas)) << '\n';
      }
    }
  }

  for (int k = 0; k < K; ++k) {
    row.supported[k] = std::log2(1.0 + sinr_actual(sol.f, realized, k, cfg.noise_power_mw));
    const QueueUpdate upd =
        update_queue(qs.q_bits[k], row.rate[k], row.supported[k], qs.arrivals[k]);
    row.outage[k] = upd.outage ? 1 : 0;
    qs.q_bits[k] = upd.q_next;
    qs.z_bits[k] = update_virtual(qs.z_bits[k], upd.q_next, cfg.violation_tolerance,
                                  cfg.queue_threshold_bits);
    qs.outage_hist[k].push(upd.outage);
    row.queue[k] = qs.q_bits[k];
    row.virtual_queue[k] = qs.z_bits[k];
  }

  ++state.slot;
  return row;
}

namespace {

RunSummary summarize(const ScenarioConfig& cfg, const std::vector<SlotRow>& rows,
                     int replications) {
  const int K = cfg.num_ues;
  RunSummary s;
  s.replications = replications;
  s.master_seed = cfg.master_seed;
  s.slots = cfg.num_slots;
  s.prob_queue_exceed.assign(K, 0.0);
  s.outage_rate.assign(K, 0.0);
  s.avg_queue.assign(K, 0.0);
  s.virtual_rate.assign(K, 0.0);
  if (rows.empty()) return s;

  double power = 0.0;
  std::vector<double> queue_pool, rate_pool;
  queue_pool.reserve(rows.size() * K);
  rate_pool.reserve(rows.size() * K);
  for (const auto& r : rows) {
    power += r.sum_power_mw;
    for (int k = 0; k < K; ++k) {
      if (r.queue[k] >= cfg.queue_threshold_bits) s.prob_queue_exceed[k] += 1.0;
      s.outage_rate[k] += r.outage[k];
      s.avg_queue[k] += r.queue[k];
      queue_pool.push_back(r.queue[k]);
      rate_pool.push_back(r.rate[k]);
      if (r.slot == cfg.num_slots - 1) {
        s.virtual_rate[k] += r.virtual_queue[k] / cfg.num_slots;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  power *= inv;
  s.avg_sum_power_mw = power;
  s.avg_sum_power_dbm =
      power > 0.0 ? 10.0 * std::log10(power) : std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < K; ++k) {
    s.prob_queue_exceed[k] *= inv;
    s.outage_rate[k] *= inv;
    s.avg_queue[k] *= inv;
    s.virtual_rate[k] /= replications;
  }

  auto quantiles = [](std::vector<double>& pool) {
    std::vector<double> out;
    if (pool.empty()) return out;
    std::sort(pool.begin(), pool.end());
    for (int p = 0; p <= 100; p += kQuantileStep) {
      const double pos = p / 100.0 * (pool.size() - 1);
      const std::size_t lo = static_cast<std::size_t>(pos);
      const std::size_t hi = std::min(lo + 1, pool.size() - 1);
      out.push_back(pool[lo] + (pos - lo) * (pool[hi] - pool[lo]));
    }
    return out;
  };
  s.queue_quantiles = quantiles(queue_pool);
  s.rate_quantiles = quantiles(rate_pool);
  return s;
}

struct RepOutput {
  std::vector<SlotRow> rows;
};

RepOutput run_replication(const ScenarioConfig& cfg, int rep, const RunOptions& opts) {
  SimState state(cfg, rep);
  SimStreams streams = make_streams(cfg, rep);

  std::ofstream channel_dump;
  if (rep == 0 && !opts.channel_dump_path.empty()) {
    channel_dump.open(opts.channel_dump_path);
    if (!channel_dump) {
      throw std::runtime_error("cannot open channel dump file: " + opts.channel_dump_path);
    }
    channel_dump << "slot,rru,ue,blocked,chan_norm2\n";
    streams.channel_dump = &channel_dump;
  }
  std::ofstream solver_trace;
  if (rep == 0 && !opts.solver_trace_path.empty()) {
    solver_trace.open(opts.solver_trace_path);
    if (!solver_trace) {
      throw std::runtime_error("cannot open solver trace file: " + opts.solver_trace_path);
    }
    solver_trace << "iteration,objective,max_residual\n";
    streams.solver_trace = &solver_trace;
  }

  RepOutput out;
  out.rows.reserve(cfg.num_slots);
  for (int t = 0; t < cfg.num_slots; ++t) {
    out.rows.push_back(run_slot(state, cfg, streams));
  }
  return out;
}

}  // namespace

void write_slot_csv_header(std::ostream& out, int users) {
  out << "# jtcomp slots schema v1\n";
  out << "rep,slot,sum_power_mw,sum_power_dbm,solver_iters,solver_converged";
  for (int k = 0; k < users; ++k) {
    out << ",rate_" << k << ",supported_" << k << ",outage_" << k << ",arrivals_" << k
        << ",queue_" << k << ",zqueue_" << k << ",subset_l_" << k << ",rho_est_" << k
        << ",power_" << k;
  }
  out << '\n';
}

void write_slot_csv_row(std::ostream& out, const SlotRow& r) {
  out << r.replication << ',' << r.slot << ',' << g17(r.sum_power_mw) << ',';
  if (r.sum_power_mw > 0.0) out << g17(10.0 * std::log10(r.sum_power_mw));
  out << ',' << r.solver_iterations << ',' << (r.solver_converged ? 1 : 0);
  const int K = static_cast<int>(r.rate.size());
  for (int k = 0; k < K; ++k) {
    out << ',' << g17(r.rate[k]) << ',' << g17(r.supported[k]) << ','
        << static_cast<int>(r.outage[k]) << ',' << g17(r.arrivals[k]) << ','
        << g17(r.queue[k]) << ',' << g17(r.virtual_queue[k]) << ',' << r.subset_size[k]
        << ',' << g17(r.blockage_est[k]) << ',' << g17(r.user_power[k]);
  }
  out << '\n';
}

void write_summary_csv(std::ostream& out, const RunSummary& all,
                       const std::vector<RunSummary>& per_rep) {
  out << "# jtcomp summary schema v1\n";
  out << "rep,metric,user,value\n";
  auto emit = [&out](const std::string& rep, const RunSummary& s) {
    out << rep << ",avg_sum_power_mw,," << g17(s.avg_sum_power_mw) << '\n';
    if (std::isfinite(s.avg_sum_power_dbm)) {
      out << rep << ",avg_sum_power_dbm,," << g17(s.avg_sum_power_dbm) << '\n';
    }
    for (std::size_t k = 0; k < s.prob_queue_exceed.size(); ++k) {
      out << rep << ",prob_queue_exceed," << k << ',' << g17(s.prob_queue_exceed[k]) << '\n';
      out << rep << ",outage_rate," << k << ',' << g17(s.outage_rate[k]) << '\n';
      out << rep << ",avg_queue," << k << ',' << g17(s.avg_queue[k]) << '\n';
      out << rep << ",virtual_rate," << k << ',' << g17(s.virtual_rate[k]) << '\n';
    }
    for (std::size_t i = 0; i < s.queue_quantiles.size(); ++i) {
      out << rep << ",queue_p" << i * kQuantileStep << ",," << g17(s.queue_quantiles[i])
          << '\n';
    }
    for (std::size_t i = 0; i < s.rate_quantiles.size(); ++i) {
      out << rep << ",rate_p" << i * kQuantileStep << ",," << g17(s.rate_quantiles[i])
          << '\n';
    }
  };
  emit("all", all);
  for (std::size_t i = 0; i < per_rep.size(); ++i) {
    emit(std::to_string(i), per_rep[i]);
  }
}

RunResult run_simulation(const ScenarioConfig& cfg, const RunOptions& opts) {
  validate(cfg);
  const int R = std::max(1, opts.replications);
  std::vector<RepOutput> outputs(R);

  int workers = opts.threads > 0 ? opts.threads
                                 : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, R);

  if (workers == 1) {
    for (int rep = 0; rep < R; ++rep) outputs[rep] = run_replication(cfg, rep, opts);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int rep = next.fetch_add(1); rep < R; rep = next.fetch_add(1)) {
            outputs[rep] = run_replication(cfg, rep, opts);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }

  std::vector<SlotRow> all_rows;
  all_rows.reserve(static_cast<std::size_t>(R) * cfg.num_slots);
  std::vector<RunSummary> per_rep;
  per_rep.reserve(R);
  for (int rep = 0; rep < R; ++rep) {
    per_rep.push_back(summarize(cfg, outputs[rep].rows, 1));
    all_rows.insert(all_rows.end(), outputs[rep].rows.begin(), outputs[rep].rows.end());
  }

  RunResult result;
  result.summary = summarize(cfg, all_rows, R);

  if (!opts.out_dir.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    if (ec) {
      throw std::runtime_error("cannot create output directory " + opts.out_dir + ": " +
                               ec.message());
    }
    const std::string slots_path = opts.out_dir + "/slots.csv";
    std::ofstream slots(slots_path);
    if (!slots) throw std::runtime_error("cannot write " + slots_path);
    write_slot_csv_header(slots, cfg.num_ues);
    for (const auto& r : all_rows) write_slot_csv_row(slots, r);

    const std::string summary_path = opts.out_dir + "/summary.csv";
    std::ofstream summary(summary_path);
    if (!summary) throw std::runtime_error("cannot write " + summary_path);
    write_summary_csv(summary, result.summary, per_rep);

    const std::string cfg_path = opts.out_dir + "/resolved_config";
    std::ofstream cfg_out(cfg_path);
    if (!cfg_out) throw std::runtime_error("cannot write " + cfg_path);
    cfg_out << emit_config(cfg);
  }

  if (opts.keep_rows) result.rows = std::move(all_rows);
  return result;
}

std::vector<SweepPoint> sweep(const ScenarioConfig& base, const std::string& axis,
                              const std::vector<std::string>& values,
                              const RunOptions& opts) {
  std::vector<SweepPoint> points;
  for (const std::string& value : values) {
    SweepPoint pt;
    pt.axis = axis;
    pt.value = value;
    try {
      ScenarioConfig cfg = base;
      if (axis == "V") {
        apply_override(cfg, "tradeoff_v=" + value);
      } else if (axis == "q") {
        apply_override(cfg, "blockage_prob=" + value);
      } else if (axis == "L") {
        cfg.serving_set_policy = ServingPolicy::FixedL;
        apply_override(cfg, "subset_param_l=" + value);
      } else if (axis == "policy") {
        apply_override(cfg, "serving_set_policy=" + value);
      } else {
        throw std::invalid_argument("unknown sweep axis '" + axis +
                                    "' (expected V, q, L or policy)");
      }
      RunOptions point_opts = opts;
      point_opts.out_dir.clear();  // the consolidated CSV is the sweep output
      point_opts.keep_rows = false;
      pt.summary = run_simulation(cfg, point_opts).summary;
      pt.ok = true;
    } catch (const std::exception& ex) {
      pt.ok = false;
      pt.error = ex.what();
    }
    points.push_back(std::move(pt));
  }

  if (!opts.out_dir.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    if (ec) {
      throw std::runtime_error("cannot create output directory " + opts.out_dir + ": " +
                               ec.message());
    }
    const std::string path = opts.out_dir + "/sweep.csv";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_sweep_csv(out, points, base.num_ues);
  }
  return points;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points, int users) {
  out << "# jtcomp sweep schema v1\n";
  out << "axis,value,ok,avg_sum_power_mw,avg_sum_power_dbm";
  for (int k = 0; k < users; ++k) {
    out << ",prob_queue_exceed_" << k << ",outage_rate_" << k;
  }
  out << ",error\n";
  for (const auto& pt : points) {
    out << pt.axis << ',' << pt.value << ',' << (pt.ok ? 1 : 0) << ',';
    if (pt.ok) {
      out << g17(pt.summary.avg_sum_power_mw) << ',';
      if (std::isfinite(pt.summary.avg_sum_power_dbm)) {
        out << g17(pt.summary.avg_sum_power_dbm);
      }
      for (int k = 0; k < users; ++k) {
        out << ',' << g17(pt.summary.prob_queue_exceed[k]) << ','
            << g17(pt.summary.outage_rate[k]);
      }
      out << ',';
    } else {
      out << ',';
      for (int k = 0; k < users; ++k) out << ",,";
      out << ',' << '"' << pt.error << '"';
    }
    out << '\n';
  }
}

}  // namespace jtcomp
