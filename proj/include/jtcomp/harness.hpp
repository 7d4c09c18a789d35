#pragma once
// End-to-end slot loop: arrivals, channels, serving-set adaptation, the
// per-slot beamformer solve, outage-aware queue updates, and metric export
// across Monte-Carlo replications.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "jtcomp/adaptive.hpp"
#include "jtcomp/config.hpp"
#include "jtcomp/queueing.hpp"
#include "jtcomp/solver.hpp"

namespace jtcomp {

struct SlotRow {
  int replication = 0;
  int slot = 0;
  double sum_power_mw = 0.0;
  std::vector<double> rate;           // assigned r_k
  std::vector<double> supported;      // realized c_k
  std::vector<std::uint8_t> outage;
  std::vector<double> arrivals;
  std::vector<double> queue;          // Q_k after the update
  std::vector<double> virtual_queue;  // Z_k after the update
  std::vector<int> subset_size;       // L_k used this slot
  std::vector<double> blockage_est;   // rho~_k available this slot
  std::vector<double> user_power;     // ||f_k||^2
  int solver_iterations = 0;
  bool solver_converged = false;
};

struct RunSummary {
  int replications = 0;
  std::uint64_t master_seed = 0;
  int slots = 0;
  double avg_sum_power_mw = 0.0;
  double avg_sum_power_dbm = 0.0;  // NaN when the average power is zero
  std::vector<double> prob_queue_exceed;  // per user, Pr{Q_k >= Q^th}
  std::vector<double> outage_rate;        // per user
  std::vector<double> avg_queue;          // per user
  std::vector<double> virtual_rate;       // per user, mean Z_k(T)/T over reps
  std::vector<double> queue_quantiles;    // pooled empirical CDF, percent grid
  std::vector<double> rate_quantiles;
};

// percent grid for the pooled empirical CDFs
inline constexpr int kQuantileStep = 5;

struct SimStreams {
  Rng fading;
  Rng blockage;
  Rng arrivals;
  Rng solver_init;
  std::ostream* channel_dump = nullptr;
  std::ostream* solver_trace = nullptr;  // consumed by the first solve only
};

SimStreams make_streams(const ScenarioConfig& cfg, int replication);

struct SimState {
  Geometry geometry;
  QueueState queues;
  int slot = 0;  // 0-based index of the next slot
  int replication = 0;
  // previous slot's solver iterate, fed back as a warm start
  std::shared_ptr<SolverState> solver_memory;

  SimState(const ScenarioConfig& cfg, int rep)
      : geometry(generate_geometry(cfg, stream_seed(cfg.master_seed,
                                                    StreamPurpose::Geometry, rep))),
        queues(cfg.num_ues, cfg.averaging_window_slots),
        replication(rep) {}
};

// One slot of the dynamic control loop.
SlotRow run_slot(SimState& state, const ScenarioConfig& cfg, SimStreams& streams);

struct RunOptions {
  int replications = 1;
  int threads = 0;  // 0 keeps one worker per core up to the replication count
  std::string out_dir;            // when set: slots.csv, summary.csv, resolved_config
  bool keep_rows = false;         // retain all SlotRows in the result
  std::string channel_dump_path;  // optional debug CSV (replication 0)
  std::string solver_trace_path;  // optional solver trace (replication 0, slot 0)
};

struct RunResult {
  RunSummary summary;
  std::vector<SlotRow> rows;  // filled when keep_rows is set
};

RunResult run_simulation(const ScenarioConfig& cfg, const RunOptions& opts);

struct SweepPoint {
  std::string axis;
  std::string value;
  bool ok = false;
  std::string error;
  RunSummary summary;
};

// One full run per axis value (axis in {V, q, L, policy}); per-point failures
// are recorded and the sweep continues.
std::vector<SweepPoint> sweep(const ScenarioConfig& base, const std::string& axis,
                              const std::vector<std::string>& values,
                              const RunOptions& opts);

void write_slot_csv_header(std::ostream& out, int users);
void write_slot_csv_row(std::ostream& out, const SlotRow& row);
void write_summary_csv(std::ostream& out, const RunSummary& all,
                       const std::vector<RunSummary>& per_rep);
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points, int users);

}  // namespace jtcomp
