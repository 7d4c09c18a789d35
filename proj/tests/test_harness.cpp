#include <doctest.h>

#include <cmath>
#include <sstream>

#include "jtcomp/harness.hpp"

using namespace jtcomp;

namespace {

ScenarioConfig tiny_config() {
  ScenarioConfig cfg;
  cfg.num_rrus = 2;
  cfg.num_ues = 2;
  cfg.antennas_per_rru = 4;
  cfg.subset_param_l = 1;
  cfg.num_slots = 50;
  cfg.outer_iters = 50;
  cfg.master_seed = 21;
  return cfg;
}

}  // namespace

TEST_CASE("no blockage means no outage and supported rates") {
  ScenarioConfig cfg = tiny_config();
  cfg.blockage_prob = 0.0;
  RunOptions opts;
  opts.replications = 2;
  opts.keep_rows = true;
  const RunResult res = run_simulation(cfg, opts);
  REQUIRE(res.rows.size() == 100);
  for (const auto& row : res.rows) {
    for (int k = 0; k < cfg.num_ues; ++k) {
      CHECK(row.rate[k] <= row.supported[k] + 1e-9);
      CHECK(row.outage[k] == 0);
    }
  }
  for (double r : res.summary.outage_rate) CHECK(r == 0.0);
}

TEST_CASE("zero arrivals collapse to the idle zero-power trajectory") {
  ScenarioConfig cfg = tiny_config();
  cfg.arrival_rate_bits = 0.0;
  RunOptions opts;
  opts.replications = 1;
  opts.keep_rows = true;
  const RunResult res = run_simulation(cfg, opts);
  for (const auto& row : res.rows) {
    CHECK(row.sum_power_mw == 0.0);
    for (int k = 0; k < cfg.num_ues; ++k) {
      CHECK(row.rate[k] == 0.0);
      CHECK(row.queue[k] == 0.0);
    }
  }
}

TEST_CASE("reruns with the same master seed are bit-identical") {
  const ScenarioConfig cfg = tiny_config();
  RunOptions opts;
  opts.replications = 2;
  opts.keep_rows = true;
  const RunResult a = run_simulation(cfg, opts);
  const RunResult b = run_simulation(cfg, opts);
  REQUIRE(a.rows.size() == b.rows.size());
  std::ostringstream csv_a, csv_b;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    write_slot_csv_row(csv_a, a.rows[i]);
    write_slot_csv_row(csv_b, b.rows[i]);
  }
  CHECK(csv_a.str() == csv_b.str());
  CHECK(a.summary.avg_sum_power_mw == b.summary.avg_sum_power_mw);
}

TEST_CASE("queue conservation and power identity hold in the logs") {
  ScenarioConfig cfg = tiny_config();
  cfg.blockage_prob = 0.2;
  RunOptions opts;
  opts.replications = 2;
  opts.keep_rows = true;
  const RunResult res = run_simulation(cfg, opts);

  std::vector<double> q(cfg.num_ues, 0.0);
  int rep = -1;
  for (const auto& row : res.rows) {
    if (row.replication != rep) {
      rep = row.replication;
      std::fill(q.begin(), q.end(), 0.0);
    }
    double power = 0.0;
    for (int k = 0; k < cfg.num_ues; ++k) {
      const double served = row.rate[k] <= row.supported[k] ? row.rate[k] : 0.0;
      const double expect = std::max(0.0, q[k] - served + row.arrivals[k]);
      CHECK(std::abs(expect - row.queue[k]) <= 1e-9);
      q[k] = row.queue[k];
      power += row.user_power[k];
    }
    CHECK(std::abs(power - row.sum_power_mw) <= 1e-9 * std::max(1.0, power));
  }

  // the summary statistics are recomputable from the rows
  int exceed = 0;
  for (const auto& row : res.rows) {
    if (row.queue[0] >= cfg.queue_threshold_bits) ++exceed;
  }
  CHECK(res.summary.prob_queue_exceed[0] ==
        doctest::Approx(static_cast<double>(exceed) / res.rows.size() * 1.0)
            .epsilon(1e-12));
}

TEST_CASE("full-JT baseline equals fixed L at the serving-set size") {
  ScenarioConfig a = tiny_config();
  a.serving_set_policy = ServingPolicy::FixedL;
  a.subset_param_l = a.num_rrus;
  a.blockage_prob = 0.15;
  ScenarioConfig b = a;
  b.serving_set_policy = ServingPolicy::FullJtBaseline;

  RunOptions opts;
  opts.replications = 1;
  opts.keep_rows = true;
  const RunResult ra = run_simulation(a, opts);
  const RunResult rb = run_simulation(b, opts);
  REQUIRE(ra.rows.size() == rb.rows.size());
  for (std::size_t i = 0; i < ra.rows.size(); ++i) {
    CHECK(ra.rows[i].rate == rb.rows[i].rate);
    CHECK(ra.rows[i].queue == rb.rows[i].queue);
    CHECK(ra.rows[i].sum_power_mw == rb.rows[i].sum_power_mw);
  }
}

TEST_CASE("doubling the horizon leaves the average power within 1 dB") {
  ScenarioConfig cfg = tiny_config();
  cfg.blockage_prob = 0.1;
  cfg.num_slots = 300;
  RunOptions opts;
  opts.replications = 3;
  const double p1 = run_simulation(cfg, opts).summary.avg_sum_power_mw;
  cfg.num_slots = 600;
  const double p2 = run_simulation(cfg, opts).summary.avg_sum_power_mw;
  REQUIRE(p1 > 0.0);
  REQUIRE(p2 > 0.0);
  CHECK(std::abs(10.0 * std::log10(p1 / p2)) < 1.0);
}

TEST_CASE("sweep mechanics") {
  const ScenarioConfig cfg = tiny_config();
  RunOptions opts;
  opts.replications = 1;

  SUBCASE("empty value list yields an empty table") {
    CHECK(sweep(cfg, "V", {}, opts).empty());
  }

  SUBCASE("policy axis accepts the baseline names") {
    const auto pts = sweep(cfg, "policy", {"cb_baseline"}, opts);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].ok);
    CHECK(pts[0].summary.avg_sum_power_mw > 0.0);
  }

  SUBCASE("failures are recorded and the sweep continues") {
    const auto pts = sweep(cfg, "L", {"7", "1"}, opts);  // L=7 > B is invalid
    REQUIRE(pts.size() == 2);
    CHECK_FALSE(pts[0].ok);
    CHECK(!pts[0].error.empty());
    CHECK(pts[1].ok);
  }

  SUBCASE("unknown axis is a per-point error") {
    const auto pts = sweep(cfg, "bogus", {"1"}, opts);
    REQUIRE(pts.size() == 1);
    CHECK_FALSE(pts[0].ok);
  }
}

TEST_CASE("slot CSV schema") {
  std::ostringstream out;
  write_slot_csv_header(out, 2);
  SlotRow row;
  row.rate = {1.0, 2.0};
  row.supported = {1.5, 0.5};
  row.outage = {0, 1};
  row.arrivals = {3.0, 4.0};
  row.queue = {0.0, 5.5};
  row.virtual_queue = {0.0, 1.0};
  row.subset_size = {2, 2};
  row.blockage_est = {0.0, 0.25};
  row.user_power = {0.5, 0.25};
  row.sum_power_mw = 0.75;
  write_slot_csv_row(out, row);
  const std::string text = out.str();
  CHECK(text.find("# jtcomp slots schema v1") == 0);
  // header and row agree on the column count
  const auto count_fields = [](const std::string& line) {
    return std::count(line.begin(), line.end(), ',') + 1;
  };
  std::istringstream in(text);
  std::string comment, header, data;
  std::getline(in, comment);
  std::getline(in, header);
  std::getline(in, data);
  CHECK(count_fields(header) == count_fields(data));
}
