#pragma once
// Scenario configuration: key/value text parsing, validation, canonical
// emission, and deterministic scenario geometry.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "jtcomp/rng.hpp"

namespace jtcomp {

enum class ServingPolicy { FixedL, Dynamic, CbBaseline, FullJtBaseline };

const char* to_string(ServingPolicy p);
ServingPolicy parse_policy(const std::string& s);

struct ScenarioConfig {
  int num_rrus = 4;                      // B
  int num_ues = 4;                       // K
  int antennas_per_rru = 16;             // N
  double area_side_m = 50.0;
  double carrier_freq_hz = 28e9;
  int num_paths = 3;                     // M
  double pathloss_exp_min = 2.0;
  double pathloss_exp_max = 6.0;
  // reference distance of the d^-psi term; distances enter the pathloss as
  // max(1, d/d0) so the exponent acts on the cell scale, not on raw meters
  double pathloss_ref_dist_m = 25.0;
  double blockage_prob = 0.1;            // q
  double arrival_rate_bits = 3.5;        // lambda, bits/slot
  double queue_threshold_bits = 5.0;     // Q^th
  double violation_tolerance = 0.1;      // epsilon
  double tradeoff_v = 1.0;               // V
  ServingPolicy serving_set_policy = ServingPolicy::FixedL;
  int subset_param_l = 2;                // L
  int averaging_window_slots = 50;       // tau
  double dual_step_size = 0.01;          // beta_e
  double noise_power_mw = 1.0;           // sigma^2, linear milliwatts (normalized)
  int num_slots = 2000;                  // T
  int inner_iters = 4;                   // beamformer/dual passes per auxiliary round
  int outer_iters = 100;                 // solver iteration cap
  double solver_tolerance = 1e-4;
  std::uint64_t master_seed = 1;

  bool operator==(const ScenarioConfig&) const = default;
};

// Parse a key = value document. Unknown keys and malformed lines are errors,
// as are invariant violations (L > B, epsilon outside (0,1), ...).
ScenarioConfig load_config(const std::string& text);
ScenarioConfig load_config_file(const std::string& path);

// Apply a "key=value" override, then revalidate.
void apply_override(ScenarioConfig& cfg, const std::string& assignment);

// Canonical emitter; load_config(emit_config(cfg)) == cfg.
std::string emit_config(const ScenarioConfig& cfg);

// Throws std::invalid_argument with a descriptive message on violation.
void validate(const ScenarioConfig& cfg);

struct Vec2 {
  double x = 0.0, y = 0.0;
  bool operator==(const Vec2&) const = default;
};

struct Geometry {
  std::vector<Vec2> rru_positions;               // B entries
  std::vector<Vec2> ue_positions;                // K entries
  std::vector<double> distances;                 // B*K, row-major [b*K + k], clamped
  std::vector<std::vector<int>> serving_sets;    // per UE, sorted RRU indices

  double distance(int b, int k) const {
    return distances[static_cast<std::size_t>(b) * ue_count() + k];
  }
  int rru_count() const { return static_cast<int>(rru_positions.size()); }
  int ue_count() const { return static_cast<int>(ue_positions.size()); }

  bool operator==(const Geometry&) const = default;
};

// RRUs on a fixed quarter-cell grid, UEs drawn uniformly in the square from
// the seeded stream. Pure function of (cfg, seed). RRU-UE distances are
// clamped to >= 0.5 m. For the CB baseline the serving set of each UE is the
// single RRU with the largest expected channel gain (the nearest one);
// otherwise every UE is served by all RRUs.
Geometry generate_geometry(const ScenarioConfig& cfg, std::uint64_t seed);

}  // namespace jtcomp
