#include "jtcomp/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace jtcomp {

const char* to_string(ServingPolicy p) {
  switch (p) {
    case ServingPolicy::FixedL: return "fixed";
    case ServingPolicy::Dynamic: return "dynamic";
    case ServingPolicy::CbBaseline: return "cb_baseline";
    case ServingPolicy::FullJtBaseline: return "full_jt_baseline";
  }
  return "fixed";
}

ServingPolicy parse_policy(const std::string& s) {
  if (s == "fixed") return ServingPolicy::FixedL;
  if (s == "dynamic") return ServingPolicy::Dynamic;
  if (s == "cb_baseline") return ServingPolicy::CbBaseline;
  if (s == "full_jt_baseline") return ServingPolicy::FullJtBaseline;
  throw std::invalid_argument("unknown serving_set_policy '" + s +
                              "' (expected fixed|dynamic|cb_baseline|full_jt_baseline)");
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not a number: '" + v + "'");
  }
  if (pos != v.size()) {
    throw std::invalid_argument("config key '" + key + "': trailing junk in '" + v + "'");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  const int i = static_cast<int>(d);
  if (static_cast<double>(i) != d) {
    throw std::invalid_argument("config key '" + key + "': expected integer, got '" + v + "'");
  }
  return i;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const auto out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("junk");
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': expected unsigned integer, got '" + v + "'");
  }
}

void set_key(ScenarioConfig& c, const std::string& key, const std::string& value) {
  if (key == "num_rrus") c.num_rrus = parse_int(key, value);
  else if (key == "num_ues") c.num_ues = parse_int(key, value);
  else if (key == "antennas_per_rru") c.antennas_per_rru = parse_int(key, value);
  else if (key == "area_side_m") c.area_side_m = parse_double(key, value);
  else if (key == "carrier_freq_hz") c.carrier_freq_hz = parse_double(key, value);
  else if (key == "num_paths") c.num_paths = parse_int(key, value);
  else if (key == "pathloss_exp_min") c.pathloss_exp_min = parse_double(key, value);
  else if (key == "pathloss_exp_max") c.pathloss_exp_max = parse_double(key, value);
  else if (key == "pathloss_ref_dist_m") c.pathloss_ref_dist_m = parse_double(key, value);
  else if (key == "blockage_prob") c.blockage_prob = parse_double(key, value);
  else if (key == "arrival_rate_bits_per_slot") c.arrival_rate_bits = parse_double(key, value);
  else if (key == "queue_threshold_bits") c.queue_threshold_bits = parse_double(key, value);
  else if (key == "violation_tolerance") c.violation_tolerance = parse_double(key, value);
  else if (key == "tradeoff_v") c.tradeoff_v = parse_double(key, value);
  else if (key == "serving_set_policy") c.serving_set_policy = parse_policy(value);
  else if (key == "subset_param_l") c.subset_param_l = parse_int(key, value);
  else if (key == "averaging_window_slots") c.averaging_window_slots = parse_int(key, value);
  else if (key == "dual_step_size") c.dual_step_size = parse_double(key, value);
  else if (key == "noise_power_mw") c.noise_power_mw = parse_double(key, value);
  else if (key == "num_slots") c.num_slots = parse_int(key, value);
  else if (key == "inner_iters") c.inner_iters = parse_int(key, value);
  else if (key == "outer_iters") c.outer_iters = parse_int(key, value);
  else if (key == "solver_tolerance") c.solver_tolerance = parse_double(key, value);
  else if (key == "master_seed") c.master_seed = parse_u64(key, value);
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("invalid config: " + msg); };
  if (c.num_rrus < 1) fail("num_rrus must be >= 1");
  if (c.num_ues < 1) fail("num_ues must be >= 1");
  if (c.antennas_per_rru < 1) fail("antennas_per_rru must be >= 1");
  if (c.num_paths < 1) fail("num_paths must be >= 1");
  if (c.num_slots < 1) fail("num_slots must be >= 1");
  if (c.inner_iters < 1) fail("inner_iters must be >= 1");
  if (c.outer_iters < 1) fail("outer_iters must be >= 1");
  if (c.averaging_window_slots < 1) fail("averaging_window_slots must be >= 1");
  if (c.area_side_m <= 0.0) fail("area_side_m must be positive");
  if (c.carrier_freq_hz <= 0.0) fail("carrier_freq_hz must be positive");
  if (c.pathloss_exp_min < 0.0) fail("pathloss_exp_min must be nonnegative");
  if (c.pathloss_exp_max < c.pathloss_exp_min) fail("pathloss_exp_max must be >= pathloss_exp_min");
  if (c.pathloss_ref_dist_m <= 0.0) fail("pathloss_ref_dist_m must be positive");
  if (c.blockage_prob < 0.0 || c.blockage_prob > 1.0) fail("blockage_prob must lie in [0,1]");
  if (c.arrival_rate_bits < 0.0) fail("arrival_rate_bits_per_slot must be nonnegative");
  if (c.queue_threshold_bits <= 0.0) fail("queue_threshold_bits must be positive");
  if (!(c.violation_tolerance > 0.0 && c.violation_tolerance < 1.0)) {
    fail("violation_tolerance must lie in the open interval (0,1)");
  }
  if (c.tradeoff_v < 0.0) fail("tradeoff_v must be nonnegative");
  if (c.subset_param_l < 1 || c.subset_param_l > c.num_rrus) {
    fail("subset_param_l must lie in [1, num_rrus]; got L=" + std::to_string(c.subset_param_l) +
         " with B=" + std::to_string(c.num_rrus));
  }
  if (c.dual_step_size <= 0.0) fail("dual_step_size must be positive");
  if (c.noise_power_mw <= 0.0) fail("noise_power_mw must be positive");
  if (c.solver_tolerance <= 0.0) fail("solver_tolerance must be positive");
}

ScenarioConfig load_config(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config parse error at line " + std::to_string(lineno) +
                                  ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw std::invalid_argument("config parse error at line " + std::to_string(lineno) +
                                  ": empty key or value");
    }
    set_key(cfg, key, value);
  }
  validate(cfg);
  return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("override must look like key=value: '" + assignment + "'");
  }
  set_key(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
  validate(cfg);
}

std::string emit_config(const ScenarioConfig& c) {
  std::ostringstream out;
  out << "# resolved scenario configuration\n";
  out << "num_rrus = " << c.num_rrus << "\n";
  out << "num_ues = " << c.num_ues << "\n";
  out << "antennas_per_rru = " << c.antennas_per_rru << "\n";
  out << "area_side_m = " << fmt_double(c.area_side_m) << "\n";
  out << "carrier_freq_hz = " << fmt_double(c.carrier_freq_hz) << "\n";
  out << "num_paths = " << c.num_paths << "\n";
  out << "pathloss_exp_min = " << fmt_double(c.pathloss_exp_min) << "\n";
  out << "pathloss_exp_max = " << fmt_double(c.pathloss_exp_max) << "\n";
  out << "pathloss_ref_dist_m = " << fmt_double(c.pathloss_ref_dist_m) << "\n";
  out << "blockage_prob = " << fmt_double(c.blockage_prob) << "\n";
  out << "arrival_rate_bits_per_slot = " << fmt_double(c.arrival_rate_bits) << "\n";
  out << "queue_threshold_bits = " << fmt_double(c.queue_threshold_bits) << "\n";
  out << "violation_tolerance = " << fmt_double(c.violation_tolerance) << "\n";
  out << "tradeoff_v = " << fmt_double(c.tradeoff_v) << "\n";
  out << "serving_set_policy = " << to_string(c.serving_set_policy) << "\n";
  out << "subset_param_l = " << c.subset_param_l << "\n";
  out << "averaging_window_slots = " << c.averaging_window_slots << "\n";
  out << "dual_step_size = " << fmt_double(c.dual_step_size) << "\n";
  out << "noise_power_mw = " << fmt_double(c.noise_power_mw) << "\n";
  out << "num_slots = " << c.num_slots << "\n";
  out << "inner_iters = " << c.inner_iters << "\n";
  out << "outer_iters = " << c.outer_iters << "\n";
  out << "solver_tolerance = " << fmt_double(c.solver_tolerance) << "\n";
  out << "master_seed = " << c.master_seed << "\n";
  return out.str();
}

Geometry generate_geometry(const ScenarioConfig& cfg, std::uint64_t seed) {
  Geometry g;
  const int b_count = cfg.num_rrus;
  const int k_count = cfg.num_ues;

  // RRUs at the centers of a quarter-cell grid, row-major in x then y.
  const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(b_count))));
  const double cell = cfg.area_side_m / grid;
  g.rru_positions.reserve(b_count);
  for (int i = 0; i < b_count; ++i) {
    const int ix = i / grid;
    const int iy = i % grid;
    g.rru_positions.push_back({(ix + 0.5) * cell, (iy + 0.5) * cell});
  }

  Rng rng(seed);
  g.ue_positions.reserve(k_count);
  for (int k = 0; k < k_count; ++k) {
    const double x = rng.uniform(0.0, cfg.area_side_m);
    const double y = rng.uniform(0.0, cfg.area_side_m);
    g.ue_positions.push_back({x, y});
  }

  g.distances.resize(static_cast<std::size_t>(b_count) * k_count);
  for (int b = 0; b < b_count; ++b) {
    for (int k = 0; k < k_count; ++k) {
      const double dx = g.rru_positions[b].x - g.ue_positions[k].x;
      const double dy = g.rru_positions[b].y - g.ue_positions[k].y;
      // clamp bounds the d^-psi singularity near zero separation
      g.distances[static_cast<std::size_t>(b) * k_count + k] =
          std::max(0.5, std::hypot(dx, dy));
    }
  }

  g.serving_sets.resize(k_count);
  for (int k = 0; k < k_count; ++k) {
    if (cfg.serving_set_policy == ServingPolicy::CbBaseline) {
      int best = 0;
      for (int b = 1; b < b_count; ++b) {
        if (g.distance(b, k) < g.distance(best, k)) best = b;
      }
      g.serving_sets[k] = {best};
    } else {
      g.serving_sets[k].resize(b_count);
      std::iota(g.serving_sets[k].begin(), g.serving_sets[k].end(), 0);
    }
  }
  return g;
}

}  // namespace jtcomp
