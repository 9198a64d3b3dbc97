#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace dmimo {

double dbm_to_w(double dbm);
double w_to_dbm(double w);

struct TrafficConfig {
  double p_uniform = 0.1;
  double hotspot_sigma_m = 100.0;
  // Network-wide hotspot count bounds; negative means 2Q and 4Q.
  int hotspots_min = -1;
  int hotspots_max = -1;

  int resolved_min(int q_cells) const { return hotspots_min < 0 ? 2 * q_cells : hotspots_min; }
  int resolved_max(int q_cells) const { return hotspots_max < 0 ? 4 * q_cells : hotspots_max; }
};

struct SystemConfig {
  int q_cells = 9;
  int rrh_per_cell = 10;
  int cu_antennas = 64;
  int rrh_antennas = 8;
  int users_per_cell = 10;
  double access_power_w = 1.0;          // 30 dBm
  double cu_power_w = 31.622776601683793;  // 45 dBm
  double rb_bandwidth_hz = 180e3;
  int access_rbs = 5;
  int fronthaul_rbs = 20;
  int rb_budget = 25;
  double ref_distance_m = 0.392;
  double pathloss_exp = 3.76;
  double noise_psd_dbm_hz = -174.0;
  double noise_figure_db = 8.0;
  double epsilon = 0.2;
  double d_cvg_m = 1.0;
  double step_init = 1e6;
  double step_shrink = 0.9;
  double cell_side_m = 1000.0;
  std::uint64_t rng_seed = 1;
  int grid_n = 50;        // midpoint grid per axis for cell integrals
  int max_sweeps = 50;

  TrafficConfig traffic;

  // Throws ConfigError on the first violated invariant.
  void validate() const;

  int grid_side() const;  // sqrt(q_cells)
  double extent_m() const { return cell_side_m * grid_side(); }
  double cell_area_m2() const { return cell_side_m * cell_side_m; }

  // Keeps access_rbs + fronthaul_rbs equal to the budget.
  void set_access_rbs(int omega);
};

SystemConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SystemConfig& cfg);
SystemConfig load_config(const std::string& path);

}  // namespace dmimo
