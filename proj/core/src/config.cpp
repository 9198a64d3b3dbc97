#include "dmimo/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dmimo/errors.hpp"

namespace dmimo {

double dbm_to_w(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double w_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

int SystemConfig::grid_side() const {
  int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(q_cells))));
  return s;
}

void SystemConfig::set_access_rbs(int omega) {
  access_rbs = omega;
  fronthaul_rbs = rb_budget - omega;
}

void SystemConfig::validate() const {
  require(q_cells >= 1, "q_cells must be positive");
  require(grid_side() * grid_side() == q_cells, "q_cells must be a perfect square (square grid of cells)");
  require(rrh_per_cell >= 1, "rrh_per_cell must be positive");
  require(cu_antennas >= 1, "cu_antennas must be positive");
  require(rrh_antennas >= 1, "rrh_antennas must be positive");
  require(users_per_cell >= 1, "users_per_cell must be positive");
  require(cu_antennas > rrh_per_cell, "cu_antennas must exceed rrh_per_cell");
  require(rrh_per_cell * rrh_antennas > users_per_cell,
          "rrh_per_cell * rrh_antennas must exceed users_per_cell");
  require(positive(access_power_w), "access_power_w must be positive");
  require(positive(cu_power_w), "cu_power_w must be positive");
  require(positive(rb_bandwidth_hz), "rb_bandwidth_hz must be positive");
  require(access_rbs >= 1, "access_rbs must be positive");
  require(fronthaul_rbs >= 1, "fronthaul_rbs must be positive");
  require(access_rbs + fronthaul_rbs == rb_budget, "access_rbs + fronthaul_rbs must equal rb_budget");
  require(positive(ref_distance_m), "ref_distance_m must be positive");
  require(positive(pathloss_exp), "pathloss_exp must be positive");
  require(std::isfinite(noise_psd_dbm_hz), "noise_psd_dbm_hz must be finite");
  require(std::isfinite(noise_figure_db), "noise_figure_db must be finite");
  require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0,1)");
  require(positive(d_cvg_m), "d_cvg_m must be positive");
  require(positive(step_init), "step_init must be positive");
  require(step_shrink > 0.0 && step_shrink < 1.0, "step_shrink must lie in (0,1)");
  require(positive(cell_side_m), "cell_side_m must be positive");
  require(grid_n >= 8, "grid_n must be at least 8");
  require(max_sweeps >= 1, "max_sweeps must be positive");
  require(traffic.p_uniform >= 0.0 && traffic.p_uniform <= 1.0, "traffic.p_uniform must lie in [0,1]");
  require(positive(traffic.hotspot_sigma_m), "traffic.hotspot_sigma_m must be positive");
  int lo = traffic.resolved_min(q_cells), hi = traffic.resolved_max(q_cells);
  require(lo >= 0 && hi >= lo, "traffic hotspot bounds must satisfy 0 <= min <= max");
}

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& section, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("section '" + section + "' must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown key '" + section + "." + k + "'");
  }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

SystemConfig config_from_json(const json& j) {
  SystemConfig c;
  if (!j.is_object()) throw ConfigError("config root must be an object");
  check_keys(j, "", {"network", "power", "bandwidth", "propagation", "algorithm", "traffic", "rng_seed"});
  read(j, "rng_seed", c.rng_seed);

  if (j.contains("network")) {
    const auto& s = j["network"];
    check_keys(s, "network", {"q_cells", "rrh_per_cell", "cu_antennas", "rrh_antennas", "users_per_cell",
                              "cell_side_m"});
    read(s, "q_cells", c.q_cells);
    read(s, "rrh_per_cell", c.rrh_per_cell);
    read(s, "cu_antennas", c.cu_antennas);
    read(s, "rrh_antennas", c.rrh_antennas);
    read(s, "users_per_cell", c.users_per_cell);
    read(s, "cell_side_m", c.cell_side_m);
  }
  if (j.contains("power")) {
    const auto& s = j["power"];
    check_keys(s, "power", {"access_power_dbm", "access_power_w", "cu_power_dbm", "cu_power_w"});
    if (s.contains("access_power_dbm") && s.contains("access_power_w"))
      throw ConfigError("give access power in dBm or W, not both");
    if (s.contains("cu_power_dbm") && s.contains("cu_power_w"))
      throw ConfigError("give CU power in dBm or W, not both");
    double v;
    if (s.contains("access_power_dbm")) { read(s, "access_power_dbm", v); c.access_power_w = dbm_to_w(v); }
    if (s.contains("cu_power_dbm")) { read(s, "cu_power_dbm", v); c.cu_power_w = dbm_to_w(v); }
    read(s, "access_power_w", c.access_power_w);
    read(s, "cu_power_w", c.cu_power_w);
  }
  if (j.contains("bandwidth")) {
    const auto& s = j["bandwidth"];
    check_keys(s, "bandwidth", {"rb_bandwidth_hz", "access_rbs", "fronthaul_rbs", "rb_budget"});
    read(s, "rb_bandwidth_hz", c.rb_bandwidth_hz);
    read(s, "rb_budget", c.rb_budget);
    read(s, "access_rbs", c.access_rbs);
    if (s.contains("fronthaul_rbs")) read(s, "fronthaul_rbs", c.fronthaul_rbs);
    else c.fronthaul_rbs = c.rb_budget - c.access_rbs;
  }
  if (j.contains("propagation")) {
    const auto& s = j["propagation"];
    check_keys(s, "propagation", {"ref_distance_m", "pathloss_exp", "noise_psd_dbm_hz", "noise_figure_db"});
    read(s, "ref_distance_m", c.ref_distance_m);
    read(s, "pathloss_exp", c.pathloss_exp);
    read(s, "noise_psd_dbm_hz", c.noise_psd_dbm_hz);
    read(s, "noise_figure_db", c.noise_figure_db);
  }
  if (j.contains("algorithm")) {
    const auto& s = j["algorithm"];
    check_keys(s, "algorithm", {"epsilon", "d_cvg_m", "step_init", "step_shrink", "grid_n", "max_sweeps"});
    read(s, "epsilon", c.epsilon);
    read(s, "d_cvg_m", c.d_cvg_m);
    read(s, "step_init", c.step_init);
    read(s, "step_shrink", c.step_shrink);
    read(s, "grid_n", c.grid_n);
    read(s, "max_sweeps", c.max_sweeps);
  }
  if (j.contains("traffic")) {
    const auto& s = j["traffic"];
    check_keys(s, "traffic", {"p_uniform", "hotspot_sigma_m", "hotspots_min", "hotspots_max"});
    read(s, "p_uniform", c.traffic.p_uniform);
    read(s, "hotspot_sigma_m", c.traffic.hotspot_sigma_m);
    read(s, "hotspots_min", c.traffic.hotspots_min);
    read(s, "hotspots_max", c.traffic.hotspots_max);
  }
  c.validate();
  return c;
}

json config_to_json(const SystemConfig& c) {
  json j;
  j["rng_seed"] = c.rng_seed;
  j["network"] = {{"q_cells", c.q_cells},         {"rrh_per_cell", c.rrh_per_cell},
                  {"cu_antennas", c.cu_antennas}, {"rrh_antennas", c.rrh_antennas},
                  {"users_per_cell", c.users_per_cell}, {"cell_side_m", c.cell_side_m}};
  j["power"] = {{"access_power_w", c.access_power_w}, {"cu_power_w", c.cu_power_w}};
  j["bandwidth"] = {{"rb_bandwidth_hz", c.rb_bandwidth_hz}, {"access_rbs", c.access_rbs},
                    {"fronthaul_rbs", c.fronthaul_rbs},     {"rb_budget", c.rb_budget}};
  j["propagation"] = {{"ref_distance_m", c.ref_distance_m}, {"pathloss_exp", c.pathloss_exp},
                      {"noise_psd_dbm_hz", c.noise_psd_dbm_hz}, {"noise_figure_db", c.noise_figure_db}};
  j["algorithm"] = {{"epsilon", c.epsilon},         {"d_cvg_m", c.d_cvg_m},   {"step_init", c.step_init},
                    {"step_shrink", c.step_shrink}, {"grid_n", c.grid_n},     {"max_sweeps", c.max_sweeps}};
  j["traffic"] = {{"p_uniform", c.traffic.p_uniform}, {"hotspot_sigma_m", c.traffic.hotspot_sigma_m},
                  {"hotspots_min", c.traffic.hotspots_min}, {"hotspots_max", c.traffic.hotspots_max}};
  return j;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse config file " + path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace dmimo
