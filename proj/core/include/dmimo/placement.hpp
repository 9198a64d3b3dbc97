#pragma once

#include <string>
#include <vector>

#include "dmimo/access.hpp"
#include "dmimo/config.hpp"
#include "dmimo/fronthaul.hpp"
#include "dmimo/netmodel.hpp"
#include "dmimo/rng.hpp"
#include "dmimo/traffic.hpp"

namespace dmimo {

struct ConstraintSpec {
  Scheme scheme = Scheme::MulticastMrc;
  double epsilon = 0.2;
};

ConstraintSpec constraint_from_config(const SystemConfig& cfg, Scheme scheme);

// Required fronthaul rate K (omega/omega_b) E{R}, nats/s/Hz.
double rate_threshold(double expected_se, const SystemConfig& cfg);

struct CellOutage {
  double threshold = 0.0;
  std::vector<double> per_rrh;  // P{R_n <= threshold}
  double outage = 0.0;          // min-rate outage (multicast) or worst RRH (ZF)
  bool ok = false;
};

CellOutage cell_outage(const std::vector<RrhStats>& stats, const SystemConfig& cfg, const ConstraintSpec& spec,
                       double expected_se);
CellOutage cell_outage(int q, const NetworkLayout& layout, const SystemConfig& cfg, const ConstraintSpec& spec,
                       double expected_se);
bool fronthaul_constraint_ok(int q, const NetworkLayout& layout, const SystemConfig& cfg, const ConstraintSpec& spec,
                             double expected_se);

// RRHs uniform in a disc around each CU.
NetworkLayout initial_layout(const SystemConfig& cfg, Rng& rng, double radius_m = 20.0);

// Seeded starting layout and traffic realisation. The traffic depends only on the seed
// and the cell grid, so runs that vary N, M, K or omega share it.
struct Scenario {
  NetworkLayout initial;
  TrafficModel traffic;
};
Scenario make_scenario(const SystemConfig& cfg, std::uint64_t seed);

struct OptimizeOptions {
  int max_sweeps = 50;
  // Re-check every other cell's constraint before accepting a move (their thresholds
  // depend on the moved cell through inter-cluster interference).
  bool guard_other_cells = true;
  // Also require the cell objective not to decrease.
  bool require_ascent = true;
  // A step whose largest move is below this is treated as no move.
  double min_move_m = 1e-3;
  // Restart every cell update from the configured step; otherwise the shrunken step
  // carries over to later cells and sweeps.
  bool reset_step = true;
};

enum class PlacementStatus { Converged, MaxSweeps, Infeasible };
std::string status_name(PlacementStatus s);

struct SweepRecord {
  int sweep = 0;
  double d_max = 0.0;
  std::vector<double> cell_se;
  double mean_se = 0.0;
  int shrinks = 0;
};

struct PlacementState {
  NetworkLayout layout;
  double step = 0.0;      // last accepted step size
  int iteration = 0;      // completed sweeps
  double d_max = 0.0;
  std::vector<SweepRecord> history;  // entry 0 is the initial layout
  std::vector<double> final_se;
  PlacementStatus status = PlacementStatus::Converged;
  std::string message;
  int step_underflows = 0;
};

PlacementState optimize(const NetworkLayout& layout0, const TrafficModel& model, const SystemConfig& cfg,
                        const ConstraintSpec& spec, const OptimizeOptions& opt = {});

struct BaselineResult {
  NetworkLayout layout;
  std::vector<double> radius_m;
  std::vector<double> cell_se;
  double mean_se = 0.0;
  bool feasible = true;
  std::string message;
};

// N RRHs at angles 2 pi i / N on a circle around the CU; radius is the largest feasible
// value (bisection, 1 m) capped at (2/3)(cell_side/2). Other cells are taken from `layout`.
BaselineResult circular_baseline(int q, const NetworkLayout& layout, const TrafficModel& model,
                                 const SystemConfig& cfg, const ConstraintSpec& spec);
// Applies the per-cell baseline to every cell in turn.
BaselineResult circular_baseline(const NetworkLayout& layout, const TrafficModel& model, const SystemConfig& cfg,
                                 const ConstraintSpec& spec);

std::vector<Point> ring(Point centre, double radius, int n);

}  // namespace dmimo
