#pragma once

#include <cstdint>
#include <vector>

#include "dmimo/config.hpp"
#include "dmimo/netmodel.hpp"
#include "dmimo/quadrature.hpp"
#include "dmimo/traffic.hpp"

namespace dmimo {

// Spectral efficiencies are in nats/s/Hz throughout.

// rho = p / sigma_z^2 over the access bandwidth.
double access_snr(const SystemConfig& cfg);

// c_n = E_j[ l_j(x_n) / (M sum_m l_j(x_m)) ] over the cell's traffic density.
std::vector<double> ici_coefficients(int q, const NetworkLayout& layout, const TrafficModel& model,
                                     const SystemConfig& cfg);

double avg_ici(Point user, int q_prime, const NetworkLayout& layout, const TrafficModel& model,
               const SystemConfig& cfg);

// gamma_k from the summed average ICI; throws ConfigError when NM <= K.
double gamma_from_ici(double ici_sum, const SystemConfig& cfg);
double gamma_k(Point user, int q, const NetworkLayout& layout, const TrafficModel& model, const SystemConfig& cfg);

double access_se(Point user, int q, const NetworkLayout& layout, const TrafficModel& model, const SystemConfig& cfg);
double expected_access_se(int q, const NetworkLayout& layout, const TrafficModel& model, const SystemConfig& cfg);

// d R / d(x_m, y_m) at one user location, meters^-1. Zero when the user sits on the RRH.
Point gradient_theta(Point user, int m, int q, const NetworkLayout& layout, const TrafficModel& model,
                     const SystemConfig& cfg);
Point objective_gradient(int m, int q, const NetworkLayout& layout, const TrafficModel& model,
                         const SystemConfig& cfg);

// SE field of a cell on the quadrature grid.
struct AccessRateField {
  int cell = 0;
  std::vector<Point> nodes;
  std::vector<double> se;
  double expected_se = 0.0;
};
AccessRateField access_rate_field(int q, const NetworkLayout& layout, const TrafficModel& model,
                                  const SystemConfig& cfg);

// Cached evaluator for the optimizer. Holds per-cell ICI coefficients and the ICI each
// cell induces on every other cell's grid; only entries tied to a moved cell are rebuilt.
class AccessEvaluator {
 public:
  AccessEvaluator(const SystemConfig& cfg, const TrafficModel& model, const NetworkLayout& layout);

  const NetworkLayout& layout() const { return layout_; }
  void move_cell(int q, const std::vector<Point>& rrhs);

  double expected_se(int q) const;
  // Cell q's objective with its own RRHs replaced (other cells as cached).
  double expected_se_candidate(int q, const std::vector<Point>& rrhs_q) const;
  // Objective of cell `target` if cell `moved` used `rrhs_moved`.
  double expected_se_if_moved(int target, int moved, const std::vector<Point>& rrhs_moved) const;
  // Same for every cell at once; entry `moved` is the moved cell's own objective.
  std::vector<double> expected_se_all_if_moved(int moved, const std::vector<Point>& rrhs_moved) const;

  std::vector<Point> gradient(int q) const;
  std::vector<Point> gradient_candidate(int q, const std::vector<Point>& rrhs_q) const;

 private:
  std::vector<double> inv_gamma(int q) const;
  std::vector<double> coefficients_for(int q, const std::vector<Point>& rrhs) const;
  std::vector<double> ici_on(int target, const std::vector<Point>& src_rrhs, const std::vector<double>& coef) const;
  double se_with_part(int target, int moved, const std::vector<double>& part) const;

  SystemConfig cfg_;
  const TrafficModel* model_;
  NetworkLayout layout_;
  std::vector<CellGrid> grids_;
  std::vector<std::vector<double>> pdfw_;  // f_q(node) * cell weight
  std::vector<std::vector<double>> coef_;
  std::vector<std::vector<std::vector<double>>> ici_;  // [target][source][node]
};

// Monte Carlo estimate of the access SE with explicit ZF precoders and empirical
// vector normalisation.
struct AccessMcResult {
  double se = 0.0;             // nats/s/Hz
  double signal_w = 0.0;       // mu_qk^2
  double interference_w = 0.0; // inter-cluster term
  double noise_w = 0.0;
  double zf_offdiag_max = 0.0; // max |H^H W| off-diagonal relative to diagonal
  int draws = 0;
  int regenerated = 0;
};

AccessMcResult mc_access_se(Point user, int q, const NetworkLayout& layout, const TrafficModel& model,
                            const SystemConfig& cfg, int n_draws, std::uint64_t seed);

}  // namespace dmimo
