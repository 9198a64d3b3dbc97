#pragma once

#include <vector>

#include "dmimo/config.hpp"
#include "dmimo/netmodel.hpp"
#include "dmimo/rng.hpp"

namespace dmimo {

struct Hotspot {
  Point center;
  double sigma_m = 100.0;
};

// Uniform plus Gaussian-hotspot mixture, truncated to each cell and renormalised.
// Hotspots belong to the cell containing their centre.
class TrafficModel {
 public:
  TrafficModel() = default;
  TrafficModel(const NetworkLayout& layout, double p_uniform, std::vector<Hotspot> hotspots);

  // Computes the per-cell normaliser on a grid_n x grid_n grid.
  void normalize(int grid_n);
  bool normalized() const { return !norm_.empty(); }

  // Density in 1/m^2; zero outside the cell. Throws ConfigError if not normalised.
  double pdf(Point p, int cell) const;
  double normalizer(int cell) const;

  double p_uniform() const { return p_uniform_; }
  const std::vector<Hotspot>& hotspots(int cell) const { return by_cell_[static_cast<std::size_t>(cell)]; }
  std::vector<Hotspot> all_hotspots() const;
  int q_cells() const { return static_cast<int>(by_cell_.size()); }

  // One user location in the cell, exact draw from the truncated density.
  Point sample_user(int cell, Rng& rng) const;

 private:
  double raw(Point p, int cell) const;

  NetworkLayout geom_;  // only geometry fields are used
  double p_uniform_ = 1.0;
  std::vector<std::vector<Hotspot>> by_cell_;
  std::vector<double> norm_;
};

TrafficModel uniform_traffic(const NetworkLayout& layout, int grid_n);

// Draws N_h ~ U{min..max} hotspots uniformly over the torus.
TrafficModel sample_traffic(const NetworkLayout& layout, const SystemConfig& cfg, Rng& rng);

}  // namespace dmimo
