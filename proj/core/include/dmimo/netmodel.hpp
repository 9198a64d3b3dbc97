#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dmimo/config.hpp"

namespace dmimo {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }

// Square cells on a sqrt(Q) x sqrt(Q) torus. Cell q sits at column q % s, row q / s.
struct NetworkLayout {
  int q_cells = 0;
  int rrh_per_cell = 0;
  double cell_side_m = 0.0;
  double extent_m = 0.0;
  std::vector<Point> cu;   // one per cell
  std::vector<Point> rrh;  // cell-major, q * N + n

  Point& rrh_at(int q, int n) { return rrh[static_cast<std::size_t>(q * rrh_per_cell + n)]; }
  const Point& rrh_at(int q, int n) const { return rrh[static_cast<std::size_t>(q * rrh_per_cell + n)]; }

  Point cell_origin(int q) const;  // lower-left corner
  bool inside_cell(int q, Point p) const;
  std::vector<Point> cell_rrhs(int q) const;
  void set_cell_rrhs(int q, const std::vector<Point>& pts);

  // Throws ConfigError when coordinates are non-finite or an RRH leaves its cell.
  void validate() const;
};

// CUs at cell centres, every RRH co-located with its CU.
NetworkLayout make_grid_layout(const SystemConfig& cfg);

// (1 + d/d0)^-alpha. Throws std::domain_error for negative d.
double path_loss(double d_m, double d0, double alpha);
double path_loss(double d_m, const SystemConfig& cfg);

// Shortest displacement b - a on the torus, each component in [-extent/2, extent/2].
Point toroidal_delta(Point a, Point b, double extent_m);
double toroidal_distance(Point a, Point b, double extent_m);

// Thermal noise over n_rbs resource blocks, watts.
double noise_power_w(int n_rbs, const SystemConfig& cfg);

// Layout CSV: cell,node_type,index,x_m,y_m
void write_layout_csv(std::ostream& os, const NetworkLayout& layout);
NetworkLayout read_layout_csv(std::istream& is, const SystemConfig& cfg);

}  // namespace dmimo
