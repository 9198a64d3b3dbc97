#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dmimo/errors.hpp"
#include "dmimo/netmodel.hpp"

namespace dmimo {

// Midpoint nodes of a grid_n x grid_n tensor grid over one cell.
struct CellGrid {
  int cell = 0;
  int grid_n = 0;
  double weight = 0.0;  // area of one sub-square
  std::vector<Point> nodes;
};

CellGrid make_cell_grid(int cell, const NetworkLayout& layout, int grid_n);

template <class F>
double integrate_grid(F&& f, const CellGrid& g) {
  double acc = 0.0;
  for (const Point& p : g.nodes) {
    double v = f(p);
    if (!std::isfinite(v)) throw NumericalError("integrate_cell: non-finite integrand value");
    acc += v;
  }
  return acc * g.weight;
}

template <class F>
double integrate_cell(F&& f, int cell, const NetworkLayout& layout, int grid_n) {
  if (grid_n < 8) throw std::domain_error("integrate_cell: grid_n must be >= 8");
  return integrate_grid(std::forward<F>(f), make_cell_grid(cell, layout, grid_n));
}

struct SimpsonResult {
  double value = 0.0;
  int evaluations = 0;
  bool converged = true;
};

// Adaptive Simpson on [a,b] with absolute tolerance tol.
SimpsonResult adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                               int max_depth = 40);

}  // namespace dmimo
