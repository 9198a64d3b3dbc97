#include "dmimo/quadrature.hpp"

namespace dmimo {

CellGrid make_cell_grid(int cell, const NetworkLayout& layout, int grid_n) {
  if (grid_n < 8) throw std::domain_error("make_cell_grid: grid_n must be >= 8");
  CellGrid g;
  g.cell = cell;
  g.grid_n = grid_n;
  double h = layout.cell_side_m / grid_n;
  g.weight = h * h;
  Point o = layout.cell_origin(cell);
  g.nodes.reserve(static_cast<std::size_t>(grid_n * grid_n));
  for (int i = 0; i < grid_n; ++i)
    for (int j = 0; j < grid_n; ++j) g.nodes.push_back({o.x + (j + 0.5) * h, o.y + (i + 0.5) * h});
  return g;
}

namespace {

struct Simpson {
  const std::function<double(double)>& f;
  int evals = 0;
  bool converged = true;

  double eval(double x) {
    ++evals;
    double v = f(x);
    if (!std::isfinite(v)) throw NumericalError("adaptive_simpson: non-finite integrand at x=" + std::to_string(x));
    return v;
  }

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = eval(lm), frm = eval(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double diff = left + right - whole;
    if (depth <= 0) {
      converged = false;
      return left + right + diff / 15.0;
    }
    if (std::fabs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  }
};

}  // namespace

SimpsonResult adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                               int max_depth) {
  SimpsonResult r;
  if (b <= a) return r;
  Simpson s{f};
  double fa = s.eval(a), fb = s.eval(b);
  // Split into 16 panels first so a narrow peak cannot hide between the initial nodes.
  const int pre = 4;
  int pieces = 1 << pre;
  double h = (b - a) / pieces;
  double total = 0.0;
  for (int i = 0; i < pieces; ++i) {
    double x0 = a + i * h, x1 = (i + 1 == pieces) ? b : x0 + h;
    double f0 = (i == 0) ? fa : s.eval(x0);
    double f1 = (i + 1 == pieces) ? fb : s.eval(x1);
    double fmid = s.eval(0.5 * (x0 + x1));
    double w = (x1 - x0) / 6.0 * (f0 + 4.0 * fmid + f1);
    total += s.recurse(x0, x1, f0, fmid, f1, w, tol / pieces, max_depth);
  }
  r.value = total;
  r.evaluations = s.evals;
  r.converged = s.converged;
  return r;
}

}  // namespace dmimo
