#include "dmimo/netmodel.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dmimo/errors.hpp"

namespace dmimo {

Point NetworkLayout::cell_origin(int q) const {
  int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(q_cells))));
  return {(q % s) * cell_side_m, (q / s) * cell_side_m};
}

bool NetworkLayout::inside_cell(int q, Point p) const {
  Point o = cell_origin(q);
  return p.x >= o.x && p.x <= o.x + cell_side_m && p.y >= o.y && p.y <= o.y + cell_side_m;
}

std::vector<Point> NetworkLayout::cell_rrhs(int q) const {
  auto first = rrh.begin() + q * rrh_per_cell;
  return {first, first + rrh_per_cell};
}

void NetworkLayout::set_cell_rrhs(int q, const std::vector<Point>& pts) {
  for (int n = 0; n < rrh_per_cell; ++n) rrh_at(q, n) = pts[static_cast<std::size_t>(n)];
}

void NetworkLayout::validate() const {
  if (static_cast<int>(cu.size()) != q_cells || static_cast<int>(rrh.size()) != q_cells * rrh_per_cell)
    throw ConfigError("layout size does not match q_cells/rrh_per_cell");
  for (int q = 0; q < q_cells; ++q) {
    for (int n = 0; n < rrh_per_cell; ++n) {
      const Point& p = rrh_at(q, n);
      if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw ConfigError("non-finite RRH coordinate in cell " + std::to_string(q));
      if (!inside_cell(q, p))
        throw ConfigError("RRH " + std::to_string(n) + " lies outside cell " + std::to_string(q));
    }
  }
}

NetworkLayout make_grid_layout(const SystemConfig& cfg) {
  NetworkLayout l;
  l.q_cells = cfg.q_cells;
  l.rrh_per_cell = cfg.rrh_per_cell;
  l.cell_side_m = cfg.cell_side_m;
  l.extent_m = cfg.extent_m();
  l.cu.resize(static_cast<std::size_t>(cfg.q_cells));
  l.rrh.resize(static_cast<std::size_t>(cfg.q_cells * cfg.rrh_per_cell));
  for (int q = 0; q < cfg.q_cells; ++q) {
    Point o = l.cell_origin(q);
    l.cu[static_cast<std::size_t>(q)] = {o.x + 0.5 * cfg.cell_side_m, o.y + 0.5 * cfg.cell_side_m};
    for (int n = 0; n < cfg.rrh_per_cell; ++n) l.rrh_at(q, n) = l.cu[static_cast<std::size_t>(q)];
  }
  return l;
}

double path_loss(double d_m, double d0, double alpha) {
  if (!(d_m >= 0.0)) throw std::domain_error("path_loss: negative or NaN distance");
  return std::exp(-alpha * std::log1p(d_m / d0));
}

double path_loss(double d_m, const SystemConfig& cfg) {
  return path_loss(d_m, cfg.ref_distance_m, cfg.pathloss_exp);
}

namespace {
double wrap(double d, double extent) {
  d = std::fmod(d, extent);
  if (d > 0.5 * extent) d -= extent;
  else if (d < -0.5 * extent) d += extent;
  return d;
}
}  // namespace

Point toroidal_delta(Point a, Point b, double extent_m) {
  return {wrap(b.x - a.x, extent_m), wrap(b.y - a.y, extent_m)};
}

double toroidal_distance(Point a, Point b, double extent_m) {
  Point d = toroidal_delta(a, b, extent_m);
  return std::hypot(d.x, d.y);
}

double noise_power_w(int n_rbs, const SystemConfig& cfg) {
  if (n_rbs < 1) throw std::domain_error("noise_power_w: n_rbs must be >= 1");
  double bw = n_rbs * cfg.rb_bandwidth_hz;
  return std::pow(10.0, (cfg.noise_psd_dbm_hz + 10.0 * std::log10(bw) + cfg.noise_figure_db - 30.0) / 10.0);
}

void write_layout_csv(std::ostream& os, const NetworkLayout& l) {
  os << "cell,node_type,index,x_m,y_m\n";
  os << std::setprecision(17);
  for (int q = 0; q < l.q_cells; ++q) {
    const Point& c = l.cu[static_cast<std::size_t>(q)];
    os << q << ",CU,0," << c.x << ',' << c.y << '\n';
    for (int n = 0; n < l.rrh_per_cell; ++n) {
      const Point& p = l.rrh_at(q, n);
      os << q << ",RRH," << n << ',' << p.x << ',' << p.y << '\n';
    }
  }
}

NetworkLayout read_layout_csv(std::istream& is, const SystemConfig& cfg) {
  NetworkLayout l = make_grid_layout(cfg);
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("layout CSV is empty");
  std::vector<int> seen(l.rrh.size(), 0);
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell, type, idx, xs, ys;
    if (!std::getline(ss, cell, ',') || !std::getline(ss, type, ',') || !std::getline(ss, idx, ',') ||
        !std::getline(ss, xs, ',') || !std::getline(ss, ys))
      throw ConfigError("layout CSV line " + std::to_string(lineno) + " is malformed");
    int q, n;
    Point p;
    try {
      q = std::stoi(cell);
      n = std::stoi(idx);
      p = {std::stod(xs), std::stod(ys)};
    } catch (const std::exception&) {
      throw ConfigError("layout CSV line " + std::to_string(lineno) + " has a bad number");
    }
    if (q < 0 || q >= l.q_cells) throw ConfigError("layout CSV cell index out of range");
    if (type == "CU") {
      l.cu[static_cast<std::size_t>(q)] = p;
    } else if (type == "RRH") {
      if (n < 0 || n >= l.rrh_per_cell) throw ConfigError("layout CSV RRH index out of range");
      l.rrh_at(q, n) = p;
      seen[static_cast<std::size_t>(q * l.rrh_per_cell + n)] = 1;
    } else {
      throw ConfigError("layout CSV node_type must be CU or RRH");
    }
  }
  for (int s : seen)
    if (!s) throw ConfigError("layout CSV does not list every RRH");
  l.validate();
  return l;
}

}  // namespace dmimo
