#include "dmimo/traffic.hpp"

#include <cmath>
#include <numbers>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "dmimo/errors.hpp"
#include "dmimo/quadrature.hpp"

namespace dmimo {

TrafficModel::TrafficModel(const NetworkLayout& layout, double p_uniform, std::vector<Hotspot> hotspots)
    : geom_(layout), p_uniform_(p_uniform), by_cell_(static_cast<std::size_t>(layout.q_cells)) {
  if (!(p_uniform >= 0.0 && p_uniform <= 1.0)) throw ConfigError("traffic: p_uniform must lie in [0,1]");
  geom_.rrh.clear();
  for (const Hotspot& h : hotspots) {
    if (!(h.sigma_m > 0.0)) throw ConfigError("traffic: hotspot sigma must be positive");
    int owner = -1;
    for (int q = 0; q < layout.q_cells && owner < 0; ++q)
      if (layout.inside_cell(q, h.center)) owner = q;
    if (owner < 0) throw ConfigError("traffic: hotspot centre lies outside the network");
    by_cell_[static_cast<std::size_t>(owner)].push_back(h);
  }
}

double TrafficModel::raw(Point p, int cell) const {
  if (!geom_.inside_cell(cell, p)) return 0.0;
  const auto& hs = by_cell_[static_cast<std::size_t>(cell)];
  double area = geom_.cell_side_m * geom_.cell_side_m;
  if (hs.empty()) return 1.0 / area;
  double g = 0.0;
  for (const Hotspot& h : hs) {
    double dx = p.x - h.center.x, dy = p.y - h.center.y;
    double s2 = h.sigma_m * h.sigma_m;
    g += std::exp(-(dx * dx + dy * dy) / (2.0 * s2)) / (2.0 * std::numbers::pi * s2);
  }
  return p_uniform_ / area + (1.0 - p_uniform_) * g / static_cast<double>(hs.size());
}

void TrafficModel::normalize(int grid_n) {
  std::vector<double> c(by_cell_.size());
  for (int q = 0; q < q_cells(); ++q) {
    double mass = integrate_cell([&](Point p) { return raw(p, q); }, q, geom_, grid_n);
    if (!(mass > 0.0) || !std::isfinite(mass))
      throw ConfigError("traffic: density has no mass inside cell " + std::to_string(q));
    c[static_cast<std::size_t>(q)] = 1.0 / mass;
  }
  norm_ = std::move(c);
}

double TrafficModel::normalizer(int cell) const {
  if (!normalized()) throw ConfigError("traffic: model used before normalize()");
  return norm_.at(static_cast<std::size_t>(cell));
}

double TrafficModel::pdf(Point p, int cell) const {
  if (!normalized()) throw ConfigError("traffic: model used before normalize()");
  if (cell < 0 || cell >= q_cells()) throw ConfigError("traffic: cell index out of range");
  return norm_[static_cast<std::size_t>(cell)] * raw(p, cell);
}

std::vector<Hotspot> TrafficModel::all_hotspots() const {
  std::vector<Hotspot> out;
  for (const auto& v : by_cell_) out.insert(out.end(), v.begin(), v.end());
  return out;
}

Point TrafficModel::sample_user(int cell, Rng& rng) const {
  // The untruncated mixture restricted to the cell has density proportional to raw().
  const auto& hs = by_cell_[static_cast<std::size_t>(cell)];
  Point o = geom_.cell_origin(cell);
  boost::random::uniform_real_distribution<double> u01(0.0, 1.0);
  boost::random::normal_distribution<double> gauss(0.0, 1.0);
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    Point p;
    if (hs.empty() || u01(rng) < p_uniform_) {
      p = {o.x + u01(rng) * geom_.cell_side_m, o.y + u01(rng) * geom_.cell_side_m};
    } else {
      boost::random::uniform_int_distribution<std::size_t> pick(0, hs.size() - 1);
      const Hotspot& h = hs[pick(rng)];
      p = {h.center.x + h.sigma_m * gauss(rng), h.center.y + h.sigma_m * gauss(rng)};
    }
    if (geom_.inside_cell(cell, p)) return p;
  }
  throw NumericalError("traffic: user sampling failed to land inside the cell");
}

TrafficModel uniform_traffic(const NetworkLayout& layout, int grid_n) {
  TrafficModel m(layout, 1.0, {});
  m.normalize(grid_n);
  return m;
}

TrafficModel sample_traffic(const NetworkLayout& layout, const SystemConfig& cfg, Rng& rng) {
  int lo = cfg.traffic.resolved_min(cfg.q_cells), hi = cfg.traffic.resolved_max(cfg.q_cells);
  boost::random::uniform_int_distribution<int> count(lo, hi);
  boost::random::uniform_real_distribution<double> pos(0.0, layout.extent_m);
  int nh = count(rng);
  std::vector<Hotspot> hs;
  hs.reserve(static_cast<std::size_t>(nh));
  for (int i = 0; i < nh; ++i) {
    Point c{pos(rng), pos(rng)};
    // Keep centres strictly inside the torus so cell ownership is unambiguous.
    c.x = std::min(c.x, std::nextafter(layout.extent_m, 0.0));
    c.y = std::min(c.y, std::nextafter(layout.extent_m, 0.0));
    hs.push_back({c, cfg.traffic.hotspot_sigma_m});
  }
  TrafficModel m(layout, cfg.traffic.p_uniform, std::move(hs));
  m.normalize(cfg.grid_n);
  return m;
}

}  // namespace dmimo
