#include "dmimo/access.hpp"

#include <cmath>

#include "dmimo/errors.hpp"

namespace dmimo {

namespace {

struct PathLossKernel {
  double inv_d0;
  double alpha;
  double extent;

  // Returns l(d) and writes 1 + d/d0 and the wrapped displacement from x to u.
  double eval(Point x, Point u, double& base, Point& delta, double& d) const {
    delta = toroidal_delta(x, u, extent);
    d = std::hypot(delta.x, delta.y);
    base = 1.0 + d * inv_d0;
    return std::exp(-alpha * std::log(base));
  }
  double eval(Point x, Point u) const {
    double b, d;
    Point dl;
    return eval(x, u, b, dl, d);
  }
};

PathLossKernel kernel(const NetworkLayout& l, const SystemConfig& c) {
  return {1.0 / c.ref_distance_m, c.pathloss_exp, l.extent_m};
}

std::vector<double> pdf_weights(const CellGrid& g, const TrafficModel& m) {
  std::vector<double> w(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) w[i] = m.pdf(g.nodes[i], g.cell) * g.weight;
  return w;
}

std::vector<double> coefficients(const CellGrid& g, const std::vector<double>& pdfw,
                                 const std::vector<Point>& rrhs, const PathLossKernel& k, int m_ant) {
  const std::size_t n_rrh = rrhs.size();
  std::vector<double> c(n_rrh, 0.0), l(n_rrh);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (pdfw[i] == 0.0) continue;
    double sum = 0.0;
    for (std::size_t n = 0; n < n_rrh; ++n) sum += (l[n] = k.eval(rrhs[n], g.nodes[i]));
    const double s = pdfw[i] / (m_ant * sum);
    for (std::size_t n = 0; n < n_rrh; ++n) c[n] += l[n] * s;
  }
  for (double v : c)
    if (!std::isfinite(v)) throw NumericalError("ici_coefficients: non-finite value");
  return c;
}

std::vector<double> ici_grid(const CellGrid& g, const std::vector<Point>& src, const std::vector<double>& coef,
                             const PathLossKernel& k) {
  std::vector<double> out(g.nodes.size(), 0.0);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    double acc = 0.0;
    for (std::size_t n = 0; n < src.size(); ++n) acc += k.eval(src[n], g.nodes[i]) * coef[n];
    out[i] = acc;
  }
  return out;
}

double se_sum(const CellGrid& g, const std::vector<double>& pdfw, const std::vector<double>& inv_gamma,
              const std::vector<Point>& rrhs, const PathLossKernel& k) {
  double acc = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (pdfw[i] == 0.0) continue;
    double sum = 0.0;
    for (const Point& x : rrhs) sum += k.eval(x, g.nodes[i]);
    acc += pdfw[i] * std::log1p(inv_gamma[i] * sum);
  }
  if (!std::isfinite(acc)) throw NumericalError("expected_access_se: non-finite result");
  return acc;
}

std::vector<Point> gradient_sum(const CellGrid& g, const std::vector<double>& pdfw,
                                const std::vector<double>& inv_gamma, const std::vector<Point>& rrhs,
                                const PathLossKernel& k) {
  const std::size_t n_rrh = rrhs.size();
  std::vector<Point> grad(n_rrh);
  std::vector<double> l(n_rrh), base(n_rrh), dist(n_rrh);
  std::vector<Point> delta(n_rrh);
  const double dl = k.alpha * k.inv_d0;  // -dl/dd = (alpha/d0) (1+d/d0)^(-1-alpha)
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (pdfw[i] == 0.0) continue;
    double sum = 0.0;
    for (std::size_t n = 0; n < n_rrh; ++n) sum += (l[n] = k.eval(rrhs[n], g.nodes[i], base[n], delta[n], dist[n]));
    const double w = pdfw[i] * inv_gamma[i] / (1.0 + inv_gamma[i] * sum);
    for (std::size_t n = 0; n < n_rrh; ++n) {
      if (dist[n] == 0.0) continue;
      const double s = w * dl * l[n] / (base[n] * dist[n]);
      grad[n].x += s * delta[n].x;
      grad[n].y += s * delta[n].y;
    }
  }
  return grad;
}

double inv_gamma_value(double ici_sum, const SystemConfig& cfg, double rho) {
  const double nm_k = static_cast<double>(cfg.rrh_per_cell) * cfg.rrh_antennas - cfg.users_per_cell;
  const double pre = static_cast<double>(cfg.rrh_per_cell) * cfg.users_per_cell / (nm_k * rho);
  return 1.0 / (pre * (cfg.rrh_antennas * rho / cfg.users_per_cell * ici_sum + 1.0));
}

void check_access_config(const SystemConfig& cfg) {
  if (cfg.rrh_per_cell * cfg.rrh_antennas <= cfg.users_per_cell)
    throw ConfigError("access: rrh_per_cell * rrh_antennas must exceed users_per_cell");
}

}  // namespace

double access_snr(const SystemConfig& cfg) { return cfg.access_power_w / noise_power_w(cfg.access_rbs, cfg); }

std::vector<double> ici_coefficients(int q, const NetworkLayout& layout, const TrafficModel& model,
                                     const SystemConfig& cfg) {
  CellGrid g = make_cell_grid(q, layout, cfg.grid_n);
  return coefficients(g, pdf_weights(g, model), layout.cell_rrhs(q), kernel(layout, cfg), cfg.rrh_antennas);
}

double avg_ici(Point user, int q_prime, const NetworkLayout& layout, const TrafficModel& model,
               const SystemConfig& cfg) {
  const auto c = ici_coefficients(q_prime, layout, model, cfg);
  const auto k = kernel(layout, cfg);
  double acc = 0.0;
  for (int n = 0; n < layout.rrh_per_cell; ++n) acc += k.eval(layout.rrh_at(q_prime, n), user) * c[static_cast<std::size_t>(n)];
  return cfg.users_per_cell * acc;
}

double gamma_from_ici(double ici_sum, const SystemConfig& cfg) {
  check_access_config(cfg);
  return 1.0 / inv_gamma_value(ici_sum, cfg, access_snr(cfg));
}

double gamma_k(Point user, int q, const NetworkLayout& layout, const TrafficModel& model, const SystemConfig& cfg) {
  double ici = 0.0;
  for (int qp = 0; qp < layout.q_cells; ++qp)
    if (qp != q) ici += avg_ici(user, qp, layout, model, cfg);
  return gamma_from_ici(ici, cfg);
}

double access_se(Point user, int q, const NetworkLayout& layout, const TrafficModel& model, const SystemConfig& cfg) {
  const double g = gamma_k(user, q, layout, model, cfg);
  const auto k = kernel(layout, cfg);
  double sum = 0.0;
  for (int n = 0; n < layout.rrh_per_cell; ++n) sum += k.eval(layout.rrh_at(q, n), user);
  return std::log1p(sum / g);
}

namespace {

// Grid-wide 1/gamma for cell q computed from scratch.
std::vector<double> inv_gamma_grid(int q, const CellGrid& g, const NetworkLayout& layout, const TrafficModel& model,
                                   const SystemConfig& cfg) {
  check_access_config(cfg);
  const auto k = kernel(layout, cfg);
  std::vector<double> ici(g.nodes.size(), 0.0);
  for (int qp = 0; qp < layout.q_cells; ++qp) {
    if (qp == q) continue;
    CellGrid gp = make_cell_grid(qp, layout, cfg.grid_n);
    const auto src = layout.cell_rrhs(qp);
    const auto c = coefficients(gp, pdf_weights(gp, model), src, k, cfg.rrh_antennas);
    const auto part = ici_grid(g, src, c, k);
    for (std::size_t i = 0; i < ici.size(); ++i) ici[i] += part[i];
  }
  const double rho = access_snr(cfg);
  std::vector<double> inv(g.nodes.size());
  for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = inv_gamma_value(cfg.users_per_cell * ici[i], cfg, rho);
  return inv;
}

}  // namespace

double expected_access_se(int q, const NetworkLayout& layout, const TrafficModel& model, const SystemConfig& cfg) {
  CellGrid g = make_cell_grid(q, layout, cfg.grid_n);
  return se_sum(g, pdf_weights(g, model), inv_gamma_grid(q, g, layout, model, cfg), layout.cell_rrhs(q),
                kernel(layout, cfg));
}

AccessRateField access_rate_field(int q, const NetworkLayout& layout, const TrafficModel& model,
                                  const SystemConfig& cfg) {
  CellGrid g = make_cell_grid(q, layout, cfg.grid_n);
  const auto inv = inv_gamma_grid(q, g, layout, model, cfg);
  const auto pdfw = pdf_weights(g, model);
  const auto k = kernel(layout, cfg);
  const auto rrhs = layout.cell_rrhs(q);
  AccessRateField f;
  f.cell = q;
  f.nodes = g.nodes;
  f.se.resize(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    double sum = 0.0;
    for (const Point& x : rrhs) sum += k.eval(x, g.nodes[i]);
    f.se[i] = std::log1p(inv[i] * sum);
    f.expected_se += pdfw[i] * f.se[i];
  }
  return f;
}

Point gradient_theta(Point user, int m, int q, const NetworkLayout& layout, const TrafficModel& model,
                     const SystemConfig& cfg) {
  const double inv_g = 1.0 / gamma_k(user, q, layout, model, cfg);
  const auto k = kernel(layout, cfg);
  double sum = 0.0;
  for (int n = 0; n < layout.rrh_per_cell; ++n) sum += k.eval(layout.rrh_at(q, n), user);
  double base, d;
  Point delta;
  const double l = k.eval(layout.rrh_at(q, m), user, base, delta, d);
  if (d == 0.0) return {0.0, 0.0};
  const double s = k.alpha * k.inv_d0 * inv_g * l / (base * d * (1.0 + inv_g * sum));
  return {s * delta.x, s * delta.y};
}

Point objective_gradient(int m, int q, const NetworkLayout& layout, const TrafficModel& model,
                         const SystemConfig& cfg) {
  CellGrid g = make_cell_grid(q, layout, cfg.grid_n);
  const auto grad = gradient_sum(g, pdf_weights(g, model), inv_gamma_grid(q, g, layout, model, cfg),
                                 layout.cell_rrhs(q), kernel(layout, cfg));
  return grad.at(static_cast<std::size_t>(m));
}

// ---- AccessEvaluator ---------------------------------------------------------------

AccessEvaluator::AccessEvaluator(const SystemConfig& cfg, const TrafficModel& model, const NetworkLayout& layout)
    : cfg_(cfg), model_(&model), layout_(layout) {
  check_access_config(cfg_);
  const int qn = layout_.q_cells;
  grids_.reserve(static_cast<std::size_t>(qn));
  for (int q = 0; q < qn; ++q) {
    grids_.push_back(make_cell_grid(q, layout_, cfg_.grid_n));
    pdfw_.push_back(pdf_weights(grids_.back(), *model_));
  }
  coef_.resize(static_cast<std::size_t>(qn));
  for (int q = 0; q < qn; ++q) coef_[static_cast<std::size_t>(q)] = coefficients_for(q, layout_.cell_rrhs(q));
  ici_.assign(static_cast<std::size_t>(qn), std::vector<std::vector<double>>(static_cast<std::size_t>(qn)));
  for (int t = 0; t < qn; ++t)
    for (int s = 0; s < qn; ++s)
      if (s != t) ici_[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)] =
                      ici_on(t, layout_.cell_rrhs(s), coef_[static_cast<std::size_t>(s)]);
}

std::vector<double> AccessEvaluator::coefficients_for(int q, const std::vector<Point>& rrhs) const {
  return coefficients(grids_[static_cast<std::size_t>(q)], pdfw_[static_cast<std::size_t>(q)], rrhs,
                      kernel(layout_, cfg_), cfg_.rrh_antennas);
}

std::vector<double> AccessEvaluator::ici_on(int target, const std::vector<Point>& src,
                                            const std::vector<double>& coef) const {
  return ici_grid(grids_[static_cast<std::size_t>(target)], src, coef, kernel(layout_, cfg_));
}

void AccessEvaluator::move_cell(int q, const std::vector<Point>& rrhs) {
  layout_.set_cell_rrhs(q, rrhs);
  auto& c = coef_[static_cast<std::size_t>(q)];
  c = coefficients_for(q, rrhs);
  for (int t = 0; t < layout_.q_cells; ++t)
    if (t != q) ici_[static_cast<std::size_t>(t)][static_cast<std::size_t>(q)] = ici_on(t, rrhs, c);
}

std::vector<double> AccessEvaluator::inv_gamma(int q) const {
  const auto& g = grids_[static_cast<std::size_t>(q)];
  const double rho = access_snr(cfg_);
  std::vector<double> inv(g.nodes.size());
  for (std::size_t i = 0; i < inv.size(); ++i) {
    double ici = 0.0;
    for (int s = 0; s < layout_.q_cells; ++s)
      if (s != q) ici += ici_[static_cast<std::size_t>(q)][static_cast<std::size_t>(s)][i];
    inv[i] = inv_gamma_value(cfg_.users_per_cell * ici, cfg_, rho);
  }
  return inv;
}

double AccessEvaluator::expected_se(int q) const { return expected_se_candidate(q, layout_.cell_rrhs(q)); }

double AccessEvaluator::expected_se_candidate(int q, const std::vector<Point>& rrhs_q) const {
  return se_sum(grids_[static_cast<std::size_t>(q)], pdfw_[static_cast<std::size_t>(q)], inv_gamma(q), rrhs_q,
                kernel(layout_, cfg_));
}

double AccessEvaluator::se_with_part(int target, int moved, const std::vector<double>& part) const {
  const auto& g = grids_[static_cast<std::size_t>(target)];
  const double rho = access_snr(cfg_);
  std::vector<double> inv(g.nodes.size());
  for (std::size_t i = 0; i < inv.size(); ++i) {
    double ici = 0.0;
    for (int s = 0; s < layout_.q_cells; ++s) {
      if (s == target) continue;
      ici += (s == moved) ? part[i] : ici_[static_cast<std::size_t>(target)][static_cast<std::size_t>(s)][i];
    }
    inv[i] = inv_gamma_value(cfg_.users_per_cell * ici, cfg_, rho);
  }
  return se_sum(g, pdfw_[static_cast<std::size_t>(target)], inv, layout_.cell_rrhs(target), kernel(layout_, cfg_));
}

double AccessEvaluator::expected_se_if_moved(int target, int moved, const std::vector<Point>& rrhs_moved) const {
  if (target == moved) return expected_se_candidate(target, rrhs_moved);
  const auto c = coefficients_for(moved, rrhs_moved);
  return se_with_part(target, moved, ici_on(target, rrhs_moved, c));
}

std::vector<double> AccessEvaluator::expected_se_all_if_moved(int moved, const std::vector<Point>& rrhs_moved) const {
  std::vector<double> out(static_cast<std::size_t>(layout_.q_cells));
  const auto c = coefficients_for(moved, rrhs_moved);
  for (int t = 0; t < layout_.q_cells; ++t)
    out[static_cast<std::size_t>(t)] = (t == moved) ? expected_se_candidate(t, rrhs_moved)
                                                    : se_with_part(t, moved, ici_on(t, rrhs_moved, c));
  return out;
}

std::vector<Point> AccessEvaluator::gradient(int q) const { return gradient_candidate(q, layout_.cell_rrhs(q)); }

std::vector<Point> AccessEvaluator::gradient_candidate(int q, const std::vector<Point>& rrhs_q) const {
  return gradient_sum(grids_[static_cast<std::size_t>(q)], pdfw_[static_cast<std::size_t>(q)], inv_gamma(q), rrhs_q,
                      kernel(layout_, cfg_));
}

}  // namespace dmimo
