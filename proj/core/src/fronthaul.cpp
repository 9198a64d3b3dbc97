#include "dmimo/fronthaul.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "dmimo/errors.hpp"
#include "dmimo/quadrature.hpp"

namespace dmimo {

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Multicast1Rx: return "multicast-1rx";
    case Scheme::MulticastMrc: return "multicast-mrc";
    case Scheme::ZfMrc: return "zf-mrc";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "multicast-1rx") return Scheme::Multicast1Rx;
  if (name == "multicast-mrc") return Scheme::MulticastMrc;
  if (name == "zf-mrc") return Scheme::ZfMrc;
  throw ConfigError("unknown scheme '" + name + "' (expected multicast-1rx, multicast-mrc or zf-mrc)");
}

GammaParams gamma_fit(double mean, double var) {
  if (!(mean > 0.0) || !(var > 0.0) || !std::isfinite(mean) || !std::isfinite(var))
    throw std::domain_error("gamma_fit: mean and variance must be positive and finite");
  return {mean * mean / var, var / mean};
}

PowerModel power_model(const Moments& m) {
  if (m.var > 0.0 && m.mean > 0.0) return gamma_fit(m.mean, m.var);
  return ConstantPower{m.mean};
}

double sigma_max_mean(int m_rx, int m_cu) {
  if (m_rx < 1 || m_cu < 1) throw std::domain_error("sigma_max_mean: antenna counts must be >= 1");
  return std::sqrt(0.5 * m_rx) + std::sqrt(static_cast<double>(m_cu));
}

namespace {

double inv_sum(const std::vector<double>& pl) {
  double s = 0.0;
  for (double l : pl) s += 1.0 / l;
  return s;
}

void check_multicast(Scheme mode) {
  if (!is_multicast(mode)) throw std::invalid_argument("multicast closed form requested for the ZF scheme");
}

}  // namespace

double multicast_mu(const std::vector<double>& own_pl, const SystemConfig& cfg, Scheme mode) {
  check_multicast(mode);
  double s = inv_sum(own_pl);
  if (mode == Scheme::Multicast1Rx) return 1.0 / std::sqrt(cfg.cu_antennas * s);
  return 1.0 / (sigma_max_mean(cfg.rrh_antennas, cfg.cu_antennas) * std::sqrt(s));
}

Moments multicast_signal_moments(const std::vector<double>& own_pl, int n, const SystemConfig& cfg, Scheme mode) {
  check_multicast(mode);
  const double mc = cfg.cu_antennas;
  const double l = own_pl.at(static_cast<std::size_t>(n));
  const double s = inv_sum(own_pl) - 1.0 / l;  // sum over the other RRHs of the cell
  const double mu = multicast_mu(own_pl, cfg, mode);
  const double a = cfg.cu_power_w * mu * mu * l;
  Moments m;
  if (mode == Scheme::Multicast1Rx) {
    m.mean = a * (mc * mc / l + mc * s);
    m.var = a * a * (4.0 * mc * mc * mc / (l * l) + 2.0 * mc * mc * mc * s / l + mc * mc * s * s);
  } else {
    const double es = sigma_max_mean(cfg.rrh_antennas, cfg.cu_antennas);
    const double es4 = es * es * es * es;
    // Cross terms between distinct RRHs average to zero and are left out.
    m.mean = a * es4 * (1.0 / l + s / mc);
    m.var = a * a * es4 * es4 * (2.0 * s / (mc * l) + s * s / (mc * mc));
  }
  return m;
}

Moments multicast_interference_moments(const std::vector<double>& other_pl, double cu_power_w) {
  Moments m;
  for (double l : other_pl) {
    m.mean += cu_power_w * l;
    m.var += (cu_power_w * l) * (cu_power_w * l);
  }
  return m;
}

double zf_signal_power(double own_pl, const SystemConfig& cfg) {
  const int mc = cfg.cu_antennas, n = cfg.rrh_per_cell;
  if (mc <= n) throw ConfigError("zf_signal_power: cu_antennas must exceed rrh_per_cell");
  const double es = sigma_max_mean(cfg.rrh_antennas, mc);
  return cfg.cu_power_w / n * own_pl * es * es * (mc - n) / (mc - 1.0);
}

Moments zf_interference_moments(const std::vector<double>& other_pl, double cu_power_w, int rrh_per_cell) {
  Moments m = multicast_interference_moments(other_pl, cu_power_w);
  m.var /= rrh_per_cell;
  return m;
}

std::vector<double> own_path_losses(int q, const NetworkLayout& layout, const SystemConfig& cfg) {
  std::vector<double> pl(static_cast<std::size_t>(layout.rrh_per_cell));
  const Point& cu = layout.cu[static_cast<std::size_t>(q)];
  for (int n = 0; n < layout.rrh_per_cell; ++n)
    pl[static_cast<std::size_t>(n)] = path_loss(toroidal_distance(cu, layout.rrh_at(q, n), layout.extent_m), cfg);
  return pl;
}

std::vector<double> interferer_path_losses(int q, int n, const NetworkLayout& layout, const SystemConfig& cfg) {
  std::vector<double> pl;
  pl.reserve(static_cast<std::size_t>(layout.q_cells));
  for (int qp = 0; qp < layout.q_cells; ++qp) {
    if (qp == q) continue;
    pl.push_back(path_loss(toroidal_distance(layout.cu[static_cast<std::size_t>(qp)], layout.rrh_at(q, n),
                                             layout.extent_m),
                           cfg));
  }
  return pl;
}

double multicast_mu(int q, const NetworkLayout& layout, const SystemConfig& cfg, Scheme mode) {
  return multicast_mu(own_path_losses(q, layout, cfg), cfg, mode);
}

Moments multicast_signal_moments(int q, int n, const NetworkLayout& layout, const SystemConfig& cfg, Scheme mode) {
  return multicast_signal_moments(own_path_losses(q, layout, cfg), n, cfg, mode);
}

Moments multicast_interference_moments(int q, int n, const NetworkLayout& layout, const SystemConfig& cfg) {
  return multicast_interference_moments(interferer_path_losses(q, n, layout, cfg), cfg.cu_power_w);
}

double zf_signal_power(int q, int n, const NetworkLayout& layout, const SystemConfig& cfg) {
  const Point& cu = layout.cu[static_cast<std::size_t>(q)];
  return zf_signal_power(path_loss(toroidal_distance(cu, layout.rrh_at(q, n), layout.extent_m), cfg), cfg);
}

Moments zf_interference_moments(int q, int n, const NetworkLayout& layout, const SystemConfig& cfg) {
  return zf_interference_moments(interferer_path_losses(q, n, layout, cfg), cfg.cu_power_w, cfg.rrh_per_cell);
}

// ---- Outage -------------------------------------------------------------------------

namespace {

double gamma_cdf(const GammaParams& g, double x) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(g.shape, x / g.scale);
}

double model_cdf(const PowerModel& m, double x) {
  if (const auto* g = std::get_if<GammaParams>(&m)) return gamma_cdf(*g, x);
  return x >= std::get<ConstantPower>(m).value ? 1.0 : 0.0;
}

// E_I[F_S(t (I + sigma2))] for gamma I.
double average_over_interference(const GammaParams& gi, const PowerModel& sig, double t, double sigma2) {
  const double k = gi.shape, th = gi.scale;
  const double upper = gi.mean() + 12.0 * std::sqrt(gi.var());
  const double tol = 1e-6;
  SimpsonResult r;
  if (k >= 1.0) {
    boost::math::gamma_distribution<double> dist(k, th);
    auto f = [&](double i) { return model_cdf(sig, t * (i + sigma2)) * boost::math::pdf(dist, i); };
    r = adaptive_simpson(f, 0.0, upper, tol);
  } else {
    // i = u^(1/k) removes the integrable singularity of the density at zero.
    const double log_norm = -std::lgamma(k + 1.0) - k * std::log(th);
    auto f = [&](double u) {
      double i = std::pow(u, 1.0 / k);
      return model_cdf(sig, t * (i + sigma2)) * std::exp(log_norm - i / th);
    };
    r = adaptive_simpson(f, 0.0, std::pow(upper, k), tol);
  }
  if (!r.converged)
    throw NumericalError("rate_cdf: quadrature did not converge (shape_i=" + std::to_string(k) +
                         ", scale_i=" + std::to_string(th) + ", evaluations=" + std::to_string(r.evaluations) + ")");
  return std::clamp(r.value, 0.0, 1.0);
}

}  // namespace

double rate_cdf(double x_dot, const PowerModel& sig, const PowerModel& intf, double sigma2) {
  if (!(x_dot >= 0.0)) throw std::domain_error("rate_cdf: x_dot must be nonnegative");
  if (!(sigma2 > 0.0)) throw std::domain_error("rate_cdf: noise power must be positive");
  if (x_dot == 0.0) return 0.0;
  if (std::isinf(x_dot)) return 1.0;
  const double t = std::expm1(x_dot);

  if (const auto* s = std::get_if<ConstantPower>(&sig)) {
    // Outage iff I >= S/t - sigma2.
    const double thr = s->value / t - sigma2;
    if (thr <= 0.0) return 1.0;
    if (const auto* gi = std::get_if<GammaParams>(&intf)) return 1.0 - gamma_cdf(*gi, thr);
    return std::get<ConstantPower>(intf).value >= thr ? 1.0 : 0.0;
  }
  if (const auto* ci = std::get_if<ConstantPower>(&intf)) return model_cdf(sig, t * (ci->value + sigma2));
  return average_over_interference(std::get<GammaParams>(intf), sig, t, sigma2);
}

double min_rate_cdf(const std::vector<double>& per_rrh_cdf) {
  double keep = 1.0;
  for (double f : per_rrh_cdf) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::domain_error("min_rate_cdf: inputs must lie in [0,1]");
    keep *= 1.0 - f;
  }
  return 1.0 - keep;
}

std::vector<RrhStats> cell_fronthaul_stats(int q, const NetworkLayout& layout, const SystemConfig& cfg, Scheme s) {
  std::vector<RrhStats> out;
  out.reserve(static_cast<std::size_t>(layout.rrh_per_cell));
  const auto own = own_path_losses(q, layout, cfg);
  for (int n = 0; n < layout.rrh_per_cell; ++n) {
    RrhStats r;
    r.cell = q;
    r.rrh = n;
    const auto other = interferer_path_losses(q, n, layout, cfg);
    if (s == Scheme::ZfMrc) {
      r.sig = {zf_signal_power(own[static_cast<std::size_t>(n)], cfg), 0.0};
      r.intf = zf_interference_moments(other, cfg.cu_power_w, cfg.rrh_per_cell);
    } else {
      r.sig = multicast_signal_moments(own, n, cfg, s);
      r.intf = multicast_interference_moments(other, cfg.cu_power_w);
    }
    r.sig_model = power_model(r.sig);
    r.int_model = power_model(r.intf);
    out.push_back(r);
  }
  return out;
}

FronthaulStats fronthaul_stats(const NetworkLayout& layout, const SystemConfig& cfg, Scheme s) {
  FronthaulStats fs;
  fs.scheme = s;
  for (int q = 0; q < layout.q_cells; ++q) {
    auto c = cell_fronthaul_stats(q, layout, cfg, s);
    fs.rrh.insert(fs.rrh.end(), c.begin(), c.end());
  }
  return fs;
}

void write_stats_csv(std::ostream& os, const std::vector<FronthaulStats>& stats) {
  os << "cell,rrh,scheme,sig_mean,sig_var,int_mean,int_var,shape_s,scale_s,shape_i,scale_i\n";
  os << std::setprecision(12);
  auto params = [&](const PowerModel& m) {
    if (const auto* g = std::get_if<GammaParams>(&m)) os << g->shape << ',' << g->scale;
    else os << ',';
  };
  for (const auto& fs : stats) {
    for (const auto& r : fs.rrh) {
      os << r.cell << ',' << r.rrh << ',' << scheme_name(fs.scheme) << ',' << r.sig.mean << ',' << r.sig.var << ','
         << r.intf.mean << ',' << r.intf.var << ',';
      params(r.sig_model);
      os << ',';
      params(r.int_model);
      os << '\n';
    }
  }
}

}  // namespace dmimo
