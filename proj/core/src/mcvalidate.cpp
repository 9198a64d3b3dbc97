#include "dmimo/mcvalidate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <boost/random/uniform_real_distribution.hpp>
#include <nlohmann/json.hpp>

#include "dmimo/errors.hpp"
#include "dmimo/placement.hpp"

namespace dmimo {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

MatrixXcd sample_fading(int rows, int cols, Rng& rng) {
  ComplexNormal cn;
  MatrixXcd g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) g(i, j) = cn(rng);
  return g;
}

TopSingular top_singular(const MatrixXcd& g) {
  TopSingular t;
  if (!g.allFinite()) throw NumericalError("top_singular: non-finite channel matrix");
  if (g.cols() == 1) {
    t.sigma = g.col(0).norm();
    t.v = VectorXcd::Ones(1);
    t.u = g.col(0) / t.sigma;
    return t;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(g.adjoint() * g);
  if (es.info() != Eigen::Success) throw NumericalError("top_singular: eigen-decomposition failed");
  const Eigen::Index k = g.cols() - 1;  // eigenvalues ascend
  t.sigma = std::sqrt(std::max(0.0, es.eigenvalues()(k)));
  t.v = es.eigenvectors().col(k);
  t.u = g * t.v / t.sigma;
  return t;
}

std::vector<double> FronthaulSamples::sig_series(int q, int n) const {
  std::vector<double> out(static_cast<std::size_t>(draws));
  for (int d = 0; d < draws; ++d) out[static_cast<std::size_t>(d)] = sig[index(d, q, n)];
  return out;
}

std::vector<double> FronthaulSamples::int_series(int q, int n) const {
  std::vector<double> out(static_cast<std::size_t>(draws));
  for (int d = 0; d < draws; ++d) out[static_cast<std::size_t>(d)] = intf[index(d, q, n)];
  return out;
}

std::vector<double> FronthaulSamples::rate_series(int q, int n, double sigma2) const {
  std::vector<double> out(static_cast<std::size_t>(draws));
  for (int d = 0; d < draws; ++d) {
    const std::size_t i = index(d, q, n);
    out[static_cast<std::size_t>(d)] = std::log1p(sig[i] / (intf[i] + sigma2));
  }
  return out;
}

namespace {

struct OwnLinks {
  // z[q*N+n] = G_{q,qn} b_qn (unit-power small-scale part of the effective channel).
  std::vector<VectorXcd> z;
  std::vector<VectorXcd> b;
  std::vector<double> sigma;
};

OwnLinks draw_own_links(int qn, int nn, int mc, int m_eff, Rng& rng) {
  OwnLinks o;
  o.z.reserve(static_cast<std::size_t>(qn * nn));
  for (int i = 0; i < qn * nn; ++i) {
    MatrixXcd g = sample_fading(mc, m_eff, rng);
    TopSingular t = top_singular(g);
    o.z.push_back(t.sigma * t.u);
    o.b.push_back(t.v);
    o.sigma.push_back(t.sigma);
  }
  return o;
}

// ZF precoder columns E (E^H E)^-1 for effective channels e_n = sqrt(l_n) z_n.
MatrixXcd zf_unnormalised(const OwnLinks& o, int q, int nn, int mc, const std::vector<double>& own_pl) {
  MatrixXcd e(mc, nn);
  for (int n = 0; n < nn; ++n)
    e.col(n) = std::sqrt(own_pl[static_cast<std::size_t>(n)]) * o.z[static_cast<std::size_t>(q * nn + n)];
  MatrixXcd gram = e.adjoint() * e;
  Eigen::LLT<MatrixXcd> llt(gram);
  if (llt.info() != Eigen::Success) throw NumericalError("simulate_fronthaul: singular ZF Gram matrix");
  return e * llt.solve(MatrixXcd::Identity(nn, nn));
}

}  // namespace

FronthaulSamples simulate_fronthaul(Scheme scheme, const NetworkLayout& layout, const SystemConfig& cfg, int n_draws,
                                    const SimOptions& opt) {
  if (n_draws < 1) throw std::domain_error("simulate_fronthaul: n_draws must be positive");
  if (scheme != Scheme::Multicast1Rx && opt.warmup_draws < 1)
    throw std::domain_error("simulate_fronthaul: warmup_draws must be positive");
  const int qn = layout.q_cells, nn = layout.rrh_per_cell, mc = cfg.cu_antennas;
  const int m_eff = scheme == Scheme::Multicast1Rx ? 1 : cfg.rrh_antennas;
  const double pc = cfg.cu_power_w;

  std::vector<std::vector<double>> own(static_cast<std::size_t>(qn));
  std::vector<std::vector<double>> cross(static_cast<std::size_t>(qn * nn));  // [q*N+n][q'] CU q' -> RRH
  for (int q = 0; q < qn; ++q) {
    own[static_cast<std::size_t>(q)] = own_path_losses(q, layout, cfg);
    for (int n = 0; n < nn; ++n) {
      auto& row = cross[static_cast<std::size_t>(q * nn + n)];
      row.resize(static_cast<std::size_t>(qn));
      for (int qp = 0; qp < qn; ++qp)
        row[static_cast<std::size_t>(qp)] =
            path_loss(toroidal_distance(layout.cu[static_cast<std::size_t>(qp)], layout.rrh_at(q, n), layout.extent_m), cfg);
    }
  }

  FronthaulSamples s;
  s.scheme = scheme;
  s.q_cells = qn;
  s.rrh_per_cell = nn;
  s.draws = n_draws;

  // Normalisation. 1RX: E||sum g_n / sqrt(l_n)||^2 = Mc sum 1/l_n exactly.
  // MRC: E||sum G_n v_n / sqrt(l_n)||^2 = E{sigma_max^2} sum 1/l_n, E{sigma_max^2} from warmup.
  // ZF: E||w~_n||^2 per RRH from warmup.
  if (scheme == Scheme::ZfMrc) {
    s.mu2.assign(static_cast<std::size_t>(qn * nn), 0.0);
    std::vector<double> acc(static_cast<std::size_t>(qn * nn), 0.0);
    for (int d = 0; d < opt.warmup_draws; ++d) {
      Rng rng = substream(opt.seed, stream::kWarmup, static_cast<std::uint64_t>(d));
      OwnLinks o = draw_own_links(qn, nn, mc, m_eff, rng);
      for (int q = 0; q < qn; ++q) {
        MatrixXcd w = zf_unnormalised(o, q, nn, mc, own[static_cast<std::size_t>(q)]);
        for (int n = 0; n < nn; ++n) acc[static_cast<std::size_t>(q * nn + n)] += w.col(n).squaredNorm();
      }
    }
    for (std::size_t i = 0; i < acc.size(); ++i) s.mu2[i] = 1.0 / (nn * acc[i] / opt.warmup_draws);
  } else {
    double es2 = static_cast<double>(mc);
    if (scheme == Scheme::MulticastMrc) {
      double acc = 0.0;
      long count = 0;
      for (int d = 0; d < opt.warmup_draws; ++d) {
        Rng rng = substream(opt.seed, stream::kWarmup, static_cast<std::uint64_t>(d));
        OwnLinks o = draw_own_links(qn, nn, mc, m_eff, rng);
        for (double sg : o.sigma) {
          acc += sg * sg;
          ++count;
        }
      }
      es2 = acc / static_cast<double>(count);
    }
    s.mu2.resize(static_cast<std::size_t>(qn));
    for (int q = 0; q < qn; ++q) {
      double inv = 0.0;
      for (double l : own[static_cast<std::size_t>(q)]) inv += 1.0 / l;
      s.mu2[static_cast<std::size_t>(q)] = 1.0 / (es2 * inv);
    }
  }

  s.sig.assign(static_cast<std::size_t>(n_draws) * qn * nn, 0.0);
  s.intf.assign(static_cast<std::size_t>(n_draws) * qn * nn, 0.0);
  ComplexNormal cn;
  std::vector<MatrixXcd> bf(static_cast<std::size_t>(qn));  // Mc x (1 or N) transmit beams per CU
  VectorXcd x(mc);

  for (int d = 0; d < n_draws; ++d) {
    Rng rng = substream(opt.seed, stream::kFronthaul, static_cast<std::uint64_t>(d));
    OwnLinks o = draw_own_links(qn, nn, mc, m_eff, rng);

    for (int q = 0; q < qn; ++q) {
      const auto& pl = own[static_cast<std::size_t>(q)];
      if (scheme == Scheme::ZfMrc) {
        MatrixXcd w = zf_unnormalised(o, q, nn, mc, pl);
        for (int n = 0; n < nn; ++n) w.col(n) *= std::sqrt(s.mu2[static_cast<std::size_t>(q * nn + n)]);
        bf[static_cast<std::size_t>(q)] = std::move(w);
      } else {
        VectorXcd w = VectorXcd::Zero(mc);
        for (int n = 0; n < nn; ++n)
          w += o.z[static_cast<std::size_t>(q * nn + n)] / std::sqrt(pl[static_cast<std::size_t>(n)]);
        bf[static_cast<std::size_t>(q)] = std::sqrt(s.mu2[static_cast<std::size_t>(q)]) * w;
      }
    }

    for (int q = 0; q < qn; ++q) {
      if (opt.only_cell >= 0 && q != opt.only_cell) continue;
      for (int n = 0; n < nn; ++n) {
        const std::size_t rid = static_cast<std::size_t>(q * nn + n);
        const auto& row = cross[rid];
        const double l = row[static_cast<std::size_t>(q)];
        const VectorXcd& z = o.z[rid];
        double sig;
        if (scheme == Scheme::ZfMrc) {
          Eigen::RowVectorXcd y = std::sqrt(l) * (z.adjoint() * bf[static_cast<std::size_t>(q)]);
          const double own_amp = std::abs(y(n));
          sig = pc * own_amp * own_amp;
          for (int k = 0; k < nn; ++k)
            if (k != n) s.zf_incell_leak_max = std::max(s.zf_incell_leak_max, std::abs(y(k)) / own_amp);
        } else {
          const std::complex<double> y = std::sqrt(l) * z.dot(bf[static_cast<std::size_t>(q)].col(0));
          sig = pc * std::norm(y);
        }
        double itf = 0.0;
        for (int qp = 0; qp < qn; ++qp) {
          if (qp == q) continue;
          if (opt.project_interference) {
            for (int i = 0; i < mc; ++i) x(i) = cn(rng);
          } else {
            x = sample_fading(mc, m_eff, rng) * o.b[rid];
          }
          const MatrixXcd& w = bf[static_cast<std::size_t>(qp)];
          itf += pc * row[static_cast<std::size_t>(qp)] * (x.adjoint() * w).squaredNorm();
        }
        s.sig[s.index(d, q, n)] = sig;
        s.intf[s.index(d, q, n)] = itf;
      }
    }
  }
  return s;
}

Moments empirical_moments(const std::vector<double>& x) {
  if (x.size() < 2) throw std::domain_error("empirical_moments: need at least two samples");
  // Two-pass for accuracy.
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, ss / static_cast<double>(x.size() - 1)};
}

NetworkLayout random_layout(const SystemConfig& cfg, Rng& rng, double exclusion_m) {
  NetworkLayout l = make_grid_layout(cfg);
  boost::random::uniform_real_distribution<double> u(0.0, cfg.cell_side_m);
  for (int q = 0; q < l.q_cells; ++q) {
    const Point o = l.cell_origin(q), c = l.cu[static_cast<std::size_t>(q)];
    for (int n = 0; n < l.rrh_per_cell; ++n) {
      Point p;
      do {
        p = {o.x + u(rng), o.y + u(rng)};
      } while (std::hypot(p.x - c.x, p.y - c.y) <= exclusion_m);
      l.rrh_at(q, n) = p;
    }
  }
  return l;
}

KsSampleSets ks_sample_sets(Scheme scheme, const SystemConfig& cfg, int reps, int draws, std::uint64_t seed,
                            int warmup_draws) {
  KsSampleSets out;
  for (int r = 0; r < reps; ++r) {
    Rng rng = substream(seed, stream::kKs, static_cast<std::uint64_t>(r));
    const NetworkLayout l = random_layout(cfg, rng);
    SimOptions opt;
    opt.seed = seed + 1000003ULL * static_cast<std::uint64_t>(r + 1);
    opt.warmup_draws = warmup_draws;
    opt.only_cell = 0;
    const FronthaulSamples s = simulate_fronthaul(scheme, l, cfg, draws, opt);
    const int n = r % cfg.rrh_per_cell;
    out.sig.push_back(s.sig_series(0, n));
    out.intf.push_back(s.int_series(0, n));
  }
  return out;
}

WishartTrace wishart_trace_oracle(int m_cu, int n_rrh, int n_draws, std::uint64_t seed, int m_rx) {
  if (m_cu <= n_rrh) throw std::domain_error("wishart_trace_oracle: need m_cu > n_rrh");
  WishartTrace w;
  w.approximation = (m_cu - 1.0) * n_rrh / (m_cu - n_rrh);
  w.draws = n_draws;
  double acc = 0.0;
  for (int d = 0; d < n_draws; ++d) {
    Rng rng = substream(seed, stream::kWishart, static_cast<std::uint64_t>(d));
    MatrixXcd lam(m_cu, n_rrh);
    for (int n = 0; n < n_rrh; ++n) lam.col(n) = top_singular(sample_fading(m_cu, m_rx, rng)).u;
    MatrixXcd gram = lam.adjoint() * lam;
    Eigen::LLT<MatrixXcd> llt(gram);
    if (llt.info() != Eigen::Success) {
      --d;  // regenerate; probability zero for continuous draws
      continue;
    }
    acc += llt.solve(MatrixXcd::Identity(n_rrh, n_rrh)).trace().real();
  }
  w.empirical_trace = acc / n_draws;
  w.empirical_diag = w.empirical_trace / n_rrh;
  return w;
}

double sigma_max_mc(int m_rx, int m_cu, int n_draws, std::uint64_t seed) {
  double acc = 0.0;
  for (int d = 0; d < n_draws; ++d) {
    Rng rng = substream(seed, stream::kSigma, static_cast<std::uint64_t>(d));
    acc += top_singular(sample_fading(m_cu, m_rx, rng)).sigma;
  }
  return acc / n_draws;
}

// ---- Report ------------------------------------------------------------------------

namespace {

double rel_err(double closed, double emp) {
  if (emp == 0.0) return closed == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::fabs(closed - emp) / std::fabs(emp);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// Empirical CDF vs model on nodes placed at empirical quantiles.
double cdf_gap(std::vector<double> series, const std::function<double(double)>& model, int nodes, int cell, int rrh,
               std::vector<CdfCurvePoint>& curve) {
  std::sort(series.begin(), series.end());
  const double n = static_cast<double>(series.size());
  double gap = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double p = (i + 0.5) / nodes;
    const double x = series[static_cast<std::size_t>(std::min(n - 1.0, std::floor(p * n)))];
    const double emp = static_cast<double>(std::upper_bound(series.begin(), series.end(), x) - series.begin()) / n;
    const double below = static_cast<double>(std::lower_bound(series.begin(), series.end(), x) - series.begin()) / n;
    const double mdl = model(x);
    gap = std::max({gap, std::fabs(emp - mdl), std::fabs(below - mdl)});
    curve.push_back({cell, rrh, x, emp, mdl});
  }
  return gap;
}

}  // namespace

ValidationReport build_report(const FronthaulSamples& s, const NetworkLayout& layout, const SystemConfig& cfg,
                              std::uint64_t seed, const ReportOptions& opt) {
  ValidationReport r;
  r.scheme = s.scheme;
  r.draws = s.draws;
  r.seed = seed;
  r.zf_incell_leak_max = s.zf_incell_leak_max;
  const double sigma2 = noise_power_w(cfg.fronthaul_rbs, cfg);

  RelErrors sum_cf, sum_emp;
  std::vector<double> e_sm, e_sv, e_im, e_iv;
  std::vector<std::vector<RrhStats>> stats;
  for (int q = 0; q < s.q_cells; ++q) {
    stats.push_back(cell_fronthaul_stats(q, layout, cfg, s.scheme));
    for (int n = 0; n < s.rrh_per_cell; ++n) {
      const RrhStats& st = stats.back()[static_cast<std::size_t>(n)];
      MomentRow row{q, n, empirical_moments(s.sig_series(q, n)), empirical_moments(s.int_series(q, n)), st.sig, st.intf};
      sum_cf.sig_mean += row.sig_cf.mean;
      sum_cf.sig_var += row.sig_cf.var;
      sum_cf.int_mean += row.int_cf.mean;
      sum_cf.int_var += row.int_cf.var;
      sum_emp.sig_mean += row.sig_emp.mean;
      sum_emp.sig_var += row.sig_emp.var;
      sum_emp.int_mean += row.int_emp.mean;
      sum_emp.int_var += row.int_emp.var;
      e_sm.push_back(rel_err(row.sig_cf.mean, row.sig_emp.mean));
      e_sv.push_back(rel_err(row.sig_cf.var, row.sig_emp.var));
      e_im.push_back(rel_err(row.int_cf.mean, row.int_emp.mean));
      e_iv.push_back(rel_err(row.int_cf.var, row.int_emp.var));
      r.rows.push_back(row);
    }
  }
  r.pooled = {rel_err(sum_cf.sig_mean, sum_emp.sig_mean), rel_err(sum_cf.sig_var, sum_emp.sig_var),
              rel_err(sum_cf.int_mean, sum_emp.int_mean), rel_err(sum_cf.int_var, sum_emp.int_var)};
  if (s.scheme == Scheme::ZfMrc) {
    // The signal is deterministic per RRH; its variance is not modelled.
    r.pooled.sig_var = 0.0;
    std::fill(e_sv.begin(), e_sv.end(), 0.0);
  }
  auto mx = [](const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); };
  r.worst_rrh = {mx(e_sm), mx(e_sv), mx(e_im), mx(e_iv)};
  r.median_rrh = {median(e_sm), median(e_sv), median(e_im), median(e_iv)};

  if (!opt.with_cdf) return r;
  for (int q = 0; q < s.q_cells; ++q) {
    const auto& cs = stats[static_cast<std::size_t>(q)];
    if (is_multicast(s.scheme)) {
      std::vector<double> minrate(static_cast<std::size_t>(s.draws), std::numeric_limits<double>::infinity());
      for (int n = 0; n < s.rrh_per_cell; ++n) {
        const auto rs = s.rate_series(q, n, sigma2);
        for (int d = 0; d < s.draws; ++d)
          minrate[static_cast<std::size_t>(d)] = std::min(minrate[static_cast<std::size_t>(d)], rs[static_cast<std::size_t>(d)]);
      }
      auto model = [&](double x) {
        std::vector<double> f;
        for (const auto& st : cs) f.push_back(rate_cdf(x, st.sig_model, st.int_model, sigma2));
        return min_rate_cdf(f);
      };
      const double g = cdf_gap(minrate, model, opt.cdf_nodes, q, -1, r.curves);
      r.cdf_gaps.push_back({q, -1, g});
    } else {
      for (int n = 0; n < s.rrh_per_cell; ++n) {
        const auto& st = cs[static_cast<std::size_t>(n)];
        auto model = [&](double x) { return rate_cdf(x, st.sig_model, st.int_model, sigma2); };
        const double g = cdf_gap(s.rate_series(q, n, sigma2), model, opt.cdf_nodes, q, n, r.curves);
        r.cdf_gaps.push_back({q, n, g});
      }
    }
  }
  for (const auto& g : r.cdf_gaps) r.cdf_gap_max = std::max(r.cdf_gap_max, g.gap);
  return r;
}

nlohmann::json report_to_json(const ValidationReport& r) {
  using nlohmann::json;
  auto errs = [](const RelErrors& e) {
    return json{{"sig_mean", e.sig_mean}, {"sig_var", e.sig_var}, {"int_mean", e.int_mean}, {"int_var", e.int_var}};
  };
  json j;
  j["scheme"] = scheme_name(r.scheme);
  j["draws"] = r.draws;
  j["seed"] = r.seed;
  j["relative_error"] = {{"pooled", errs(r.pooled)}, {"worst_rrh", errs(r.worst_rrh)}, {"median_rrh", errs(r.median_rrh)}};
  j["cdf_gap_max"] = r.cdf_gap_max;
  json gaps = json::array();
  for (const auto& g : r.cdf_gaps) gaps.push_back({{"cell", g.cell}, {"rrh", g.rrh}, {"gap", g.gap}});
  j["cdf_gaps"] = gaps;
  j["zf_incell_leak_max"] = r.zf_incell_leak_max;
  return j;
}

void write_moments_csv(std::ostream& os, const std::vector<ValidationReport>& reports) {
  os << "scheme,cell,rrh,sig_mean_emp_w,sig_var_emp_w2,int_mean_emp_w,int_var_emp_w2,"
        "sig_mean_cf_w,sig_var_cf_w2,int_mean_cf_w,int_var_cf_w2\n";
  os << std::setprecision(12);
  for (const auto& r : reports)
    for (const auto& m : r.rows)
      os << scheme_name(r.scheme) << ',' << m.cell << ',' << m.rrh << ',' << m.sig_emp.mean << ',' << m.sig_emp.var << ','
         << m.int_emp.mean << ',' << m.int_emp.var << ',' << m.sig_cf.mean << ',' << m.sig_cf.var << ','
         << m.int_cf.mean << ',' << m.int_cf.var << '\n';
}

void write_cdf_csv(std::ostream& os, const std::vector<ValidationReport>& reports) {
  os << "scheme,cell,rrh,rate_nats,cdf_empirical,cdf_model\n";
  os << std::setprecision(12);
  for (const auto& r : reports)
    for (const auto& c : r.curves)
      os << scheme_name(r.scheme) << ',' << c.cell << ',' << c.rrh << ',' << c.rate_nats << ',' << c.empirical << ','
         << c.model << '\n';
}

void write_samples_csv(std::ostream& os, const FronthaulSamples& s, const SystemConfig& cfg, int max_draws) {
  const double sigma2 = noise_power_w(cfg.fronthaul_rbs, cfg);
  os << "scheme,cell,rrh,draw,S_w,I_w,rate_nats\n";
  os << std::setprecision(12);
  const int dn = std::min(max_draws, s.draws);
  for (int q = 0; q < s.q_cells; ++q)
    for (int n = 0; n < s.rrh_per_cell; ++n)
      for (int d = 0; d < dn; ++d) {
        const std::size_t i = s.index(d, q, n);
        os << scheme_name(s.scheme) << ',' << q << ',' << n << ',' << d << ',' << s.sig[i] << ',' << s.intf[i] << ','
           << std::log1p(s.sig[i] / (s.intf[i] + sigma2)) << '\n';
      }
}

void write_ks_csv(std::ostream& os, const std::string& label, const KsSelection& sel) {
  for (std::size_t i = 0; i < sel.families.size(); ++i)
    os << label << ',' << family_name(sel.families[i]) << ',' << sel.trials << ',' << sel.rejections[i] << ','
       << sel.retained[i] << ',' << std::setprecision(6) << sel.mean_statistic[i] << ','
       << (sel.families[i] == sel.winner ? 1 : 0) << '\n';
}

}  // namespace dmimo
