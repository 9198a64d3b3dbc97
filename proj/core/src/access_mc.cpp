#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "dmimo/access.hpp"
#include "dmimo/errors.hpp"
#include "dmimo/rng.hpp"

namespace dmimo {

namespace {

using Eigen::MatrixXcd;

// Fills H (NM x K) for users in cell src; column k stacks the M-antenna channels of every RRH.
void fill_channels(MatrixXcd& h, const std::vector<Point>& users, const std::vector<Point>& rrhs,
                   const NetworkLayout& layout, const SystemConfig& cfg, Rng& rng, ComplexNormal& cn) {
  const int m = cfg.rrh_antennas;
  for (std::size_t k = 0; k < users.size(); ++k) {
    for (std::size_t n = 0; n < rrhs.size(); ++n) {
      const double amp = std::sqrt(path_loss(toroidal_distance(rrhs[n], users[k], layout.extent_m), cfg));
      for (int a = 0; a < m; ++a) h(static_cast<Eigen::Index>(n) * m + a, static_cast<Eigen::Index>(k)) = amp * cn(rng);
    }
  }
}

}  // namespace

AccessMcResult mc_access_se(Point user, int q, const NetworkLayout& layout, const TrafficModel& model,
                            const SystemConfig& cfg, int n_draws, std::uint64_t seed) {
  if (n_draws < 1) throw std::domain_error("mc_access_se: n_draws must be positive");
  if (cfg.rrh_per_cell * cfg.rrh_antennas <= cfg.users_per_cell)
    throw ConfigError("mc_access_se: rrh_per_cell * rrh_antennas must exceed users_per_cell");
  const int qn = layout.q_cells, nn = layout.rrh_per_cell, m = cfg.rrh_antennas, kk = cfg.users_per_cell;
  const Eigen::Index rows = static_cast<Eigen::Index>(nn) * m;

  // a_sum[c]: sum of ||v_k||^2 (user of interest in the serving cell, all users elsewhere).
  std::vector<double> a_sum(static_cast<std::size_t>(qn), 0.0);
  // b_sum[c][n]: sum over users of the squared norm of RRH n's share of the precoder.
  std::vector<std::vector<double>> b_sum(static_cast<std::size_t>(qn), std::vector<double>(static_cast<std::size_t>(nn), 0.0));

  AccessMcResult res;
  ComplexNormal cn;
  MatrixXcd h(rows, kk);
  std::vector<Point> users(static_cast<std::size_t>(kk));
  std::vector<std::vector<Point>> rrhs;
  for (int c = 0; c < qn; ++c) rrhs.push_back(layout.cell_rrhs(c));

  for (int d = 0; d < n_draws; ++d) {
    Rng rng = substream(seed, stream::kAccess, static_cast<std::uint64_t>(d));
    for (int c = 0; c < qn; ++c) {
      for (int attempt = 0;; ++attempt) {
        if (attempt > 100) throw NumericalError("mc_access_se: repeated rank-deficient channel draws");
        for (int k = 0; k < kk; ++k)
          users[static_cast<std::size_t>(k)] = (c == q && k == 0) ? user : model.sample_user(c, rng);
        fill_channels(h, users, rrhs[static_cast<std::size_t>(c)], layout, cfg, rng, cn);
        MatrixXcd gram = h.adjoint() * h;
        Eigen::LLT<MatrixXcd> llt(gram);
        if (llt.info() != Eigen::Success) {
          ++res.regenerated;
          continue;
        }
        MatrixXcd ginv = llt.solve(MatrixXcd::Identity(kk, kk));
        MatrixXcd w = h * ginv;  // unnormalised ZF precoder
        if (d == 0) {
          MatrixXcd prod = h.adjoint() * w;
          double off = 0.0, diag = 0.0;
          for (int i = 0; i < kk; ++i)
            for (int j = 0; j < kk; ++j) {
              const double v = std::abs(prod(i, j));
              if (i == j) diag = std::max(diag, v);
              else off = std::max(off, v);
            }
          res.zf_offdiag_max = std::max(res.zf_offdiag_max, off / diag);
        }
        if (c == q) {
          a_sum[static_cast<std::size_t>(c)] += ginv(0, 0).real();
        } else {
          double tr = 0.0;
          for (int k = 0; k < kk; ++k) tr += ginv(k, k).real();
          a_sum[static_cast<std::size_t>(c)] += tr / kk;
          for (int n = 0; n < nn; ++n)
            b_sum[static_cast<std::size_t>(c)][static_cast<std::size_t>(n)] +=
                w.block(static_cast<Eigen::Index>(n) * m, 0, m, kk).squaredNorm();
        }
        break;
      }
    }
  }

  const double p = cfg.access_power_w;
  res.draws = n_draws;
  res.noise_w = noise_power_w(cfg.access_rbs, cfg);
  res.signal_w = p / (kk * a_sum[static_cast<std::size_t>(q)] / n_draws);
  for (int c = 0; c < qn; ++c) {
    if (c == q) continue;
    const double mu2 = p / (kk * a_sum[static_cast<std::size_t>(c)] / n_draws);
    for (int n = 0; n < nn; ++n) {
      const double l = path_loss(toroidal_distance(layout.rrh_at(c, n), user, layout.extent_m), cfg);
      res.interference_w += l * mu2 * b_sum[static_cast<std::size_t>(c)][static_cast<std::size_t>(n)] / n_draws;
    }
  }
  res.se = std::log1p(res.signal_w / (res.interference_w + res.noise_w));
  return res;
}

}  // namespace dmimo
