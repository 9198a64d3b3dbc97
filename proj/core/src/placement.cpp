#include "dmimo/placement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/random/uniform_real_distribution.hpp>

#include "dmimo/errors.hpp"

namespace dmimo {

ConstraintSpec constraint_from_config(const SystemConfig& cfg, Scheme scheme) { return {scheme, cfg.epsilon}; }

double rate_threshold(double expected_se, const SystemConfig& cfg) {
  return cfg.users_per_cell * static_cast<double>(cfg.access_rbs) / cfg.fronthaul_rbs * expected_se;
}

CellOutage cell_outage(const std::vector<RrhStats>& stats, const SystemConfig& cfg, const ConstraintSpec& spec,
                       double expected_se) {
  CellOutage out;
  out.threshold = rate_threshold(expected_se, cfg);
  const double sigma2 = noise_power_w(cfg.fronthaul_rbs, cfg);
  out.per_rrh.reserve(stats.size());
  for (const auto& r : stats) out.per_rrh.push_back(rate_cdf(out.threshold, r.sig_model, r.int_model, sigma2));
  if (is_multicast(spec.scheme)) {
    out.outage = min_rate_cdf(out.per_rrh);
  } else {
    out.outage = out.per_rrh.empty() ? 0.0 : *std::max_element(out.per_rrh.begin(), out.per_rrh.end());
  }
  out.ok = out.outage <= spec.epsilon;
  return out;
}

CellOutage cell_outage(int q, const NetworkLayout& layout, const SystemConfig& cfg, const ConstraintSpec& spec,
                       double expected_se) {
  return cell_outage(cell_fronthaul_stats(q, layout, cfg, spec.scheme), cfg, spec, expected_se);
}

bool fronthaul_constraint_ok(int q, const NetworkLayout& layout, const SystemConfig& cfg, const ConstraintSpec& spec,
                             double expected_se) {
  return cell_outage(q, layout, cfg, spec, expected_se).ok;
}

NetworkLayout initial_layout(const SystemConfig& cfg, Rng& rng, double radius_m) {
  NetworkLayout l = make_grid_layout(cfg);
  boost::random::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int q = 0; q < l.q_cells; ++q) {
    const Point c = l.cu[static_cast<std::size_t>(q)];
    for (int n = 0; n < l.rrh_per_cell; ++n) {
      const double r = radius_m * std::sqrt(u01(rng));
      const double a = 2.0 * std::numbers::pi * u01(rng);
      l.rrh_at(q, n) = {c.x + r * std::cos(a), c.y + r * std::sin(a)};
    }
  }
  l.validate();
  return l;
}

std::string status_name(PlacementStatus s) {
  switch (s) {
    case PlacementStatus::Converged: return "converged";
    case PlacementStatus::MaxSweeps: return "max_sweeps";
    case PlacementStatus::Infeasible: return "infeasible";
  }
  return "?";
}

namespace {

const char* kRemedy = "reduce the number of served users K or allocate more fronthaul bandwidth";

SweepRecord make_record(int sweep, double d_max, const std::vector<double>& se, int shrinks) {
  SweepRecord r{sweep, d_max, se, 0.0, shrinks};
  for (double v : se) r.mean_se += v;
  r.mean_se /= static_cast<double>(se.size());
  return r;
}

}  // namespace

Scenario make_scenario(const SystemConfig& cfg, std::uint64_t seed) {
  Rng lr = substream(seed, stream::kLayout);
  Rng tr = substream(seed, stream::kTraffic);
  Scenario sc;
  sc.initial = initial_layout(cfg, lr);
  sc.traffic = sample_traffic(sc.initial, cfg, tr);
  return sc;
}

PlacementState optimize(const NetworkLayout& layout0, const TrafficModel& model, const SystemConfig& cfg,
                        const ConstraintSpec& spec, const OptimizeOptions& opt) {
  layout0.validate();
  const int qn = layout0.q_cells;
  AccessEvaluator eval(cfg, model, layout0);
  PlacementState st;
  st.layout = layout0;

  std::vector<double> se(static_cast<std::size_t>(qn));
  std::vector<std::vector<RrhStats>> fh(static_cast<std::size_t>(qn));
  for (int q = 0; q < qn; ++q) {
    se[static_cast<std::size_t>(q)] = eval.expected_se(q);
    fh[static_cast<std::size_t>(q)] = cell_fronthaul_stats(q, layout0, cfg, spec.scheme);
  }
  for (int q = 0; q < qn; ++q) {
    const auto o = cell_outage(fh[static_cast<std::size_t>(q)], cfg, spec, se[static_cast<std::size_t>(q)]);
    if (!o.ok) {
      st.status = PlacementStatus::Infeasible;
      st.message = "initial layout violates the fronthaul outage constraint in cell " + std::to_string(q) +
                   " (outage " + std::to_string(o.outage) + " > " + std::to_string(spec.epsilon) + "); " + kRemedy;
      st.final_se = se;
      st.history.push_back(make_record(0, 0.0, se, 0));
      return st;
    }
  }
  st.history.push_back(make_record(0, 0.0, se, 0));
  st.status = PlacementStatus::MaxSweeps;
  double nu_carry = cfg.step_init;

  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    double d_max = 0.0;
    int shrinks = 0;
    for (int q = 0; q < qn; ++q) {
      const auto x = eval.layout().cell_rrhs(q);
      const auto grad = eval.gradient(q);
      double gmax = 0.0;
      for (const Point& g : grad) gmax = std::max({gmax, std::fabs(g.x), std::fabs(g.y)});

      double nu = opt.reset_step ? cfg.step_init : nu_carry;
      double d_q = 0.0;
      while (true) {
        if (nu * gmax < opt.min_move_m) {
          ++st.step_underflows;
          break;
        }
        std::vector<Point> cand(x.size());
        bool ok = true;
        for (std::size_t n = 0; n < x.size() && ok; ++n) {
          cand[n] = x[n] + nu * grad[n];
          ok = eval.layout().inside_cell(q, cand[n]);
        }
        double cand_se = 0.0;
        if (ok) {
          cand_se = eval.expected_se_candidate(q, cand);
          if (opt.require_ascent && cand_se < se[static_cast<std::size_t>(q)]) ok = false;
        }
        std::vector<RrhStats> cand_fh;
        if (ok) {
          NetworkLayout tmp = eval.layout();
          tmp.set_cell_rrhs(q, cand);
          cand_fh = cell_fronthaul_stats(q, tmp, cfg, spec.scheme);
          ok = cell_outage(cand_fh, cfg, spec, cand_se).ok;
        }
        std::vector<double> new_se;
        if (ok) {
          new_se = eval.expected_se_all_if_moved(q, cand);
          if (opt.guard_other_cells) {
            for (int t = 0; t < qn && ok; ++t) {
              const auto ts = static_cast<std::size_t>(t);
              // A lower objective lowers the required rate, so only increases need checking.
              if (t == q || new_se[ts] <= se[ts]) continue;
              ok = cell_outage(fh[ts], cfg, spec, new_se[ts]).ok;
            }
          }
        }
        if (ok) {
          eval.move_cell(q, cand);
          fh[static_cast<std::size_t>(q)] = std::move(cand_fh);
          se = std::move(new_se);
          for (std::size_t n = 0; n < x.size(); ++n)
            d_q = std::max({d_q, std::fabs(cand[n].x - x[n].x), std::fabs(cand[n].y - x[n].y)});
          st.step = nu;
          break;
        }
        nu *= cfg.step_shrink;
        ++shrinks;
      }
      nu_carry = nu;
      d_max = std::max(d_max, d_q);
    }
    st.iteration = sweep;
    st.d_max = d_max;
    st.history.push_back(make_record(sweep, d_max, se, shrinks));
    if (d_max <= cfg.d_cvg_m) {
      st.status = PlacementStatus::Converged;
      break;
    }
  }
  st.layout = eval.layout();
  st.final_se = se;
  if (st.status == PlacementStatus::MaxSweeps)
    st.message = "stopped after " + std::to_string(opt.max_sweeps) + " sweeps with d_max " + std::to_string(st.d_max) + " m";
  return st;
}

std::vector<Point> ring(Point centre, double radius, int n) {
  std::vector<Point> pts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    pts[static_cast<std::size_t>(i)] = {centre.x + radius * std::cos(a), centre.y + radius * std::sin(a)};
  }
  return pts;
}

BaselineResult circular_baseline(int q, const NetworkLayout& layout, const TrafficModel& model,
                                 const SystemConfig& cfg, const ConstraintSpec& spec) {
  BaselineResult res;
  res.layout = layout;
  const Point c = layout.cu[static_cast<std::size_t>(q)];
  const double cap = (2.0 / 3.0) * (0.5 * layout.cell_side_m);
  auto feasible = [&](double r) {
    NetworkLayout tmp = layout;
    tmp.set_cell_rrhs(q, ring(c, r, layout.rrh_per_cell));
    return fronthaul_constraint_ok(q, tmp, cfg, spec, expected_access_se(q, tmp, model, cfg));
  };
  double r = 0.0;
  if (!feasible(0.0)) {
    res.feasible = false;
    res.message = "cell " + std::to_string(q) + " is infeasible even with every RRH at the CU; " + kRemedy;
  } else if (feasible(cap)) {
    r = cap;
  } else {
    double lo = 0.0, hi = cap;
    while (hi - lo > 1.0) {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? lo : hi) = mid;
    }
    r = lo;
  }
  res.layout.set_cell_rrhs(q, ring(c, r, layout.rrh_per_cell));
  res.radius_m.assign(static_cast<std::size_t>(layout.q_cells), 0.0);
  res.radius_m[static_cast<std::size_t>(q)] = r;
  return res;
}

BaselineResult circular_baseline(const NetworkLayout& layout, const TrafficModel& model, const SystemConfig& cfg,
                                 const ConstraintSpec& spec) {
  BaselineResult res;
  res.layout = layout;
  res.radius_m.assign(static_cast<std::size_t>(layout.q_cells), 0.0);
  for (int q = 0; q < layout.q_cells; ++q) {
    BaselineResult one = circular_baseline(q, res.layout, model, cfg, spec);
    res.layout = one.layout;
    res.radius_m[static_cast<std::size_t>(q)] = one.radius_m[static_cast<std::size_t>(q)];
    if (!one.feasible) {
      res.feasible = false;
      res.message = one.message;
    }
  }
  // Later cells change the interference seen by earlier ones; shrink any cell that
  // lost feasibility until the whole network is feasible.
  AccessEvaluator eval(cfg, model, res.layout);
  bool all_ok = false;
  for (int pass = 0; pass < 1000 && res.feasible && !all_ok; ++pass) {
    all_ok = true;
    for (int q = 0; q < layout.q_cells; ++q) {
      const double se = eval.expected_se(q);
      if (fronthaul_constraint_ok(q, res.layout, cfg, spec, se)) continue;
      all_ok = false;
      auto& r = res.radius_m[static_cast<std::size_t>(q)];
      r = std::max(0.0, r - 1.0);
      auto pts = ring(res.layout.cu[static_cast<std::size_t>(q)], r, layout.rrh_per_cell);
      res.layout.set_cell_rrhs(q, pts);
      eval.move_cell(q, pts);
    }
  }
  if (res.feasible && !all_ok) {
    res.feasible = false;
    res.message = "circular baseline could not be made feasible in every cell";
  }
  res.cell_se.resize(static_cast<std::size_t>(layout.q_cells));
  for (int q = 0; q < layout.q_cells; ++q) res.cell_se[static_cast<std::size_t>(q)] = eval.expected_se(q);
  for (double v : res.cell_se) res.mean_se += v;
  res.mean_se /= layout.q_cells;
  return res;
}

}  // namespace dmimo
