#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/rayleigh.hpp>
#include <boost/math/distributions/weibull.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "dmimo/mcvalidate.hpp"

namespace dmimo {

std::string family_name(Family f) {
  switch (f) {
    case Family::Gamma: return "gamma";
    case Family::Exponential: return "exponential";
    case Family::Lognormal: return "lognormal";
    case Family::Normal: return "normal";
    case Family::Weibull: return "weibull";
    case Family::Rayleigh: return "rayleigh";
  }
  return "?";
}

const std::vector<Family>& all_families() {
  static const std::vector<Family> f{Family::Gamma,  Family::Exponential, Family::Lognormal,
                                     Family::Normal, Family::Weibull,     Family::Rayleigh};
  return f;
}

namespace {

// Weibull shape k with Gamma(1+2/k)/Gamma(1+1/k)^2 = 1 + cv^2.
double weibull_shape(double cv2) {
  auto ratio = [](double k) {
    const double g1 = std::lgamma(1.0 + 1.0 / k), g2 = std::lgamma(1.0 + 2.0 / k);
    return std::exp(g2 - 2.0 * g1);
  };
  double lo = std::log(0.02), hi = std::log(500.0);
  const double target = 1.0 + cv2;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (ratio(std::exp(mid)) > target) lo = mid;  // ratio decreases in k
    else hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

template <class Cdf>
double ks_statistic(const std::vector<double>& sorted, Cdf&& cdf) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

}  // namespace

KsResult ks_test(const std::vector<double>& samples, Family family) {
  if (samples.size() < 2) throw std::domain_error("ks_test: need at least two samples");
  KsResult r;
  r.family = family;
  std::vector<double> x = samples;
  std::sort(x.begin(), x.end());
  const Moments m = empirical_moments(x);
  const double crit = 1.358 / std::sqrt(static_cast<double>(x.size()));
  const bool positive_family = family != Family::Normal;
  if (positive_family && (x.front() < 0.0 || !(m.mean > 0.0))) {
    r.support_ok = false;
    return r;
  }
  if (family == Family::Lognormal && x.front() <= 0.0) {
    r.support_ok = false;
    return r;
  }
  if (!(m.var > 0.0)) return r;  // degenerate sample: no continuous fit

  using namespace boost::math;
  switch (family) {
    case Family::Gamma: {
      gamma_distribution<double> d(m.mean * m.mean / m.var, m.var / m.mean);
      r.statistic = ks_statistic(x, [&](double v) { return cdf(d, v); });
      break;
    }
    case Family::Exponential: {
      exponential_distribution<double> d(1.0 / m.mean);
      r.statistic = ks_statistic(x, [&](double v) { return cdf(d, v); });
      break;
    }
    case Family::Lognormal: {
      const double s2 = std::log1p(m.var / (m.mean * m.mean));
      lognormal_distribution<double> d(std::log(m.mean) - 0.5 * s2, std::sqrt(s2));
      r.statistic = ks_statistic(x, [&](double v) { return cdf(d, v); });
      break;
    }
    case Family::Normal: {
      normal_distribution<double> d(m.mean, std::sqrt(m.var));
      r.statistic = ks_statistic(x, [&](double v) { return cdf(d, v); });
      break;
    }
    case Family::Weibull: {
      const double k = weibull_shape(m.var / (m.mean * m.mean));
      weibull_distribution<double> d(k, m.mean / std::tgamma(1.0 + 1.0 / k));
      r.statistic = ks_statistic(x, [&](double v) { return cdf(d, v); });
      break;
    }
    case Family::Rayleigh: {
      rayleigh_distribution<double> d(m.mean / std::sqrt(0.5 * std::numbers::pi));
      r.statistic = ks_statistic(x, [&](double v) { return cdf(d, v); });
      break;
    }
  }
  r.rejected = r.statistic > crit;
  return r;
}

KsSelection ks_select(const std::vector<std::vector<double>>& sample_sets, const std::vector<Family>& families) {
  if (families.empty()) throw std::invalid_argument("ks_select: no candidate families");
  KsSelection s;
  s.families = families;
  s.rejections.assign(families.size(), 0);
  s.retained.assign(families.size(), 0);
  s.mean_statistic.assign(families.size(), 0.0);
  for (const auto& set : sample_sets) {
    if (set.size() < 100) throw std::domain_error("ks_select: each sample set needs at least 100 samples");
    for (std::size_t i = 0; i < families.size(); ++i) {
      const KsResult r = ks_test(set, families[i]);
      (r.rejected ? s.rejections[i] : s.retained[i]) += 1;
      s.mean_statistic[i] += r.statistic;
    }
    ++s.trials;
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < families.size(); ++i) {
    if (s.trials > 0) s.mean_statistic[i] /= s.trials;
    if (s.rejections[i] < s.rejections[best]) best = i;
  }
  s.winner = families[best];
  return s;
}

}  // namespace dmimo
