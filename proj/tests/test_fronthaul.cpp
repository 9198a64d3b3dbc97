#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/random/gamma_distribution.hpp>
#include <gtest/gtest.h>

#include "dmimo/errors.hpp"
#include "dmimo/fronthaul.hpp"
#include "dmimo/mcvalidate.hpp"
#include "dmimo/rng.hpp"

using namespace dmimo;

namespace {

double draw_gamma(const GammaParams& g, Rng& rng) {
  boost::random::gamma_distribution<double> d(g.shape, g.scale);
  return d(rng);
}

}  // namespace

TEST(SigmaMax, Approximation) {
  EXPECT_DOUBLE_EQ(sigma_max_mean(8, 64), 10.0);
  EXPECT_DOUBLE_EQ(sigma_max_mean(2, 2), 1.0 + std::sqrt(2.0));
  for (int m : {1, 2, 4, 8})
    for (int mc : {2, 16, 64}) EXPECT_LT(sigma_max_mean(m, mc), std::sqrt(m) + std::sqrt(mc));
}

TEST(SigmaMax, AgainstMonteCarloAtOperatingPoint) {
  EXPECT_NEAR(sigma_max_mean(8, 64) / sigma_max_mc(8, 64, 10000, 21), 1.0, 0.05);
  EXPECT_NEAR(sigma_max_mean(8, 16) / sigma_max_mc(8, 16, 10000, 22), 1.0, 0.05);
}

TEST(SigmaMax, SingleReceiveAntennaLargeArray) {
  // For M = 1 the largest singular value is ||g||; the sqrt(1/2) offset fades as Mc grows.
  EXPECT_NEAR(sigma_max_mean(1, 1024) / sigma_max_mc(1, 1024, 10000, 23), 1.0, 0.05);
}

TEST(SigmaMax, SmallMatrixBelowUpperBound) {
  const double mc = sigma_max_mc(2, 2, 10000, 24);
  EXPECT_LT(mc, std::sqrt(2.0) + std::sqrt(2.0));
  EXPECT_GT(mc, 1.0);
}

TEST(MulticastMu, SingleRrh) {
  SystemConfig c;
  const double l = 3e-9;
  const double mu1 = multicast_mu({l}, c, Scheme::Multicast1Rx);
  EXPECT_NEAR(mu1 * mu1 / (l / c.cu_antennas), 1.0, 1e-12);
  const double es = sigma_max_mean(c.rrh_antennas, c.cu_antennas);
  const double mu2 = multicast_mu({l}, c, Scheme::MulticastMrc);
  EXPECT_NEAR(mu2 * mu2 / (l / (es * es)), 1.0, 1e-12);
}

TEST(MulticastMu, DecreasesWhenAnRrhMovesAway) {
  SystemConfig c;
  for (Scheme s : {Scheme::Multicast1Rx, Scheme::MulticastMrc})
    EXPECT_GT(multicast_mu({1e-8, 2e-9, 5e-10}, c, s), multicast_mu({1e-8, 2e-9, 1e-10}, c, s));
}

TEST(MulticastSignal, SingleRrhReductions) {
  SystemConfig c;
  const double l = 4e-10, pc = c.cu_power_w, mc = c.cu_antennas;
  const Moments a = multicast_signal_moments({l}, 0, c, Scheme::Multicast1Rx);
  EXPECT_NEAR(a.mean / (pc * l * mc), 1.0, 1e-12);
  EXPECT_NEAR(a.var / (4.0 * pc * pc * l * l * mc), 1.0, 1e-12);
  const double es = sigma_max_mean(c.rrh_antennas, c.cu_antennas);
  const Moments b = multicast_signal_moments({l}, 0, c, Scheme::MulticastMrc);
  EXPECT_NEAR(b.mean / (pc * l * es * es), 1.0, 1e-12);
  EXPECT_EQ(b.var, 0.0);
}

TEST(MulticastSignal, SingleRrhAgainstExactChiSquare) {
  // N = 1, 1RX: S = pc (l/Mc) ||g||^4 with ||g||^2 ~ Gamma(Mc, 1), so
  // E S = pc l (Mc+1) and var S = pc^2 l^2 (Mc+1)(4Mc+6)/Mc; the closed form drops O(1/Mc).
  SystemConfig c;
  const double l = 1e-9, pc = c.cu_power_w;
  for (int mc : {16, 64, 256}) {
    c.cu_antennas = mc;
    const Moments m = multicast_signal_moments({l}, 0, c, Scheme::Multicast1Rx);
    const double mean = pc * l * (mc + 1.0);
    const double var = pc * pc * l * l * (mc + 1.0) * (4.0 * mc + 6.0) / mc;
    EXPECT_NEAR(m.mean / mean, 1.0, 1.5 / mc);
    EXPECT_NEAR(m.var / var, 1.0, 4.0 / mc);
  }
}

TEST(MulticastSignal, PositiveForSeveralRrhs) {
  SystemConfig c;
  const std::vector<double> pl = {1e-8, 3e-9, 7e-10, 2e-10};
  for (Scheme s : {Scheme::Multicast1Rx, Scheme::MulticastMrc})
    for (int n = 0; n < 4; ++n) {
      const Moments m = multicast_signal_moments(pl, n, c, s);
      EXPECT_GT(m.mean, 0.0);
      EXPECT_GT(m.var, 0.0);
    }
}

TEST(Interference, DirectEvaluation) {
  const Moments m = multicast_interference_moments({0.01}, 1.0);
  EXPECT_NEAR(m.mean, 0.01, 1e-15);
  EXPECT_NEAR(m.var, 1e-4, 1e-18);
  const Moments z = zf_interference_moments({0.01}, 1.0, 10);
  EXPECT_NEAR(z.mean, 0.01, 1e-15);
  EXPECT_NEAR(z.var, 1e-5, 1e-18);
  const Moments z1 = zf_interference_moments({0.01, 0.002}, 2.0, 1);
  const Moments m1 = multicast_interference_moments({0.01, 0.002}, 2.0);
  EXPECT_DOUBLE_EQ(z1.var, m1.var);
}

TEST(Interference, EmptyForSingleCell) {
  SystemConfig c;
  c.q_cells = 1;
  NetworkLayout l = make_grid_layout(c);
  l.rrh_at(0, 3) = {700.0, 200.0};
  for (Scheme s : {Scheme::Multicast1Rx, Scheme::MulticastMrc, Scheme::ZfMrc}) {
    for (const RrhStats& r : cell_fronthaul_stats(0, l, c, s)) {
      EXPECT_EQ(r.intf.mean, 0.0);
      EXPECT_EQ(r.intf.var, 0.0);
      EXPECT_TRUE(std::holds_alternative<ConstantPower>(r.int_model));
    }
  }
}

TEST(Interference, ModeInvarianceAndZfRatio) {
  SystemConfig c;
  Rng rng = substream(3, stream::kLayout);
  const NetworkLayout l = random_layout(c, rng);
  for (int q : {0, 4, 8})
    for (int n = 0; n < c.rrh_per_cell; ++n) {
      const auto a = cell_fronthaul_stats(q, l, c, Scheme::Multicast1Rx)[static_cast<std::size_t>(n)].intf;
      const auto b = cell_fronthaul_stats(q, l, c, Scheme::MulticastMrc)[static_cast<std::size_t>(n)].intf;
      const auto z = cell_fronthaul_stats(q, l, c, Scheme::ZfMrc)[static_cast<std::size_t>(n)].intf;
      EXPECT_DOUBLE_EQ(a.mean, b.mean);
      EXPECT_DOUBLE_EQ(a.var, b.var);
      EXPECT_DOUBLE_EQ(z.mean, a.mean);
      EXPECT_NEAR(z.var * c.rrh_per_cell / a.var, 1.0, 1e-12);
      EXPECT_GT(a.mean, 0.0);
    }
}

TEST(ZfSignal, Reductions) {
  SystemConfig c;
  const double l = 2e-9, es = sigma_max_mean(c.rrh_antennas, c.cu_antennas);
  c.rrh_per_cell = 1;
  EXPECT_NEAR(zf_signal_power(l, c) / (c.cu_power_w * l * es * es), 1.0, 1e-12);
  c.rrh_per_cell = 10;
  EXPECT_NEAR(zf_signal_power(l, c) / (c.cu_power_w / 10.0 * l * es * es * 54.0 / 63.0), 1.0, 1e-12);
}

TEST(ZfSignal, DeterministicInStats) {
  SystemConfig c;
  Rng rng = substream(4, stream::kLayout);
  const NetworkLayout l = random_layout(c, rng);
  for (const RrhStats& r : cell_fronthaul_stats(2, l, c, Scheme::ZfMrc)) {
    EXPECT_EQ(r.sig.var, 0.0);
    EXPECT_TRUE(std::holds_alternative<ConstantPower>(r.sig_model));
    EXPECT_TRUE(std::holds_alternative<GammaParams>(r.int_model));
  }
}

TEST(GammaFit, Examples) {
  const GammaParams g = gamma_fit(2.0, 4.0);
  EXPECT_DOUBLE_EQ(g.shape, 1.0);
  EXPECT_DOUBLE_EQ(g.scale, 2.0);
  EXPECT_THROW(gamma_fit(0.0, 1.0), std::domain_error);
  EXPECT_THROW(gamma_fit(1.0, 0.0), std::domain_error);
  EXPECT_THROW(gamma_fit(-1.0, 1.0), std::domain_error);
}

TEST(GammaFit, RoundTripOnRandomParameters) {
  Rng rng = substream(5, stream::kTest);
  std::uniform_real_distribution<double> lk(-3.0, 3.0), lt(-12.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double k = std::pow(10.0, lk(rng)), th = std::pow(10.0, lt(rng));
    const GammaParams g = gamma_fit(k * th, k * th * th);
    EXPECT_NEAR(g.mean() / (k * th), 1.0, 1e-13);
    EXPECT_NEAR(g.var() / (k * th * th), 1.0, 1e-13);
    EXPECT_NEAR(g.shape / k, 1.0, 1e-13);
  }
}

TEST(RateCdf, Limits) {
  const GammaParams s{3.0, 1e-9}, i{5.0, 1e-11};
  EXPECT_EQ(rate_cdf(0.0, s, i, 1e-13), 0.0);
  EXPECT_NEAR(rate_cdf(50.0, s, i, 1e-13), 1.0, 1e-9);
  EXPECT_THROW(rate_cdf(-0.1, s, i, 1e-13), std::domain_error);
  // Constant signal: the required SINR exceeds the interference-free value.
  EXPECT_EQ(rate_cdf(std::log1p(1e-9 / 1e-13) + 0.01, ConstantPower{1e-9}, i, 1e-13), 1.0);
}

TEST(RateCdf, MonotoneAndInRange) {
  const std::vector<std::pair<PowerModel, PowerModel>> cases = {
      {GammaParams{3.0, 1e-9}, GammaParams{5.0, 1e-11}},
      {GammaParams{0.6, 2e-9}, GammaParams{40.0, 1e-12}},
      {ConstantPower{2e-9}, GammaParams{2.0, 4e-11}},
      {GammaParams{8.0, 1e-10}, ConstantPower{0.0}},
  };
  for (const auto& [s, i] : cases) {
    double prev = 0.0;
    for (double x = 0.0; x <= 15.0; x += 0.05) {
      const double f = rate_cdf(x, s, i, 1e-13);
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 1.0);
      EXPECT_GE(f, prev - 1e-6);
      prev = f;
    }
  }
}

TEST(RateCdf, AgainstSampledGammaPowers) {
  const double sigma2 = 1e-12;
  const std::vector<std::pair<GammaParams, GammaParams>> cases = {
      {{3.0, 1e-9}, {5.0, 1e-11}}, {{0.7, 3e-10}, {12.0, 4e-12}}, {{20.0, 5e-11}, {1.5, 2e-11}}};
  Rng rng = substream(6, stream::kTest);
  for (const auto& [gs, gi] : cases) {
    const int n = 200000;
    std::vector<double> r(n);
    for (int k = 0; k < n; ++k) r[static_cast<std::size_t>(k)] = std::log1p(draw_gamma(gs, rng) / (draw_gamma(gi, rng) + sigma2));
    std::sort(r.begin(), r.end());
    for (double p : {0.02, 0.1, 0.3, 0.5, 0.7, 0.9, 0.98}) {
      const double x = r[static_cast<std::size_t>(p * n)];
      EXPECT_NEAR(rate_cdf(x, gs, gi, sigma2), p, 0.005) << "shape " << gs.shape << " p " << p;
    }
  }
}

TEST(RateCdf, ConstantSignalAgainstSampledInterference) {
  const double sigma2 = 1e-12, s = 2e-9;
  const GammaParams gi{4.0, 2e-11};
  Rng rng = substream(7, stream::kTest);
  const int n = 200000;
  std::vector<double> r(n);
  for (int k = 0; k < n; ++k) r[static_cast<std::size_t>(k)] = std::log1p(s / (draw_gamma(gi, rng) + sigma2));
  std::sort(r.begin(), r.end());
  for (double p : {0.05, 0.25, 0.5, 0.75, 0.95}) {
    const double x = r[static_cast<std::size_t>(p * n)];
    EXPECT_NEAR(rate_cdf(x, ConstantPower{s}, gi, sigma2), p, 0.005);
  }
}

TEST(MinRateCdf, Identities) {
  EXPECT_DOUBLE_EQ(min_rate_cdf({0.37}), 0.37);
  EXPECT_DOUBLE_EQ(min_rate_cdf({0.2, 1.0, 0.1}), 1.0);
  EXPECT_NEAR(min_rate_cdf(std::vector<double>(10, 0.1)), 1.0 - std::pow(0.9, 10), 1e-15);
  EXPECT_NEAR(min_rate_cdf(std::vector<double>(10, 0.1)), 0.6513, 1e-4);
  EXPECT_THROW(min_rate_cdf({0.5, 1.2}), std::domain_error);
  Rng rng = substream(8, stream::kTest);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> f(5);
    for (double& v : f) v = u(rng);
    EXPECT_GE(min_rate_cdf(f), *std::max_element(f.begin(), f.end()) - 1e-15);
  }
}

TEST(MinRateCdf, MatchesSimulatedMinimumOfIndependentRates) {
  const double sigma2 = 1e-12;
  const std::vector<GammaParams> sig = {{3.0, 1e-9}, {5.0, 4e-10}, {2.0, 2e-9}, {9.0, 3e-10}};
  const GammaParams gi{5.0, 1e-11};
  Rng rng = substream(9, stream::kTest);
  const int n = 50000;
  std::vector<double> mins(n);
  for (int k = 0; k < n; ++k) {
    double m = 1e300;
    for (const auto& g : sig) m = std::min(m, std::log1p(draw_gamma(g, rng) / (draw_gamma(gi, rng) + sigma2)));
    mins[static_cast<std::size_t>(k)] = m;
  }
  std::sort(mins.begin(), mins.end());
  double gap = 0.0;
  for (int i = 1; i < 100; ++i) {
    const double x = mins[static_cast<std::size_t>(i * n / 100)];
    std::vector<double> f;
    for (const auto& g : sig) f.push_back(rate_cdf(x, g, gi, sigma2));
    const double emp = static_cast<double>(std::upper_bound(mins.begin(), mins.end(), x) - mins.begin()) / n;
    gap = std::max(gap, std::fabs(min_rate_cdf(f) - emp));
  }
  EXPECT_LT(gap, 0.05);
  EXPECT_LT(gap, 0.01);
}

TEST(Stats, CsvHeaderAndEmptyGammaForConstants) {
  SystemConfig c;
  c.q_cells = 4;
  c.rrh_per_cell = 2;
  c.users_per_cell = 4;
  Rng rng = substream(10, stream::kLayout);
  const NetworkLayout l = random_layout(c, rng);
  std::ostringstream os;
  write_stats_csv(os, {fronthaul_stats(l, c, Scheme::ZfMrc)});
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "cell,rrh,scheme,sig_mean,sig_var,int_mean,int_var,shape_s,scale_s,shape_i,scale_i");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_NE(line.find("zf-mrc"), std::string::npos);
    EXPECT_NE(line.find(",,"), std::string::npos);  // signal shape/scale left empty
  }
  EXPECT_EQ(rows, 8);
}

TEST(Scheme, NamesRoundTrip) {
  for (Scheme s : {Scheme::Multicast1Rx, Scheme::MulticastMrc, Scheme::ZfMrc}) EXPECT_EQ(parse_scheme(scheme_name(s)), s);
  EXPECT_THROW(parse_scheme("sdp"), ConfigError);
}
