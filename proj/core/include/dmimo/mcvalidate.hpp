#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "dmimo/config.hpp"
#include "dmimo/fronthaul.hpp"
#include "dmimo/netmodel.hpp"
#include "dmimo/rng.hpp"

namespace dmimo {

// Mc x M matrix of CN(0,1) entries.
Eigen::MatrixXcd sample_fading(int rows, int cols, Rng& rng);

// Largest singular value with its left/right singular vectors.
struct TopSingular {
  double sigma = 0.0;
  Eigen::VectorXcd u;  // rows
  Eigen::VectorXcd v;  // cols
};
TopSingular top_singular(const Eigen::MatrixXcd& g);

struct SimOptions {
  std::uint64_t seed = 1;
  int warmup_draws = 200;
  // Sample G b for interfering links directly as CN(0, I); exact because b is a unit
  // vector independent of G. When false the full Mc x M matrices are drawn.
  bool project_interference = true;
  // Record powers for this cell only (-1: all cells). Other entries stay zero.
  int only_cell = -1;
};

// Per-draw signal and interference powers (watts) for every RRH, cell-major.
struct FronthaulSamples {
  Scheme scheme = Scheme::MulticastMrc;
  int q_cells = 0;
  int rrh_per_cell = 0;
  int draws = 0;
  std::vector<double> sig;  // [draw * Q*N + cell*N + rrh]
  std::vector<double> intf;
  std::vector<double> mu2;          // normalisation used: per cell (multicast) or per RRH (ZF)
  double zf_incell_leak_max = 0.0;  // max |e_n^H w_n'| / |e_n^H w_n| over draws, n' != n

  std::size_t index(int d, int q, int n) const {
    return (static_cast<std::size_t>(d) * q_cells + q) * rrh_per_cell + n;
  }
  std::vector<double> sig_series(int q, int n) const;
  std::vector<double> int_series(int q, int n) const;
  std::vector<double> rate_series(int q, int n, double sigma2) const;  // nats/s/Hz
};

FronthaulSamples simulate_fronthaul(Scheme scheme, const NetworkLayout& layout, const SystemConfig& cfg, int n_draws,
                                    const SimOptions& opt = {});

// Unbiased sample mean and variance; throws std::domain_error for fewer than two samples.
Moments empirical_moments(const std::vector<double>& samples);

// Random layout with RRHs uniform in each cell outside an exclusion disc around the CU.
NetworkLayout random_layout(const SystemConfig& cfg, Rng& rng, double exclusion_m = 20.0);

// ---- Goodness of fit ---------------------------------------------------------------

enum class Family { Gamma, Exponential, Lognormal, Normal, Weibull, Rayleigh };
std::string family_name(Family f);
const std::vector<Family>& all_families();

struct KsResult {
  Family family = Family::Gamma;
  double statistic = 1.0;
  bool rejected = true;
  bool support_ok = true;
};

// Moment-fitted one-sample KS test at the 5% level (critical value 1.358/sqrt(n)).
KsResult ks_test(const std::vector<double>& samples, Family family);

struct KsSelection {
  std::vector<Family> families;
  std::vector<int> rejections;
  std::vector<int> retained;
  std::vector<double> mean_statistic;
  int trials = 0;
  Family winner = Family::Gamma;  // fewest rejections, ties broken by list order
};

KsSelection ks_select(const std::vector<std::vector<double>>& sample_sets,
                      const std::vector<Family>& families = all_families());

// One sample set per repetition: a fresh random layout and `draws` channel draws, keeping
// the powers of RRH (0, r mod N).
struct KsSampleSets {
  std::vector<std::vector<double>> sig;
  std::vector<std::vector<double>> intf;
};
KsSampleSets ks_sample_sets(Scheme scheme, const SystemConfig& cfg, int reps, int draws, std::uint64_t seed,
                            int warmup_draws = 50);

// ---- Random-matrix checks ----------------------------------------------------------

struct WishartTrace {
  double empirical_trace = 0.0;     // E tr((L^H L)^-1), L = top left singular vectors
  double empirical_diag = 0.0;      // mean diagonal entry
  double approximation = 0.0;       // (Mc - 1) N / (Mc - N)
  int draws = 0;
};
WishartTrace wishart_trace_oracle(int m_cu, int n_rrh, int n_draws, std::uint64_t seed, int m_rx = 8);

// Monte Carlo mean of the largest singular value of an Mc x M CN(0,1) matrix.
double sigma_max_mc(int m_rx, int m_cu, int n_draws, std::uint64_t seed);

// ---- Report ------------------------------------------------------------------------

struct MomentRow {
  int cell = 0;
  int rrh = 0;
  Moments sig_emp, int_emp;
  Moments sig_cf, int_cf;
};

struct CdfGap {
  int cell = 0;
  int rrh = -1;  // -1 for the per-cell minimum rate
  double gap = 0.0;
};

struct CdfCurvePoint {
  int cell = 0;
  int rrh = -1;
  double rate_nats = 0.0;
  double empirical = 0.0;
  double model = 0.0;
};

struct RelErrors {
  double sig_mean = 0.0, sig_var = 0.0, int_mean = 0.0, int_var = 0.0;
};

struct ValidationReport {
  Scheme scheme = Scheme::MulticastMrc;
  int draws = 0;
  std::uint64_t seed = 0;
  std::vector<MomentRow> rows;
  RelErrors pooled;     // |sum closed - sum empirical| / sum empirical over all RRHs
  RelErrors worst_rrh;  // largest per-RRH relative error
  RelErrors median_rrh;
  std::vector<CdfGap> cdf_gaps;  // constraint quantity: min rate (multicast) or per RRH (ZF)
  double cdf_gap_max = 0.0;
  std::vector<CdfCurvePoint> curves;
  double zf_incell_leak_max = 0.0;
};

struct ReportOptions {
  int cdf_nodes = 100;     // rate grid per curve, at empirical quantiles
  bool with_cdf = true;
};

ValidationReport build_report(const FronthaulSamples& samples, const NetworkLayout& layout, const SystemConfig& cfg,
                              std::uint64_t seed, const ReportOptions& opt = {});

nlohmann::json report_to_json(const ValidationReport& r);
void write_moments_csv(std::ostream& os, const std::vector<ValidationReport>& reports);
void write_cdf_csv(std::ostream& os, const std::vector<ValidationReport>& reports);
// scheme,cell,rrh,draw,S_w,I_w,rate_nats
void write_samples_csv(std::ostream& os, const FronthaulSamples& s, const SystemConfig& cfg, int max_draws);
void write_ks_csv(std::ostream& os, const std::string& label, const KsSelection& sel);

}  // namespace dmimo
