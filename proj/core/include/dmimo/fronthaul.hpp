#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "dmimo/config.hpp"
#include "dmimo/netmodel.hpp"

namespace dmimo {

enum class Scheme { Multicast1Rx, MulticastMrc, ZfMrc };

std::string scheme_name(Scheme s);  // multicast-1rx | multicast-mrc | zf-mrc
Scheme parse_scheme(const std::string& name);  // throws ConfigError
inline bool is_multicast(Scheme s) { return s != Scheme::ZfMrc; }

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

struct GammaParams {
  double shape = 1.0;
  double scale = 1.0;
  double mean() const { return shape * scale; }
  double var() const { return shape * scale * scale; }
};

struct ConstantPower {
  double value = 0.0;
};

// A received power is either gamma distributed or deterministic.
using PowerModel = std::variant<GammaParams, ConstantPower>;

// shape = mean^2/var, scale = var/mean. Throws std::domain_error unless both are positive.
GammaParams gamma_fit(double mean, double var);

// Gamma model when var > 0, constant otherwise.
PowerModel power_model(const Moments& m);

// Approximate mean of the largest singular value of an Mc x M CN(0,1) matrix.
double sigma_max_mean(int m_rx, int m_cu);

// ---- Closed forms on path-loss values -------------------------------------------------

// own_pl[n]: path loss from the serving CU to RRH n. Multicast modes only.
double multicast_mu(const std::vector<double>& own_pl, const SystemConfig& cfg, Scheme mode);
Moments multicast_signal_moments(const std::vector<double>& own_pl, int n, const SystemConfig& cfg, Scheme mode);

// other_pl: path losses from every non-serving CU to the RRH.
Moments multicast_interference_moments(const std::vector<double>& other_pl, double cu_power_w);
double zf_signal_power(double own_pl, const SystemConfig& cfg);
Moments zf_interference_moments(const std::vector<double>& other_pl, double cu_power_w, int rrh_per_cell);

// ---- Layout wrappers --------------------------------------------------------------

std::vector<double> own_path_losses(int q, const NetworkLayout& layout, const SystemConfig& cfg);
std::vector<double> interferer_path_losses(int q, int n, const NetworkLayout& layout, const SystemConfig& cfg);

double multicast_mu(int q, const NetworkLayout& layout, const SystemConfig& cfg, Scheme mode);
Moments multicast_signal_moments(int q, int n, const NetworkLayout& layout, const SystemConfig& cfg, Scheme mode);
Moments multicast_interference_moments(int q, int n, const NetworkLayout& layout, const SystemConfig& cfg);
double zf_signal_power(int q, int n, const NetworkLayout& layout, const SystemConfig& cfg);
Moments zf_interference_moments(int q, int n, const NetworkLayout& layout, const SystemConfig& cfg);

// ---- Outage ------------------------------------------------------------------------

// P{log(1 + S/(I + sigma2)) <= x_dot}. Throws NumericalError when quadrature fails.
double rate_cdf(double x_dot, const PowerModel& sig, const PowerModel& intf, double sigma2);

// 1 - prod(1 - F_n).
double min_rate_cdf(const std::vector<double>& per_rrh_cdf);

struct RrhStats {
  int cell = 0;
  int rrh = 0;
  Moments sig;
  Moments intf;
  PowerModel sig_model;
  PowerModel int_model;
};

struct FronthaulStats {
  Scheme scheme = Scheme::MulticastMrc;
  std::vector<RrhStats> rrh;  // cell-major
};

std::vector<RrhStats> cell_fronthaul_stats(int q, const NetworkLayout& layout, const SystemConfig& cfg, Scheme s);
FronthaulStats fronthaul_stats(const NetworkLayout& layout, const SystemConfig& cfg, Scheme s);

// cell,rrh,scheme,sig_mean,sig_var,int_mean,int_var,shape_s,scale_s,shape_i,scale_i (W, W^2).
// Shape/scale are empty for deterministic powers.
void write_stats_csv(std::ostream& os, const std::vector<FronthaulStats>& stats);

}  // namespace dmimo
