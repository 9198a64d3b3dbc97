#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dmimo/access.hpp"
#include "dmimo/config.hpp"
#include "dmimo/errors.hpp"
#include "dmimo/fronthaul.hpp"
#include "dmimo/mcvalidate.hpp"
#include "dmimo/placement.hpp"
#include "manifest.hpp"

namespace dmimo::cli {
namespace {

using nlohmann::json;

struct Common {
  std::string config;
  std::string scheme = "multicast-mrc";
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Common& c, bool scheme_all = false) {
  sub->add_option("--config", c.config, "JSON config file (defaults apply to missing keys)")->check(CLI::ExistingFile);
  sub->add_option("--scheme", c.scheme,
                  scheme_all ? "multicast-1rx | multicast-mrc | zf-mrc | all" : "multicast-1rx | multicast-mrc | zf-mrc");
  sub->add_option("--seed", c.seed, "RNG seed (overrides rng_seed)");
  sub->add_option("--out", c.out, "output directory")->required();
  sub->add_option("--set", c.sets, "override a config key, e.g. bandwidth.access_rbs=4");
}

json parse_value(const std::string& v) {
  try {
    return json::parse(v);
  } catch (const json::parse_error&) {
    return v;
  }
}

// Keys that are alternatives to each other; setting one drops the other from the base.
void drop_siblings(json& section, const std::string& key) {
  static const std::vector<std::pair<std::string, std::string>> pairs = {
      {"access_power_dbm", "access_power_w"}, {"cu_power_dbm", "cu_power_w"}, {"access_rbs", "fronthaul_rbs"}};
  for (const auto& [a, b] : pairs) {
    if (key == a) section.erase(b);
    if (key == b && a != "access_rbs") section.erase(a);
  }
}

SystemConfig resolve_config(const Common& c, std::vector<std::string>* inputs) {
  json j = json::object();
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    if (!in) throw ConfigError("cannot open config file: " + c.config);
    try {
      j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw ConfigError("cannot parse config file " + c.config + ": " + e.what());
    }
    if (inputs) inputs->push_back(c.config);
  }
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    const std::string key = s.substr(0, eq);
    const json value = parse_value(s.substr(eq + 1));
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      j[key] = value;
    } else {
      const std::string sec = key.substr(0, dot), k = key.substr(dot + 1);
      if (!j.contains(sec)) j[sec] = json::object();
      drop_siblings(j[sec], k);
      j[sec][k] = value;
    }
  }
  SystemConfig cfg;
  try {
    cfg = config_from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  if (c.seed) cfg.rng_seed = *c.seed;
  cfg.validate();
  return cfg;
}

std::vector<Scheme> resolve_schemes(const std::string& s) {
  if (s == "all") return {Scheme::Multicast1Rx, Scheme::MulticastMrc, Scheme::ZfMrc};
  return {parse_scheme(s)};
}

double rate_mbit_s(double se_nats, const SystemConfig& cfg) {
  return se_nats * cfg.access_rbs * cfg.rb_bandwidth_hz / std::log(2.0) * 1e-6;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void write_objective_csv(std::ostream& os, const PlacementState& st) {
  os << "sweep,cell,expected_se_nats,mean_se_nats,d_max_m,step_shrinks\n" << std::setprecision(12);
  for (const auto& h : st.history)
    for (std::size_t q = 0; q < h.cell_se.size(); ++q)
      os << h.sweep << ',' << q << ',' << h.cell_se[q] << ',' << h.mean_se << ',' << h.d_max << ',' << h.shrinks << '\n';
}

void write_traffic_csv(std::ostream& os, const TrafficModel& tm, const NetworkLayout& layout, int grid_n) {
  os << "cell,x_m,y_m,pdf_per_m2\n" << std::setprecision(10);
  for (int q = 0; q < layout.q_cells; ++q) {
    const CellGrid g = make_cell_grid(q, layout, grid_n);
    for (const Point& p : g.nodes) os << q << ',' << p.x << ',' << p.y << ',' << tm.pdf(p, q) << '\n';
  }
}

json infeasible_report(const std::string& command, const std::string& reason) {
  return {{"status", "infeasible"}, {"command", command}, {"reason", reason},
          {"remedy", "decrease the number of served users K or allocate more fronthaul bandwidth"}};
}

int report_infeasible(RunOutputs& outs, const SystemConfig& cfg, const std::string& command, const std::string& reason,
                      std::ostream& err) {
  const json r = infeasible_report(command, reason);
  outs.write("infeasible.json", [&](std::ostream& os) { os << r.dump(2) << '\n'; });
  outs.finish(cfg, {{"status", "infeasible"}});
  err << r.dump() << '\n';
  return kInfeasible;
}

// ---- plan ----

int cmd_plan(const Common& c, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> inputs;
  const SystemConfig cfg = resolve_config(c, &inputs);
  const Scheme scheme = parse_scheme(c.scheme);
  RunOutputs outs(c.out, "plan", argv);
  for (const auto& i : inputs) outs.add_input(i);

  const Scenario sc = make_scenario(cfg, cfg.rng_seed);
  OptimizeOptions opt;
  opt.max_sweeps = cfg.max_sweeps;
  const PlacementState st = optimize(sc.initial, sc.traffic, cfg, constraint_from_config(cfg, scheme), opt);

  outs.write("config.json", [&](std::ostream& os) { os << config_to_json(cfg).dump(2) << '\n'; });
  outs.write("initial_layout.csv", [&](std::ostream& os) { write_layout_csv(os, sc.initial); });
  outs.write("traffic.csv", [&](std::ostream& os) { write_traffic_csv(os, sc.traffic, sc.initial, cfg.grid_n); });
  if (st.status == PlacementStatus::Infeasible) return report_infeasible(outs, cfg, "plan", st.message, err);

  outs.write("layout.csv", [&](std::ostream& os) { write_layout_csv(os, st.layout); });
  outs.write("objective.csv", [&](std::ostream& os) { write_objective_csv(os, st); });
  outs.write("fronthaul.csv",
             [&](std::ostream& os) { write_stats_csv(os, {fronthaul_stats(st.layout, cfg, scheme)}); });
  json cells = json::array();
  for (std::size_t q = 0; q < st.final_se.size(); ++q)
    cells.push_back({{"cell", q}, {"expected_se_nats", st.final_se[q]}, {"rate_mbit_s", rate_mbit_s(st.final_se[q], cfg)}});
  const json summary = {{"scheme", scheme_name(scheme)},
                        {"status", status_name(st.status)},
                        {"sweeps", st.iteration},
                        {"d_max_m", st.d_max},
                        {"mean_se_nats", mean(st.final_se)},
                        {"mean_rate_mbit_s", rate_mbit_s(mean(st.final_se), cfg)},
                        {"cells", cells}};
  outs.write("summary.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
  outs.finish(cfg, {{"status", status_name(st.status)}});
  out << "plan " << scheme_name(scheme) << ": " << status_name(st.status) << " after " << st.iteration
      << " sweeps, mean expected SE " << std::setprecision(4) << mean(st.final_se) << " nats/s/Hz\n";
  return kOk;
}

// ---- validate / ksfit ----

struct ValidateArgs {
  int draws = 10000;
  int ks_reps = 10;
  int ks_draws = 1000;
  int samples = 0;
  std::string layout;
};

void write_ks(RunOutputs& outs, const std::vector<std::pair<std::string, KsSelection>>& sel) {
  outs.write("ks.csv", [&](std::ostream& os) {
    os << "sample,family,trials,rejections,retained,mean_ks_statistic,selected\n";
    for (const auto& [label, s] : sel) write_ks_csv(os, label, s);
  });
}

std::vector<std::pair<std::string, KsSelection>> run_ks(Scheme scheme, const SystemConfig& cfg, int reps, int draws) {
  std::vector<std::pair<std::string, KsSelection>> res;
  if (reps < 1) return res;
  const KsSampleSets sets = ks_sample_sets(scheme, cfg, reps, draws, cfg.rng_seed);
  // ZF signal power is deterministic per RRH; there is no distribution to select.
  if (scheme != Scheme::ZfMrc) res.emplace_back(scheme_name(scheme) + "/signal", ks_select(sets.sig));
  if (cfg.q_cells > 1) res.emplace_back(scheme_name(scheme) + "/interference", ks_select(sets.intf));
  return res;
}

int cmd_validate(const Common& c, const ValidateArgs& a, bool ks_only, const std::vector<std::string>& argv,
                 std::ostream& out) {
  std::vector<std::string> inputs;
  const SystemConfig cfg = resolve_config(c, &inputs);
  const auto schemes = resolve_schemes(c.scheme);
  if (!ks_only && a.draws < 1000) throw ConfigError("--draws must be at least 1000");
  if (a.ks_reps < 0 || (a.ks_reps > 0 && a.ks_draws < 100)) throw ConfigError("KS needs --ks-draws >= 100");
  RunOutputs outs(c.out, ks_only ? "ksfit" : "validate", argv);
  for (const auto& i : inputs) outs.add_input(i);

  std::vector<std::pair<std::string, KsSelection>> ks;
  if (ks_only) {
    for (Scheme s : schemes)
      for (auto& r : run_ks(s, cfg, a.ks_reps, a.ks_draws)) ks.push_back(std::move(r));
    write_ks(outs, ks);
    outs.finish(cfg);
    for (const auto& [label, s] : ks) out << label << ": " << family_name(s.winner) << '\n';
    return kOk;
  }

  NetworkLayout layout;
  if (!a.layout.empty()) {
    std::ifstream in(a.layout);
    if (!in) throw ConfigError("cannot open layout file: " + a.layout);
    layout = read_layout_csv(in, cfg);
    outs.add_input(a.layout);
  } else {
    Rng rng = substream(cfg.rng_seed, stream::kLayout);
    layout = random_layout(cfg, rng);
  }

  std::vector<ValidationReport> reports;
  json rj = json::array();
  for (Scheme s : schemes) {
    SimOptions so;
    so.seed = cfg.rng_seed;
    const FronthaulSamples smp = simulate_fronthaul(s, layout, cfg, a.draws, so);
    reports.push_back(build_report(smp, layout, cfg, cfg.rng_seed));
    rj.push_back(report_to_json(reports.back()));
    if (a.samples > 0)
      outs.write("samples_" + scheme_name(s) + ".csv",
                 [&](std::ostream& os) { write_samples_csv(os, smp, cfg, a.samples); });
    for (auto& r : run_ks(s, cfg, a.ks_reps, a.ks_draws)) ks.push_back(std::move(r));
    out << scheme_name(s) << ": pooled mean error sig " << std::setprecision(3) << reports.back().pooled.sig_mean
        << " int " << reports.back().pooled.int_mean << ", CDF gap " << reports.back().cdf_gap_max << '\n';
  }
  outs.write("layout.csv", [&](std::ostream& os) { write_layout_csv(os, layout); });
  outs.write("moments.csv", [&](std::ostream& os) { write_moments_csv(os, reports); });
  outs.write("cdf.csv", [&](std::ostream& os) { write_cdf_csv(os, reports); });
  write_ks(outs, ks);
  outs.write("report.json", [&](std::ostream& os) { os << rj.dump(2) << '\n'; });
  outs.finish(cfg);
  return kOk;
}

// ---- sweep ----

struct SweepPoint {
  std::string label;
  SystemConfig cfg;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

int to_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid " + what + " value '" + s + "'");
  }
}

std::vector<SweepPoint> sweep_points(const SystemConfig& base, const std::string& axis, const std::string& values) {
  std::vector<SweepPoint> pts;
  for (const auto& v : split(values, ',')) {
    SweepPoint p{v, base};
    if (axis == "omega") {
      p.cfg.set_access_rbs(to_int(v, axis));
    } else if (axis == "K") {
      p.cfg.users_per_cell = to_int(v, axis);
    } else if (axis == "M") {
      p.cfg.rrh_antennas = to_int(v, axis);
    } else if (axis == "N-M-split") {
      const auto nm = split(v, 'x');
      if (nm.size() != 2) throw ConfigError("N-M-split values look like 10x8, got '" + v + "'");
      p.cfg.rrh_per_cell = to_int(nm[0], "N");
      p.cfg.rrh_antennas = to_int(nm[1], "M");
    } else {
      throw ConfigError("unknown sweep axis '" + axis + "' (omega, K, M, N-M-split)");
    }
    p.cfg.validate();
    pts.push_back(std::move(p));
  }
  if (pts.empty()) throw ConfigError("--values is empty");
  return pts;
}

struct SweepResult {
  bool feasible = false;
  std::string status;
  int sweeps = 0;
  double mean_se = 0.0;
  NetworkLayout layout;
};

int cmd_sweep(const Common& c, const std::string& axis, const std::string& values, int jobs,
              const std::vector<std::string>& argv, std::ostream& out) {
  std::vector<std::string> inputs;
  const SystemConfig base = resolve_config(c, &inputs);
  const Scheme scheme = parse_scheme(c.scheme);
  const auto pts = sweep_points(base, axis, values);
  RunOutputs outs(c.out, "sweep", argv);
  for (const auto& i : inputs) outs.add_input(i);

  std::vector<SweepResult> res(pts.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < pts.size(); i = next++) {
      try {
        const SystemConfig& cfg = pts[i].cfg;
        const Scenario sc = make_scenario(cfg, cfg.rng_seed);
        OptimizeOptions opt;
        opt.max_sweeps = cfg.max_sweeps;
        const PlacementState st = optimize(sc.initial, sc.traffic, cfg, constraint_from_config(cfg, scheme), opt);
        res[i] = {st.status != PlacementStatus::Infeasible, status_name(st.status), st.iteration, mean(st.final_se),
                  st.status == PlacementStatus::Infeasible ? sc.initial : st.layout};
      } catch (...) {
        std::lock_guard<std::mutex> lk(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(pts.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  outs.write("sweep.csv", [&](std::ostream& os) {
    os << "axis,value,scheme,expected_se_nats,rate_mbit_s,feasible,status,sweeps\n" << std::setprecision(12);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      os << axis << ',' << pts[i].label << ',' << scheme_name(scheme) << ',';
      if (res[i].feasible) os << res[i].mean_se << ',' << rate_mbit_s(res[i].mean_se, pts[i].cfg);
      else os << ',';
      os << ',' << (res[i].feasible ? 1 : 0) << ',' << res[i].status << ',' << res[i].sweeps << '\n';
    }
  });
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (res[i].feasible)
      outs.write("layout_" + axis + "_" + pts[i].label + ".csv",
                 [&](std::ostream& os) { write_layout_csv(os, res[i].layout); });
  outs.finish(base, {{"axis", axis}, {"values", values}});
  for (std::size_t i = 0; i < pts.size(); ++i)
    out << axis << '=' << pts[i].label << ": " << (res[i].feasible ? std::to_string(res[i].mean_se) : "infeasible")
        << '\n';
  return kOk;
}

// ---- baseline ----

int cmd_baseline(const Common& c, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> inputs;
  const SystemConfig cfg = resolve_config(c, &inputs);
  const Scheme scheme = parse_scheme(c.scheme);
  RunOutputs outs(c.out, "baseline", argv);
  for (const auto& i : inputs) outs.add_input(i);

  const Scenario sc = make_scenario(cfg, cfg.rng_seed);
  const ConstraintSpec spec = constraint_from_config(cfg, scheme);
  const BaselineResult b = circular_baseline(sc.initial, sc.traffic, cfg, spec);
  if (!b.feasible) return report_infeasible(outs, cfg, "baseline", b.message, err);
  OptimizeOptions opt;
  opt.max_sweeps = cfg.max_sweeps;
  const PlacementState st = optimize(sc.initial, sc.traffic, cfg, spec, opt);
  if (st.status == PlacementStatus::Infeasible) return report_infeasible(outs, cfg, "baseline", st.message, err);

  outs.write("layout.csv", [&](std::ostream& os) { write_layout_csv(os, b.layout); });
  outs.write("optimized_layout.csv", [&](std::ostream& os) { write_layout_csv(os, st.layout); });
  outs.write("baseline.csv", [&](std::ostream& os) {
    os << "cell,radius_m,baseline_se_nats,optimized_se_nats\n" << std::setprecision(12);
    for (std::size_t q = 0; q < b.cell_se.size(); ++q)
      os << q << ',' << b.radius_m[q] << ',' << b.cell_se[q] << ',' << st.final_se[q] << '\n';
  });
  const double ratio = mean(st.final_se) / b.mean_se;
  const json summary = {{"scheme", scheme_name(scheme)},
                        {"baseline_mean_se_nats", b.mean_se},
                        {"optimized_mean_se_nats", mean(st.final_se)},
                        {"ratio", ratio},
                        {"radius_cap_m", (2.0 / 3.0) * 0.5 * cfg.cell_side_m}};
  outs.write("summary.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
  outs.finish(cfg);
  out << "baseline " << std::setprecision(4) << b.mean_se << " optimized " << mean(st.final_se) << " ratio " << ratio
      << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributed MIMO RRH placement planner"};
  app.require_subcommand(1);
  std::vector<std::string> args(argv, argv + argc);

  Common plan_c, val_c, ks_c, sweep_c, base_c;
  ValidateArgs val_a, ks_a;
  ks_a.ks_reps = 100;
  std::string axis, values;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  auto* plan = app.add_subcommand("plan", "optimize RRH locations");
  add_common(plan, plan_c);
  auto* val = app.add_subcommand("validate", "Monte Carlo check of the fronthaul closed forms");
  add_common(val, val_c, true);
  val->add_option("--draws", val_a.draws, "channel draws (>= 1000)");
  val->add_option("--ks-reps", val_a.ks_reps, "KS repetitions (0 skips)");
  val->add_option("--ks-draws", val_a.ks_draws, "samples per KS repetition");
  val->add_option("--samples", val_a.samples, "write the first N draws per scheme");
  val->add_option("--layout", val_a.layout, "layout CSV (default: random with 20 m CU exclusion)")->check(CLI::ExistingFile);
  auto* ks = app.add_subcommand("ksfit", "KS model selection only");
  add_common(ks, ks_c, true);
  ks->add_option("--ks-reps", ks_a.ks_reps, "repetitions");
  ks->add_option("--ks-draws,--draws", ks_a.ks_draws, "samples per repetition");
  auto* sweep = app.add_subcommand("sweep", "optimize once per axis value");
  add_common(sweep, sweep_c);
  sweep->add_option("--axis", axis, "omega | K | M | N-M-split")->required();
  sweep->add_option("--values", values, "comma-separated; N-M-split values look like 10x8")->required();
  sweep->add_option("--jobs", jobs, "worker threads");
  auto* base = app.add_subcommand("baseline", "circular placement versus optimized");
  add_common(base, base_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (*plan) return cmd_plan(plan_c, args, out, err);
    if (*val) return cmd_validate(val_c, val_a, false, args, out);
    if (*ks) return cmd_validate(ks_c, ks_a, true, args, out);
    if (*sweep) return cmd_sweep(sweep_c, axis, values, jobs, args, out);
    if (*base) return cmd_baseline(base_c, args, out, err);
  } catch (const InfeasibleError& e) {
    err << json{{"status", "infeasible"}, {"reason", e.what()}}.dump() << '\n';
    return kInfeasible;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::domain_error& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace dmimo::cli
