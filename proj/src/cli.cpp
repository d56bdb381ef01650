#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "tunnel/config.hpp"
#include "tunnel/io.hpp"
#include "tunnel/quantum.hpp"
#include "tunnel/semiclassics.hpp"
#include "tunnel/trajectories.hpp"

namespace tunnel::cli {
namespace {

namespace fs = std::filesystem;

struct RunConfig {
  std::string command;
  std::string potential;
  json potential_json;
  std::string hbar_inverse = "12";
  std::vector<std::string> methods = {"exact"};
  std::string time;
  std::string time_grid;
  std::string out = ".";
  bool strict = false;
  std::string config;
  int level = 0;
  int levels = 6;
  json tolerances = json::object();
  std::string tolerances_arg;
  double energy = std::numeric_limits<double>::quiet_NaN();
  std::string family = "double_well";
  int w_r = 1, w_c = 0, w_m = 0, eta = -1;
  std::vector<double> sequence;
  int threads = 0;
};

struct Outcome {
  json manifest = json::object();
  std::vector<std::string> warnings;
};

void apply_config_file(RunConfig& c) {
  if (c.config.empty()) return;
  json j = read_json_file(c.config);
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  try {
    if (j.contains("potential")) {
      if (j["potential"].is_string())
        c.potential = j["potential"].get<std::string>();
      else
        c.potential_json = j["potential"];
    }
    if (j.contains("hbar_inverse")) {
      auto& h = j["hbar_inverse"];
      if (h.is_string())
        c.hbar_inverse = h.get<std::string>();
      else if (h.is_number())
        c.hbar_inverse = csv::number(h.get<double>());
      else
        c.hbar_inverse = csv::number(h.at("start").get<double>()) + ":" + csv::number(h.at("stop").get<double>()) +
                         ":" + std::to_string(h.at("count").get<int>());
    }
    if (j.contains("methods")) c.methods = j["methods"].get<std::vector<std::string>>();
    if (j.contains("T")) {
      auto t = j["T"].get<std::vector<double>>();
      if (t.size() != 2) throw ConfigError("config: T must be [re, im]");
      c.time = csv::number(t[0]) + "," + csv::number(t[1]);
    }
    if (j.contains("T_grid")) c.time_grid = j["T_grid"].get<std::string>();
    if (j.contains("out")) c.out = j["out"].get<std::string>();
    if (j.contains("strict")) c.strict = j["strict"].get<bool>();
    if (j.contains("level")) c.level = j["level"].get<int>();
    if (j.contains("levels")) c.levels = j["levels"].get<int>();
    if (j.contains("tolerances")) c.tolerances = j["tolerances"];
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("orbit")) {
      auto& o = j["orbit"];
      c.energy = o.value("energy", c.energy);
      c.family = o.value("family", c.family);
      c.w_r = o.value("w_r", c.w_r);
      c.w_c = o.value("w_c", c.w_c);
      c.w_m = o.value("w_m", c.w_m);
      c.eta = o.value("eta", c.eta);
      if (o.contains("sequence")) c.sequence = o["sequence"].get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

Potential resolve_potential(const RunConfig& c) {
  if (!c.potential_json.is_null()) return potential_from_json(c.potential_json);
  if (c.potential.empty()) throw ConfigError("no potential given (use --potential or the config file)");
  return load_potential(c.potential);
}

double tolerance(const RunConfig& c, const char* key, double fallback) {
  if (!c.tolerances.contains(key)) return fallback;
  if (!c.tolerances[key].is_number()) throw ConfigError(std::string("tolerances: '") + key + "' must be a number");
  return c.tolerances[key].get<double>();
}

SolveOptions solve_options(const RunConfig& c, const Potential& v) {
  SolveOptions opt;
  if (v.topology() == Topology::line) {
    if (!v.is_polynomial() || v.coefficients().size() % 2 == 0 || v.coefficients().back() <= 0)
      throw ConfigError("spectrum: the potential does not confine");
    double r = detail::confining_radius(v, v(0) + 1);
    double bottom = std::numeric_limits<double>::infinity(), top = -bottom;
    for (double q : critical_points(v, -r, r)) {
      if (v.eval(q, 2) > 0) bottom = std::min(bottom, v(q));
      if (v.eval(q, 2) < 0) top = std::max(top, v(q));
    }
    opt.energy_cap = std::isfinite(top) ? top + (top - bottom) : bottom + 1;
  } else {
    opt.energy_cap = 2 * v.gamma();
  }
  opt.energy_cap = tolerance(c, "energy_cap", opt.energy_cap);
  opt.max_points = int(tolerance(c, "max_points", opt.max_points));
  opt.initial_points = int(tolerance(c, "initial_points", opt.initial_points));
  opt.levels_checked = std::max(opt.levels_checked, 2 * c.levels);
  return opt;
}

json basis_json(const BasisSpec& b) {
  if (b.kind == BasisSpec::Kind::fourier_grid)
    return {{"kind", "fourier_grid"}, {"half_width", b.half_width}, {"points", b.points}, {"hbar", b.hbar}};
  return {{"kind", "fourier_modes"}, {"modes", b.modes}, {"hbar", b.hbar}};
}

json conventions() {
  return {{"reduced_action", "closed loop, 2 x integral of |p| dq between turning points"},
          {"time_path", "staircase with Im t non-increasing"},
          {"splitting", "E_minus - E_plus in magnitude; parity from the symmetric basis blocks"},
          {"csv_schema", csv::schema_version}};
}

double single_hbar(const RunConfig& c) {
  auto r = parse_range(c.hbar_inverse, "--hbar-inverse");
  if (r.count != 1) throw ConfigError("this command takes a single 1/hbar value");
  if (!(r.start > 0)) throw ConfigError("--hbar-inverse: must be positive");
  return 1 / r.start;
}

void note(Outcome& o, const std::vector<std::string>& w) {
  for (auto& s : w)
    if (std::find(o.warnings.begin(), o.warnings.end(), s) == o.warnings.end()) o.warnings.push_back(s);
}

Outcome cmd_spectrum(const RunConfig& c, const Potential& v) {
  Outcome o;
  double hbar = single_hbar(c);
  auto s = solve_spectrum(v, hbar, solve_options(c, v));
  fs::path dir(c.out);
  {
    csv::Writer w(dir / "levels.csv", "levels", csv::levels_header);
    auto levels = s.levels();
    for (int i = 0; i < std::min<int>(2 * c.levels, int(levels.size())); ++i)
      w.row(i, levels[i].parity > 0 ? "even" : "odd", levels[i].energy);
  }
  csv::Writer w(dir / "spectrum.csv", "spectrum", csv::spectrum_header);
  bool circle = v.topology() == Topology::circle;
  for (int n = 0; n < c.levels; ++n) {
    if (circle && n == 0) continue;
    int even = n, odd = circle ? n - 1 : n;
    if (even >= s.even_energies.size() || odd >= s.odd_energies.size()) break;
    double ep = s.even_energies[even], em = s.odd_energies[odd];
    std::string flags;
    if (!circle) {
      auto est = exact_splitting(s, n);
      note(o, est.warnings);
      for (auto& x : est.warnings) flags += (flags.empty() ? "" : ";") + x;
      ep = est.diag("E_plus");
      em = est.diag("E_minus");
    }
    w.row(n, ep, em, std::abs(em - ep), flags);
  }
  o.manifest["basis"] = basis_json(s.basis);
  o.manifest["hbar"] = hbar;
  o.manifest["edge_amplitude"] = s.edge_amplitude;
  o.manifest["outputs"] = {"spectrum.csv", "levels.csv"};
  if (!s.edge_converged) note(o, {"basis_unconverged"});
  return o;
}

Outcome cmd_trace_grid(const RunConfig& c, const Potential& v) {
  Outcome o;
  double hbar = single_hbar(c);
  std::vector<cplx> times;
  if (!c.time_grid.empty()) {
    auto g = parse_time_grid(c.time_grid);
    for (double im : g.im.values())
      for (double re : g.re.values()) times.emplace_back(re, im);
    o.manifest["T_grid"] = c.time_grid;
  } else if (!c.time.empty()) {
    times.push_back(parse_time(c.time));
    o.manifest["T"] = c.time;
  } else {
    throw ConfigError("trace-grid: give --T or --T-grid");
  }
  for (cplx t : times) {
    if (t.imag() > 0) throw ConfigError("trace-grid: Im T must not be positive");
    if (t == cplx(0, 0)) throw ConfigError("trace-grid: T = 0 is not allowed");
  }
  auto s = solve_spectrum(v, hbar, solve_options(c, v));
  csv::Writer w(fs::path(c.out) / "trace_grid.csv", "trace_grid", csv::trace_grid_header);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0;
  for (cplx t : times) {
    auto est = delta0_trace(s, t);
    note(o, est.warnings);
    double re = est.diag("re");
    w.row(t.real(), t.imag(), re, est.diag("im"));
    lo = std::min(lo, re);
    hi = std::max(hi, re);
    sum += re;
  }
  o.manifest["basis"] = basis_json(s.basis);
  o.manifest["hbar"] = hbar;
  o.manifest["plateau_flatness"] = (hi - lo) / std::abs(sum / double(times.size()));
  o.manifest["exact_splitting"] = exact_splitting(s, 0).value;
  o.manifest["outputs"] = {"trace_grid.csv"};
  return o;
}

struct ScanRow {
  double hbar_inverse;
  std::string method;
  double ln_exact = std::numeric_limits<double>::quiet_NaN();
  double ln_sc = std::numeric_limits<double>::quiet_NaN();
  double lambda = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> flags;
};

SplittingEstimate scan_method(const std::string& m, const Potential& v, int n, double hbar, const RunConfig& c) {
  if (m == "instanton") {
    if (n != 0) throw ConfigError("scan: method 'instanton' is for the ground doublet");
    return splitting_ground_instanton(v, hbar);
  }
  if (m == "excited") return splitting_excited(v, n, hbar);
  if (m == "harmonic") return splitting_excited(v, n, hbar, EnergyRule::harmonic);
  if (m == "pendulum_asymptotic") {
    if (v.kind() != PotentialKind::pendulum) throw ConfigError("scan: 'pendulum_asymptotic' needs the pendulum");
    return pendulum_splitting_asymptotic(n, v.gamma(), hbar);
  }
  if (m == "resonant_limit") return resonant_splitting_limit(v, n, hbar);
  if (m.rfind("resonant_sum:", 0) == 0) {
    double k = parse_number(m.substr(13), "scan: resonant_sum:K");
    if (k < 0 || k != std::floor(k)) throw ConfigError("scan: resonant_sum:K needs a non-negative integer K");
    return resonant_splitting_sum(v, n, hbar, resonant_time(v, n, hbar, int(k)));
  }
  if (m == "escape") return escape_rate(v, n, hbar);
  if (m == "delta0_trace") {
    cplx t = c.time.empty() ? cplx(0, -4) : parse_time(c.time);
    return delta0_trace(solve_spectrum(v, hbar, solve_options(c, v)), t);
  }
  throw ConfigError("scan: unknown method '" + m + "'");
}

bool known_method(const std::string& m) {
  static const std::vector<std::string> names = {"exact",  "instanton",      "excited",     "harmonic",
                                                 "pendulum_asymptotic", "resonant_limit", "escape", "delta0_trace"};
  return std::find(names.begin(), names.end(), m) != names.end() || m.rfind("resonant_sum:", 0) == 0;
}

std::vector<ScanRow> scan_point(const RunConfig& c, const Potential& v, double inv) {
  double hbar = 1 / inv;
  int n = c.level;
  std::vector<ScanRow> rows;
  double ln_exact = std::numeric_limits<double>::quiet_NaN();
  bool want_exact = std::find(c.methods.begin(), c.methods.end(), "exact") != c.methods.end();
  if (want_exact) {
    ScanRow r{inv, "exact"};
    try {
      auto est = v.kind() == PotentialKind::pendulum ? pendulum_splitting_mathieu(v.gamma(), n, hbar)
                                                     : exact_splitting(solve_spectrum(v, hbar, solve_options(c, v)), n);
      ln_exact = std::log(est.value);
      r.ln_exact = ln_exact;
      r.flags = est.warnings;
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      r.flags.push_back(std::string("failed: ") + e.what());
    }
    rows.push_back(r);
  }
  for (auto& m : c.methods) {
    if (m == "exact") continue;
    ScanRow r{inv, m};
    r.ln_exact = ln_exact;
    try {
      auto est = scan_method(m, v, n, hbar, c);
      r.ln_sc = std::log(est.value);
      r.flags = est.warnings;
      if (est.diagnostics.count("lambda")) r.lambda = est.diag("lambda");
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      r.flags.push_back(std::string("failed: ") + e.what());
    }
    rows.push_back(r);
  }
  return rows;
}

Outcome cmd_scan(const RunConfig& c, const Potential& v) {
  Outcome o;
  auto grid = parse_range(c.hbar_inverse, "--hbar-inverse");
  if (!(grid.start > 0)) throw ConfigError("--hbar-inverse: values must be positive");
  if (c.methods.empty()) throw ConfigError("scan: no methods selected");
  for (auto& m : c.methods)
    if (!known_method(m)) throw ConfigError("scan: unknown method '" + m + "'");
  if (c.level < 0) throw ConfigError("scan: level must be non-negative");
  auto points = grid.values();
  std::vector<std::vector<ScanRow>> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < points.size();) {
      try {
        results[i] = scan_point(c, v, points[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  int workers = c.threads > 0 ? c.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<int>(workers, int(points.size()));
  std::vector<std::thread> pool;
  for (int k = 1; k < workers; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  csv::Writer w(fs::path(c.out) / "scan.csv", "scan", csv::scan_header);
  int failed = 0;
  for (auto& rows : results)
    for (auto& r : rows) {
      std::string flags;
      for (auto& f : r.flags) {
        flags += (flags.empty() ? "" : ";") + f;
        if (f.rfind("failed", 0) == 0) ++failed;
      }
      std::vector<std::string> warned;
      for (auto& f : r.flags)
        if (f.rfind("failed", 0) != 0) warned.push_back(f);
      note(o, warned);
      w.row(r.hbar_inverse, c.level, r.method, r.ln_exact, r.ln_sc, r.ln_exact - r.ln_sc, r.lambda, flags);
    }
  o.manifest["hbar_inverse"] = {{"start", grid.start}, {"stop", grid.stop}, {"count", grid.count}};
  o.manifest["methods"] = c.methods;
  o.manifest["level"] = c.level;
  o.manifest["failed_points"] = failed;
  o.manifest["outputs"] = {"scan.csv"};
  if (!c.time.empty()) o.manifest["T"] = c.time;
  return o;
}

OrbitTopology orbit_topology(const RunConfig& c, const Potential& v) {
  if (!std::isfinite(c.energy)) throw ConfigError("orbit: --energy is required");
  if (c.family == "double_well") return double_well_topology(v, c.energy, c.w_r, c.w_c, c.eta);
  if (c.family == "triple_well") return triple_well_topology(v, c.energy, c.w_r, c.w_m);
  if (c.family == "pendulum") return pendulum_topology(v, c.energy, c.w_r, c.w_c, c.eta);
  if (c.family == "sequence") return from_sequence(v, c.energy, c.sequence, c.eta);
  throw ConfigError("orbit: unknown family '" + c.family + "'");
}

Outcome cmd_orbit(const RunConfig& c, const Potential& v) {
  Outcome o;
  auto t = orbit_topology(c, v);
  auto orbit = build_real_q_orbit(v, t);
  fs::path dir(c.out);
  csv::write_trajectory(dir / "trajectory.csv", orbit.trajectory);
  csv::write_staircase(dir / "staircase.csv", orbit.path);
  std::vector<json> legs;
  for (auto& l : t.legs) legs.push_back({{"kind", to_string(l.kind)}, {"from", l.from}, {"to", l.to}});
  o.manifest["orbit"] = {{"family", c.family},
                         {"energy", c.energy},
                         {"w_r", t.w_r},
                         {"w_c", t.w_c},
                         {"w_m", t.w_m},
                         {"eta", t.eta},
                         {"maslov", t.maslov},
                         {"turning_points", t.turning_points},
                         {"legs", legs}};
  o.manifest["period"] = {orbit.total_time.real(), orbit.total_time.imag()};
  o.manifest["action"] = {orbit.action.real(), orbit.action.imag()};
  o.manifest["residuals"] = {{"closure", orbit.closure_residual},
                             {"period", orbit.period_residual},
                             {"action", orbit.action_residual},
                             {"determinant", orbit.determinant_residual},
                             {"energy_drift", orbit.max_drift}};
  o.manifest["steps_per_leg"] = orbit.steps_per_leg;
  o.manifest["outputs"] = {"trajectory.csv", "staircase.csv"};
  return o;
}

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--potential", c.potential, "Potential JSON file (or inline JSON)");
  sub->add_option("--hbar-inverse", c.hbar_inverse, "1/hbar value or start:stop:count grid");
  sub->add_option("--out", c.out, "Output directory");
  sub->add_flag("--strict", c.strict, "Treat precondition warnings as errors");
  sub->add_option("--config", c.config, "JSON run configuration; overrides flags");
  sub->add_option("--tolerances", c.tolerances_arg, "JSON object of solver overrides (energy_cap, max_points, initial_points)");
}

void add_options(CLI::App& app, RunConfig& c) {
  auto* spectrum = app.add_subcommand("spectrum", "Exact spectrum and doublet splittings");
  add_common(spectrum, c);
  spectrum->add_option("--levels", c.levels, "Number of doublets to report");

  auto* trace = app.add_subcommand("trace-grid", "Ground splitting from the trace ratio over complex T");
  add_common(trace, c);
  trace->add_option("--T", c.time, "Single complex time re,im");
  trace->add_option("--T-grid", c.time_grid, "re0:re1:n,im0:im1:m");

  auto* scan = app.add_subcommand("scan", "ln splittings against 1/hbar for selected methods");
  add_common(scan, c);
  scan->add_option("--methods", c.methods, "exact, instanton, excited, harmonic, pendulum_asymptotic, "
                                           "resonant_limit, resonant_sum:K, escape, delta0_trace")
      ->delimiter(',');
  scan->add_option("--level", c.level, "Doublet index");
  scan->add_option("--T", c.time, "Complex time for delta0_trace");
  scan->add_option("--threads", c.threads, "Worker threads (default: hardware)");

  auto* orbit = app.add_subcommand("orbit", "Real-q complex-time orbit and its staircase");
  add_common(orbit, c);
  orbit->add_option("--energy", c.energy, "Orbit energy");
  orbit->add_option("--family", c.family, "double_well, triple_well, pendulum or sequence");
  orbit->add_option("--wr", c.w_r, "Lateral windings");
  orbit->add_option("--wc", c.w_c, "Barrier windings");
  orbit->add_option("--wm", c.w_m, "Central-well windings");
  orbit->add_option("--eta", c.eta, "+1 or -1");
  orbit->add_option("--sequence", c.sequence, "Turning points for family=sequence")->delimiter(',');

  app.require_subcommand(1);
}

int execute(CLI::App& app, RunConfig& c, const std::vector<std::string>& argv) {
  try {
    c.command = app.get_subcommands().front()->get_name();
    if (!c.tolerances_arg.empty()) {
      try {
        c.tolerances = json::parse(c.tolerances_arg);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("--tolerances: ") + e.what());
      }
      if (!c.tolerances.is_object()) throw ConfigError("--tolerances: expected a JSON object");
    }
    apply_config_file(c);
    auto v = resolve_potential(c);
    fs::create_directories(c.out);
    Outcome o;
    if (c.command == "spectrum") o = cmd_spectrum(c, v);
    if (c.command == "trace-grid") o = cmd_trace_grid(c, v);
    if (c.command == "scan") o = cmd_scan(c, v);
    if (c.command == "orbit") o = cmd_orbit(c, v);
    o.manifest["command"] = c.command;
    o.manifest["argv"] = argv;
    o.manifest["potential"] = potential_to_json(v);
    o.manifest["hbar_inverse_spec"] = c.hbar_inverse;
    o.manifest["tolerances"] = c.tolerances;
    o.manifest["conventions"] = conventions();
    o.manifest["warnings"] = o.warnings;
    o.manifest["strict"] = c.strict;
    std::ofstream(fs::path(c.out) / "manifest.json") << o.manifest.dump(2) << '\n';
    if (c.strict && !o.warnings.empty()) {
      std::cerr << "tunnel: precondition warnings under --strict:";
      for (auto& w : o.warnings) std::cerr << ' ' << w;
      std::cerr << '\n';
      return strict_failure;
    }
    return success;
  } catch (const ConfigError& e) {
    std::cerr << "tunnel: " << e.what() << '\n';
    return config_error;
  } catch (const TopologyError& e) {
    std::cerr << "tunnel: topology error: " << e.what() << '\n';
    return config_error;
  } catch (const Error& e) {
    std::cerr << "tunnel: numerical failure: " << e.what() << '\n';
    return numerical_failure;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "tunnel: " << e.what() << '\n';
    return config_error;
  }
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Tunnelling splittings: exact spectra, trace formulas and complex-time orbits", "tunnel"};
  RunConfig c;
  add_options(app, c);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return config_error;
  }
  return execute(app, c, args);
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace tunnel::cli
