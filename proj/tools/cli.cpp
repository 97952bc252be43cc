#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "degenwave/artifacts.hpp"
#include "degenwave/config.hpp"

namespace degenwave::cli {

namespace fs = std::filesystem;
using artifacts::CsvWriter;
using artifacts::Manifest;
using config::RunConfig;
using nlohmann::json;

namespace {

void apply_overrides(RunConfig& c, const Options& o) {
  if (o.n_cells) c.sim.n_cells = *o.n_cells;
  if (o.dt) c.sim.dt = *o.dt;
  if (o.t_final) c.sim.t_final = *o.t_final;
  if (o.k_min) c.k_min = *o.k_min;
  if (o.k_max) c.k_max = *o.k_max;
  if (c.sim.n_cells < 2) throw ConfigError("--n-cells must be >= 2");
  if (c.sim.dt < 0.0) throw ConfigError("--dt must be >= 0");
  if (!(c.sim.t_final > 0.0)) throw ConfigError("--t-final must be positive");
  if (c.k_min > c.k_max) throw ConfigError("--k-min exceeds --k-max");
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

// Every file written through here is also listed in the manifest.
void save(Manifest& m, const std::string& dir, const std::string& name, const std::string& text) {
  artifacts::write_text(path_in(dir, name), text);
  m.add_file(name);
}

std::string energy_csv(const timestep::EnergyTrace& trace) {
  CsvWriter w({"t", "E_total", "E_kinetic", "E_potential", "E_coupling", "E_boundary", "E_diffusive",
               "dissipation_rate"});
  for (const auto& s : trace.samples) {
    w.row({s.t, s.split.total(), s.split.kinetic, s.split.potential, s.split.coupling, s.split.boundary,
           s.split.diffusive, s.dissipation});
  }
  return w.str();
}

std::string energy_svg(const std::vector<double>& t, const std::vector<double>& e,
                       const std::vector<double>& dissipation) {
  artifacts::Panel p{"energy", "t", "E", true, true, {{"E_total", t, e}}};
  artifacts::Panel q{"dissipation rate", "t", "-dE/dt", true, true, {{"dissipation", t, dissipation}}};
  return artifacts::render_svg({p, q});
}

json trace_json(const timestep::EnergyTrace& trace) {
  return {{"dt_time", trace.dt},
          {"steps", trace.steps},
          {"initial_energy", trace.initial_energy},
          {"final_energy", trace.samples.empty() ? 0.0 : trace.samples.back().split.total()},
          {"max_step_increase", trace.max_step_increase}};
}

json report_json(const decay::DecayReport& r) {
  return {{"s_fit", r.s_fit},
          {"predicted", r.predicted},
          {"relative_deviation", std::abs(r.s_fit - r.predicted) / r.predicted},
          {"t_a_time", r.t_a},
          {"t_b_time", r.t_b},
          {"r_squared", r.r_squared},
          {"points", r.points},
          {"tau", r.tau},
          {"spectral_trend", std::isfinite(r.spectral_trend) ? json(r.spectral_trend) : json(nullptr)},
          {"quadrature_error", r.quadrature_error},
          {"monotone", r.monotone},
          {"warnings", r.warnings}};
}

json optimality_json(const decay::OptimalityReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) rows.push_back({{"k", row.k}, {"re", row.re}, {"trend", row.trend}});
  return {{"flag", r.flag},       {"level", r.level},         {"spread", r.spread},
          {"bounded_nonzero", r.bounded_nonzero}, {"overshoot", r.overshoot}, {"notes", r.notes},
          {"rows", rows}};
}

json matches_json(const std::vector<decay::CandidateMatch>& ms) {
  json out = json::array();
  for (const auto& m : ms) {
    out.push_back({{"label", m.label}, {"value", m.value}, {"relative_error", m.relative_error},
                   {"within_15_percent", m.within}});
  }
  return out;
}

void print_violations(const model::ValidationResult& v, std::ostream& out) {
  for (const auto& item : v.items) {
    out << "  " << (item.severity == model::Severity::error ? "ERROR  " : "warning") << " [" << item.code
        << "] " << item.message << "\n";
  }
}

// Config rejected by validate: prints the reasons and returns true.
bool rejected(const RunConfig& c, std::ostream& err) {
  const auto v = model::validate(c.problem);
  if (v.ok()) return false;
  err << "config violates the model rules:\n";
  print_violations(v, err);
  return true;
}

void require_power(const RunConfig& c) {
  if (c.problem.profile.kind() != model::ProfileKind::power) {
    throw DomainError("the spectrum needs a power profile a = x^gamma");
  }
}

spectrum::SpectrumResult spectrum_for(const RunConfig& c, int threads = 0) {
  require_power(c);
  spectrum::SpectrumOptions opts;
  opts.threads = threads;
  opts.seeds = c.seeds;
  return spectrum::compute_spectrum(c.problem, c.k_min, c.k_max, opts);
}

struct FitInput {
  std::vector<double> t, e, dissipation;
  double quadrature_error = 0.0;
};

FitInput from_trace(const timestep::EnergyTrace& trace) {
  FitInput in;
  for (const auto& s : trace.samples) {
    in.t.push_back(s.t);
    in.e.push_back(s.split.total());
    in.dissipation.push_back(s.dissipation);
  }
  in.quadrature_error = trace.quadrature_error;
  return in;
}

struct FitOutcome {
  decay::DecayReport report;
  std::optional<decay::OptimalityReport> optimality;
  std::string spectrum_note;
};

// Fit, attach the spectral trend when the profile allows it, and write
// report.json (plus decay.svg). Throws on fit failure.
FitOutcome fit_and_report(const RunConfig& c, const FitInput& in, const std::string& dir, bool svg, Manifest& m,
                          int spectrum_threads) {
  FitOutcome out;
  out.report = decay::fit_decay_exponent(in.t, in.e, c.problem.kernel.tau, c.window);
  out.report.quadrature_error = in.quadrature_error;
  try {
    const auto spec = spectrum_for(c, spectrum_threads);
    out.optimality = decay::optimality_report(spec, c.problem.kernel.tau, &out.report);
    out.report.spectral_trend = out.optimality->level;
  } catch (const Error& e) {
    out.spectrum_note = e.what();
  }
  json doc = report_json(out.report);
  if (out.optimality) doc["optimality"] = optimality_json(*out.optimality);
  if (!out.spectrum_note.empty()) doc["spectrum_note"] = out.spectrum_note;
  save(m, dir, "report.json", doc.dump(2) + "\n");

  if (svg) {
    std::vector<double> ft, fe;
    // fitted line through the window centroid
    double sx = 0, sy = 0;
    int n = 0;
    for (std::size_t i = 0; i < in.t.size(); ++i) {
      if (in.t[i] < c.window.t_a || in.t[i] > c.window.t_b || !(in.e[i] > 0)) continue;
      sx += std::log(in.t[i]);
      sy += std::log(in.e[i]);
      ++n;
    }
    if (n > 0) {
      sx /= n;
      sy /= n;
      for (double t : {c.window.t_a, c.window.t_b}) {
        ft.push_back(t);
        fe.push_back(std::exp(sy - out.report.s_fit * (std::log(t) - sx)));
      }
    }
    std::ostringstream label;
    label << "fit s = " << std::setprecision(4) << out.report.s_fit;
    artifacts::Panel energy{"energy (log-log)", "t", "E", true, true, {{"E_total", in.t, in.e}, {label.str(), ft, fe}}};
    artifacts::Panel trend{"spectral trend", "k", "|Re lambda_2k| k^(3-tau)", false, false, {}};
    if (out.optimality) {
      std::vector<double> k, v;
      for (const auto& r : out.optimality->rows) {
        k.push_back(r.k);
        v.push_back(r.trend);
      }
      trend.series.push_back({"family 2", k, v});
    }
    save(m, dir, "decay.svg", artifacts::render_svg({energy, trend}));
  }
  return out;
}

int threads_from_env() {
  if (const char* s = std::getenv("DEGENWAVE_THREADS")) {
    try {
      const int n = std::stoi(s);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---- sweep grid ------------------------------------------------------------

struct Axis {
  std::string name;   // as written on the command line
  std::string path;   // JSON pointer into the config document
  std::vector<json> values;
};

std::string pointer_for(const std::string& key) {
  static const std::map<std::string, std::string> alias = {
      {"tau", "/tau_order"},         {"alpha", "/alpha_per_time2"}, {"beta", "/beta_per_length"},
      {"omega", "/omega_per_time"},  {"rho", "/rho_gain"},          {"gamma", "/profile/gamma"},
      {"n_cells", "/mesh/n_cells"},  {"N", "/mesh/n_cells"},        {"dt", "/time/dt_time"},
      {"t_final", "/time/t_final_time"}};
  if (auto it = alias.find(key); it != alias.end()) return it->second;
  std::string p = "/" + key;
  std::replace(p.begin(), p.end(), '.', '/');
  return p;
}

json grid_value(const std::string& s) {
  try {
    std::size_t used = 0;
    if (s.find_first_of(".eE") == std::string::npos) {
      const long long i = std::stoll(s, &used);
      if (used == s.size()) return i;
    }
    const double d = std::stod(s, &used);
    if (used == s.size()) return d;
  } catch (const std::exception&) {
  }
  if (s == "true") return true;
  if (s == "false") return false;
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur.erase(0, cur.find_first_not_of(" \t"));
    cur.erase(cur.find_last_not_of(" \t") + 1);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::vector<Axis> parse_grid(const std::string& grid) {
  std::vector<Axis> axes;
  for (const auto& part : split(grid, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ConfigError("grid entry '" + part + "' lacks '='");
    Axis a;
    a.name = part.substr(0, eq);
    a.name.erase(a.name.find_last_not_of(" \t") + 1);
    a.path = pointer_for(a.name);
    for (const auto& v : split(part.substr(eq + 1), ',')) a.values.push_back(grid_value(v));
    if (a.values.empty()) throw ConfigError("grid entry '" + a.name + "' has no values");
    axes.push_back(a);
  }
  if (axes.empty()) throw ConfigError("--grid is empty");
  return axes;
}

struct CellResult {
  std::vector<json> params;
  std::string status = "failed";
  decay::DecayReport report;
  double trend = std::numeric_limits<double>::quiet_NaN();
  std::string message;
};

CellResult run_cell(const json& doc, const Options& o, const std::string& dir) {
  CellResult r;
  try {
    RunConfig c = config::parse(doc);
    apply_overrides(c, o);
    fs::create_directories(dir);
    Manifest m(dir, config::to_json(c));
    std::ostringstream sink;
    if (rejected(c, sink)) throw ConfigError(sink.str());
    const auto trace = timestep::simulate(c.problem, c.sim);
    save(m, dir, "energy.csv", energy_csv(trace));
    m.set("run", trace_json(trace));
    m.set("quadrature_error", trace.quadrature_error);
    const auto fit = fit_and_report(c, from_trace(trace), dir, o.svg, m, 1);
    r.report = fit.report;
    if (fit.optimality) r.trend = fit.optimality->level;
    if (!fit.spectrum_note.empty()) r.message = "spectrum: " + fit.spectrum_note;
    m.write();
    r.status = "ok";
  } catch (const std::exception& e) {
    std::istringstream words(e.what());
    for (std::string w; words >> w;) r.message += (r.message.empty() ? "" : " ") + w;
  }
  return r;
}

}  // namespace

// ---- commands --------------------------------------------------------------

int cmd_check(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig c;
  try {
    c = config::load(o.config);
    apply_overrides(c, o);
  } catch (const ConfigError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParseError;
  }
  const auto& p = c.problem;
  const auto v = model::validate(p);
  bool violated = !v.ok();

  auto row = [&](const std::string& k, const std::string& val) {
    out << "  " << std::left << std::setw(28) << k << val << "\n";
  };
  auto num = [](double x) {
    std::ostringstream s;
    s << std::setprecision(8) << x;
    return s.str();
  };
  out << "configuration check: " << o.config << "\n";
  row("profile", p.profile.kind() == model::ProfileKind::power ? "x^" + num(p.profile.exponent())
                                                               : std::string(p.profile.kind() == model::ProfileKind::oscillating
                                                                                 ? "oscillating"
                                                                                 : "tabulated"));
  row("alpha, beta", num(p.alpha) + ", " + num(p.beta));
  row("tau, omega, rho", num(p.kernel.tau) + ", " + num(p.kernel.omega) + ", " + num(p.kernel.rho));
  row("m_a", num(v.m_a));
  row("regime", model::to_string(p.effective_regime()));
  try {
    row("Poincare constant C*", num(model::poincare_constant(p.profile)));
  } catch (const Error&) {
    row("Poincare constant C*", "divergent (m_a >= 1)");
  }
  row("coercivity |alpha| c", num(std::abs(p.alpha) * v.coercivity_constant) + " (must be < 1)");

  const double gamma = p.profile.exponent();
  try {
    const auto cc = model::check_condition_C(p.alpha, gamma, c.condition_c_terms);
    std::string label = "condition (C), K = " + std::to_string(c.condition_c_terms);
    if (p.profile.kind() != model::ProfileKind::power) label += " (leading exponent)";
    if (cc.exact) {
      row(label, "satisfied");
    } else {
      violated = true;
      row(label, "VIOLATED at " + std::to_string(cc.violations.size()) + " pair(s)");
      const std::size_t shown = std::min<std::size_t>(cc.violations.size(), 10);
      for (std::size_t i = 0; i < shown; ++i) {
        const auto& pr = cc.violations[i];
        out << "    (k,m) = (" << pr.k << "," << pr.m << ")  alpha_km = " << num(pr.alpha_km) << "\n";
      }
      if (shown < cc.violations.size()) out << "    ... " << cc.violations.size() - shown << " more\n";
    }
  } catch (const Error& e) {
    violated = true;
    row("condition (C)", std::string("not evaluated: ") + e.what());
  }
  if (!v.items.empty()) {
    out << "  rule findings:\n";
    print_violations(v, out);
  }
  out << "result: " << (violated ? "VIOLATIONS" : "ok") << "\n";
  return violated ? kViolation : kOk;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig c;
  try {
    c = config::load(o.config);
    apply_overrides(c, o);
  } catch (const ConfigError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParseError;
  }
  if (rejected(c, err)) return kViolation;
  try {
    fs::create_directories(o.out);
    Manifest m(o.out, config::to_json(c));
    timestep::EnergyTrace trace;
    std::string failure;
    try {
      trace = timestep::simulate(c.problem, c.sim);
    } catch (const timestep::BlowUpError& e) {
      trace = e.partial;
      failure = e.what();
    }
    save(m, o.out, "energy.csv", energy_csv(trace));
    if (o.svg) {
      const auto in = from_trace(trace);
      save(m, o.out, "energy.svg", energy_svg(in.t, in.e, in.dissipation));
    }
    m.set("run", trace_json(trace));
    m.set("quadrature_error", trace.quadrature_error);
    m.set("status", failure.empty() ? "ok" : "failed");
    if (!failure.empty()) m.set("failure", failure);
    m.write();
    if (!failure.empty()) {
      err << "step failure: " << failure << "\n";
      return kFailure;
    }
    out << "simulated to t = " << trace.samples.back().t << " in " << trace.steps << " steps (dt = " << trace.dt
        << ")\nE(0) = " << trace.initial_energy << ", E(T) = " << trace.samples.back().split.total()
        << ", quadrature error = " << trace.quadrature_error << "\nwrote " << o.out << "\n";
    return kOk;
  } catch (const std::exception& e) {
    err << "simulate failed: " << e.what() << "\n";
    return kFailure;
  }
}

int cmd_spectrum(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig c;
  try {
    c = config::load(o.config);
    apply_overrides(c, o);
  } catch (const ConfigError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParseError;
  }
  if (rejected(c, err)) return kViolation;
  spectrum::SpectrumResult res;
  try {
    res = spectrum_for(c);
  } catch (const spectrum::CountMismatchError& e) {
    err << "count mismatch in window Im in (" << e.im_lo << ", " << e.im_hi << "): argument principle counts "
        << e.counted << ", refinement found " << e.found << "\n"
        << e.what() << "\n";
    return kCountMismatch;
  } catch (const DomainError& e) {
    err << "spectrum unavailable: " << e.what() << "\n";
    return kViolation;
  } catch (const std::exception& e) {
    err << "spectrum failed: " << e.what() << "\n";
    return kFailure;
  }
  try {
    fs::create_directories(o.out);
    Manifest m(o.out, config::to_json(c));
    CsvWriter sc({"family", "k", "re", "im", "residual", "seed_re", "seed_im"});
    for (const auto& e : res.roots) {
      sc.row({e.family, e.k, e.lambda.real(), e.lambda.imag(), e.residual, e.seed.real(), e.seed.imag()});
    }
    save(m, o.out, "spectrum.csv", sc.str());

    const double tau = c.problem.kernel.tau;
    const auto t2 = decay::trend_summary(res, 2, tau);
    const auto t1 = decay::trend_summary(res, 1, tau);
    CsvWriter tc({"k", "re", "trend"});
    for (const auto& r : t2.rows) tc.row({r.k, r.re, r.trend});
    save(m, o.out, "trend.csv", tc.str());

    CsvWriter wc({"k", "im_lo", "im_hi", "counted", "found"});
    for (const auto& w : res.windows) wc.row({w.k, w.rect.im_lo, w.rect.im_hi, w.counted, w.found});
    save(m, o.out, "windows.csv", wc.str());

    json summary;
    summary["family2"] = {{"exponent", t2.exponent}, {"level", t2.level}, {"spread", t2.spread}};
    summary["family1"] = {{"exponent", t1.exponent}, {"level", t1.level}, {"spread", t1.spread}};
    if (tau < 1.0) {
      summary["family2"]["candidates"] = matches_json(decay::match_candidates(t2.level, spectrum::beta2_candidates(c.problem)));
      summary["family1"]["candidates"] = matches_json(decay::match_candidates(t1.level, spectrum::beta1_candidates(c.problem)));
    } else {
      summary["family2"]["candidates"] =
          matches_json(decay::match_candidates(t2.level, {{"upsilon", spectrum::upsilon(c.problem)}}));
    }
    summary["optimality"] = optimality_json(decay::optimality_report(res, tau));
    save(m, o.out, "spectrum_report.json", summary.dump(2) + "\n");
    m.write();

    out << "roots: " << res.roots.size() << " in " << res.windows.size() << " windows (all counts matched)\n";
    out << "family 2: |Re lambda| k^" << t2.exponent << " level " << t2.level << ", spread " << t2.spread << "\n";
    out << "family 1: |Re lambda| k^" << t1.exponent << " level " << t1.level << ", spread " << t1.spread << "\n";
    out << "wrote " << o.out << "\n";
    return kOk;
  } catch (const std::exception& e) {
    err << "spectrum output failed: " << e.what() << "\n";
    return kFailure;
  }
}

int cmd_fit(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig c;
  try {
    c = config::load(o.config);
    apply_overrides(c, o);
  } catch (const ConfigError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParseError;
  }
  try {
    fs::create_directories(o.out);
    Manifest m(o.out, config::to_json(c));
    FitInput in;
    if (!o.trace.empty()) {
      const auto table = artifacts::read_csv(o.trace);
      in.t = table.numbers("t");
      in.e = table.numbers("E_total");
      m.set("trace", {{"path", o.trace}, {"sha256", artifacts::sha256_file(o.trace)}});
      // the run that produced the trace records its quadrature error next to it
      const auto sibling = fs::path(o.trace).parent_path() / "manifest.json";
      if (fs::exists(sibling)) {
        try {
          in.quadrature_error = json::parse(std::ifstream(sibling)).value("quadrature_error", 0.0);
        } catch (const json::exception&) {
        }
      }
    } else {
      if (rejected(c, err)) return kViolation;
      const auto trace = timestep::simulate(c.problem, c.sim);
      save(m, o.out, "energy.csv", energy_csv(trace));
      m.set("run", trace_json(trace));
      in = from_trace(trace);
    }
    m.set("quadrature_error", in.quadrature_error);
    const auto fit = fit_and_report(c, in, o.out, o.svg, m, 0);
    m.write();
    const auto& r = fit.report;
    out << "s_fit = " << r.s_fit << " over [" << r.t_a << ", " << r.t_b << "] (" << r.points
        << " points, R^2 = " << r.r_squared << ")\npredicted 2/(3 - tau) = " << r.predicted
        << ", quadrature error = " << r.quadrature_error << "\n";
    if (fit.optimality) out << decay::to_text(*fit.optimality);
    for (const auto& w : r.warnings) out << "warning: " << w << "\n";
    out << "wrote " << o.out << "\n";
    return kOk;
  } catch (const std::exception& e) {
    err << "fit failed: " << e.what() << "\n";
    return kFailure;
  }
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  json base;
  std::vector<Axis> axes;
  try {
    base = config::load_json(o.config);
    axes = parse_grid(o.grid);
    config::parse(base);  // the template itself must parse
  } catch (const ConfigError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParseError;
  }

  std::size_t total = 1;
  for (const auto& a : axes) total *= a.values.size();
  std::vector<json> docs;
  std::vector<std::vector<json>> params;
  for (std::size_t i = 0; i < total; ++i) {
    // mixed radix, last axis varies fastest
    json d = base;
    std::vector<json> p(axes.size());
    std::size_t rest = i;
    for (std::size_t a = axes.size(); a-- > 0;) {
      p[a] = axes[a].values[rest % axes[a].values.size()];
      rest /= axes[a].values.size();
      d[json::json_pointer(axes[a].path)] = p[a];
    }
    docs.push_back(d);
    params.push_back(p);
  }

  std::vector<CellResult> results(docs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < docs.size();) {
      char name[32];
      std::snprintf(name, sizeof name, "cell_%03zu", i);
      results[i] = run_cell(docs[i], o, path_in(o.out, name));
      results[i].params = params[i];
      std::lock_guard<std::mutex> lock(log);
      out << name << ": " << results[i].status;
      if (results[i].status == "ok") out << ", s_fit = " << results[i].report.s_fit;
      else out << " (" << results[i].message << ")";
      out << "\n";
    }
  };
  const int nthreads = std::min<int>(threads_from_env(), static_cast<int>(docs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<std::string> header = {"cell"};
  for (const auto& a : axes) header.push_back(a.name);
  for (const char* h : {"status", "s_fit", "predicted", "r_squared", "trend_constant", "quadrature_error", "message"}) {
    header.push_back(h);
  }
  CsvWriter w(header);
  int failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    std::vector<json> row = {static_cast<long long>(i)};
    for (const auto& p : r.params) row.push_back(p);
    const bool ok = r.status == "ok";
    failed += ok ? 0 : 1;
    row.push_back(r.status);
    row.push_back(ok ? json(r.report.s_fit) : json(nullptr));
    row.push_back(ok ? json(r.report.predicted) : json(nullptr));
    row.push_back(ok ? json(r.report.r_squared) : json(nullptr));
    row.push_back(ok && std::isfinite(r.trend) ? json(r.trend) : json(nullptr));
    row.push_back(ok ? json(r.report.quadrature_error) : json(nullptr));
    row.push_back(r.message);
    w.row(row);
  }
  try {
    fs::create_directories(o.out);
    w.save(path_in(o.out, "sweep.csv"));
  } catch (const std::exception& e) {
    err << "cannot write sweep.csv: " << e.what() << "\n";
    return kFailure;
  }
  out << results.size() << " cells, " << failed << " failed; wrote " << path_in(o.out, "sweep.csv") << "\n";
  return failed ? kFailure : kOk;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"degenwave: degenerate wave system with fractional boundary damping"};
  app.require_subcommand(1);
  Options o;
  int n_cells = 0, k_min = 0, k_max = 0;
  double dt = 0.0, t_final = 0.0;
  std::vector<CLI::Option*> given;  // n_cells, dt, t_final, k_min, k_max per subcommand

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    given.push_back(sub->add_option("--n-cells", n_cells, "mesh cells (overrides mesh.n_cells)"));
    given.push_back(sub->add_option("--dt", dt, "time step (overrides time.dt_time)"));
    given.push_back(sub->add_option("--t-final", t_final, "final time (overrides time.t_final_time)"));
    given.push_back(sub->add_option("--k-min", k_min, "smallest spectral index"));
    given.push_back(sub->add_option("--k-max", k_max, "largest spectral index"));
    sub->add_flag("--svg", o.svg, "also write SVG plots");
  };
  auto* check = app.add_subcommand("check", "validate a configuration");
  auto* simulate = app.add_subcommand("simulate", "time-step and write energy.csv");
  auto* spec = app.add_subcommand("spectrum", "compute eigenvalues and write spectrum.csv");
  auto* fit = app.add_subcommand("fit", "fit the energy decay exponent");
  auto* sweep = app.add_subcommand("sweep", "run a parameter grid concurrently");
  for (auto* s : {check, simulate, spec, fit, sweep}) common(s);
  fit->add_option("--trace", o.trace, "existing energy.csv to fit instead of simulating")->check(CLI::ExistingFile);
  sweep->add_option("--grid", o.grid, "e.g. \"tau=0.3,0.5,0.7;alpha=0.1,0.2\"")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kParseError;
  }
  for (std::size_t i = 0; i < given.size(); i += 5) {
    if (given[i]->count()) o.n_cells = n_cells;
    if (given[i + 1]->count()) o.dt = dt;
    if (given[i + 2]->count()) o.t_final = t_final;
    if (given[i + 3]->count()) o.k_min = k_min;
    if (given[i + 4]->count()) o.k_max = k_max;
  }

  if (check->parsed()) return cmd_check(o, out, err);
  if (simulate->parsed()) return cmd_simulate(o, out, err);
  if (spec->parsed()) return cmd_spectrum(o, out, err);
  if (fit->parsed()) return cmd_fit(o, out, err);
  return cmd_sweep(o, out, err);
}

}  // namespace degenwave::cli
