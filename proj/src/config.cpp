#include "degenwave/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace degenwave::config {

namespace {

// Rejects keys outside `allowed` so that a misspelt unit suffix cannot be
// silently replaced by a default.
void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

double number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + "." + key + " is required");
  double v = 0.0;
  read(obj, key, where, v);
  return v;
}

model::DegeneracyProfile parse_profile(const json& p) {
  std::string kind = "power";
  read(p, "kind", "profile", kind);
  if (kind == "power") {
    only_keys(p, "profile", {"kind", "gamma"});
    return model::DegeneracyProfile::power(number(p, "gamma", "profile"));
  }
  if (kind == "oscillating") {
    only_keys(p, "profile", {"kind", "w", "theta"});
    return model::DegeneracyProfile::oscillating(number(p, "w", "profile"), number(p, "theta", "profile"));
  }
  if (kind == "tabulated") {
    only_keys(p, "profile", {"kind", "x", "a", "da"});
    std::vector<double> x, a, da;
    read(p, "x", "profile", x);
    read(p, "a", "profile", a);
    read(p, "da", "profile", da);
    return model::DegeneracyProfile::tabulated(x, a, da);
  }
  throw ConfigError("unknown profile kind '" + kind + "'");
}

json profile_json(const model::DegeneracyProfile& p) {
  switch (p.kind()) {
    case model::ProfileKind::power: return {{"kind", "power"}, {"gamma", p.exponent()}};
    case model::ProfileKind::oscillating:
      return {{"kind", "oscillating"}, {"w", p.exponent()}, {"theta", p.theta()}};
    case model::ProfileKind::tabulated:
      return {{"kind", "tabulated"}, {"x", p.table_x()}, {"a", p.table_a()}, {"da", p.table_da()}};
  }
  return {};
}

}  // namespace

RunConfig parse(const json& doc) {
  only_keys(doc, "config",
            {"profile", "alpha_per_time2", "beta_per_length", "tau_order", "omega_per_time",
             "rho_gain", "regime", "allow_noncoercive", "mesh", "time", "initial", "quadrature",
             "spectrum", "fit", "condition_c"});
  RunConfig c;
  auto& pr = c.problem;
  try {
    if (doc.contains("profile")) pr.profile = parse_profile(doc.at("profile"));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("profile: ") + e.what());
  }
  read(doc, "alpha_per_time2", "config", pr.alpha);
  read(doc, "beta_per_length", "config", pr.beta);
  read(doc, "tau_order", "config", pr.kernel.tau);
  read(doc, "omega_per_time", "config", pr.kernel.omega);
  read(doc, "rho_gain", "config", pr.kernel.rho);
  read(doc, "allow_noncoercive", "config", pr.allow_noncoercive);
  if (doc.contains("regime")) {
    std::string r;
    read(doc, "regime", "config", r);
    if (r == "dirichlet_at_0") {
      pr.regime = model::Regime::dirichlet_at_0;
    } else if (r == "weighted_neumann_at_0") {
      pr.regime = model::Regime::weighted_neumann_at_0;
    } else {
      throw ConfigError("unknown regime '" + r + "'");
    }
  }

  auto& s = c.sim;
  if (doc.contains("mesh")) {
    const auto& m = doc.at("mesh");
    only_keys(m, "mesh", {"n_cells", "grading"});
    read(m, "n_cells", "mesh", s.n_cells);
    read(m, "grading", "mesh", s.grading);
  }
  if (doc.contains("time")) {
    const auto& t = doc.at("time");
    only_keys(t, "time", {"dt_time", "t_final_time", "samples_per_decade"});
    read(t, "dt_time", "time", s.dt);
    read(t, "t_final_time", "time", s.t_final);
    read(t, "samples_per_decade", "time", s.samples_per_decade);
  }
  if (doc.contains("initial")) {
    const auto& i = doc.at("initial");
    only_keys(i, "initial", {"kind", "target", "center_length", "width_length", "u", "ut", "v", "vt"});
    std::string kind = timestep::to_string(s.initial.kind);
    std::string target = timestep::to_string(s.initial.target);
    read(i, "kind", "initial", kind);
    read(i, "target", "initial", target);
    s.initial.kind = timestep::parse_initial_kind(kind);
    s.initial.target = timestep::parse_initial_target(target);
    read(i, "center_length", "initial", s.initial.center);
    read(i, "width_length", "initial", s.initial.width);
    read(i, "u", "initial", s.initial.u);
    read(i, "ut", "initial", s.initial.ut);
    read(i, "v", "initial", s.initial.v);
    read(i, "vt", "initial", s.initial.vt);
  }
  if (doc.contains("quadrature")) {
    const auto& q = doc.at("quadrature");
    only_keys(q, "quadrature", {"nodes", "sigma_min_per_sqrt_time", "sigma_max_per_sqrt_time"});
    read(q, "nodes", "quadrature", s.quad_nodes);
    read(q, "sigma_min_per_sqrt_time", "quadrature", s.sigma_min);
    read(q, "sigma_max_per_sqrt_time", "quadrature", s.sigma_max);
  }
  if (doc.contains("spectrum")) {
    const auto& sp = doc.at("spectrum");
    only_keys(sp, "spectrum", {"k_min", "k_max", "seeds"});
    read(sp, "k_min", "spectrum", c.k_min);
    read(sp, "k_max", "spectrum", c.k_max);
    std::string seeds = "corrected";
    read(sp, "seeds", "spectrum", seeds);
    if (seeds == "corrected") {
      c.seeds = spectrum::SeedVariant::corrected;
    } else if (seeds == "as_stated") {
      c.seeds = spectrum::SeedVariant::as_stated;
    } else {
      throw ConfigError("spectrum.seeds must be 'corrected' or 'as_stated'");
    }
  }
  if (doc.contains("fit")) {
    const auto& f = doc.at("fit");
    only_keys(f, "fit", {"t_a_time", "t_b_time"});
    read(f, "t_a_time", "fit", c.window.t_a);
    read(f, "t_b_time", "fit", c.window.t_b);
  }
  if (doc.contains("condition_c")) {
    const auto& cc = doc.at("condition_c");
    only_keys(cc, "condition_c", {"terms"});
    read(cc, "terms", "condition_c", c.condition_c_terms);
  }

  if (s.n_cells < 2) throw ConfigError("mesh.n_cells must be >= 2");
  if (!(s.t_final > 0.0)) throw ConfigError("time.t_final_time must be positive");
  if (s.dt < 0.0) throw ConfigError("time.dt_time must be >= 0 (0 selects the default)");
  if (s.samples_per_decade < 1) throw ConfigError("time.samples_per_decade must be >= 1");
  if (c.k_min > c.k_max) throw ConfigError("spectrum.k_min exceeds k_max");
  if (c.condition_c_terms < 2) throw ConfigError("condition_c.terms must be >= 2");
  return c;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

RunConfig load(const std::string& path) { return parse(load_json(path)); }

json to_json(const RunConfig& c) {
  const auto& pr = c.problem;
  const auto& s = c.sim;
  json doc;
  doc["profile"] = profile_json(pr.profile);
  doc["alpha_per_time2"] = pr.alpha;
  doc["beta_per_length"] = pr.beta;
  doc["tau_order"] = pr.kernel.tau;
  doc["omega_per_time"] = pr.kernel.omega;
  doc["rho_gain"] = pr.kernel.rho;
  if (pr.regime) doc["regime"] = model::to_string(*pr.regime);
  doc["allow_noncoercive"] = pr.allow_noncoercive;
  doc["mesh"] = {{"n_cells", s.n_cells}, {"grading", s.grading}};
  doc["time"] = {{"dt_time", s.dt}, {"t_final_time", s.t_final}, {"samples_per_decade", s.samples_per_decade}};
  json init = {{"kind", timestep::to_string(s.initial.kind)},
               {"target", timestep::to_string(s.initial.target)},
               {"center_length", s.initial.center},
               {"width_length", s.initial.width}};
  if (s.initial.kind == timestep::InitialKind::custom) {
    init["u"] = s.initial.u;
    init["ut"] = s.initial.ut;
    init["v"] = s.initial.v;
    init["vt"] = s.initial.vt;
  }
  doc["initial"] = init;
  doc["quadrature"] = {{"nodes", s.quad_nodes},
                       {"sigma_min_per_sqrt_time", s.sigma_min},
                       {"sigma_max_per_sqrt_time", s.sigma_max}};
  doc["spectrum"] = {{"k_min", c.k_min},
                     {"k_max", c.k_max},
                     {"seeds", c.seeds == spectrum::SeedVariant::corrected ? "corrected" : "as_stated"}};
  doc["fit"] = {{"t_a_time", c.window.t_a}, {"t_b_time", c.window.t_b}};
  doc["condition_c"] = {{"terms", c.condition_c_terms}};
  return doc;
}

}  // namespace degenwave::config
