#include "holo/config.hpp"

#include "holo/errors.hpp"

#include "toml.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace holo::config {

namespace {

void reject_unknown(const toml::table& t, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : t) {
    if (!allowed.contains(std::string(k.str()))) {
      throw ConfigError("unknown key '" + std::string(k.str()) + "' in " + where);
    }
  }
}

const toml::table* section(const toml::table& root, const std::string& name) {
  const toml::node* n = root.get(name);
  if (n == nullptr) return nullptr;
  if (!n->is_table()) throw ConfigError("'" + name + "' must be a table");
  return n->as_table();
}

double get_real(const toml::table& t, const std::string& where, const char* key, double def) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return def;
  auto v = n->value<double>();
  if (!v || !std::isfinite(*v)) throw ConfigError(where + "." + key + " must be a finite number");
  return *v;
}

std::int64_t get_int(const toml::table& t, const std::string& where, const char* key, std::int64_t def) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return def;
  if (!n->is_integer()) throw ConfigError(where + "." + key + " must be an integer");
  return n->as_integer()->get();
}

std::size_t get_count(const toml::table& t, const std::string& where, const char* key, std::size_t def,
                      std::size_t lo = 1) {
  const std::int64_t v = get_int(t, where, key, static_cast<std::int64_t>(def));
  if (v < static_cast<std::int64_t>(lo)) {
    throw ConfigError(where + "." + key + " must be >= " + std::to_string(lo));
  }
  return static_cast<std::size_t>(v);
}

std::string get_string(const toml::table& t, const std::string& where, const char* key, std::string def) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return def;
  if (!n->is_string()) throw ConfigError(where + "." + key + " must be a string");
  return n->as_string()->get();
}

bool get_bool(const toml::table& t, const std::string& where, const char* key, bool def) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return def;
  if (!n->is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
  return n->as_boolean()->get();
}

std::vector<double> get_reals(const toml::table& t, const std::string& where, const char* key) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return {};
  if (!n->is_array()) throw ConfigError(where + "." + key + " must be an array");
  std::vector<double> out;
  for (const auto& e : *n->as_array()) {
    auto v = e.value<double>();
    if (!v || !std::isfinite(*v)) throw ConfigError(where + "." + key + " must contain finite numbers");
    out.push_back(*v);
  }
  return out;
}

// Wrap module-level parse errors so every config problem surfaces as ConfigError.
template <class F>
auto as_config(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

FieldConfig parse_field(const toml::table& t, const std::string& where, double base_default,
                        bool positive_default) {
  reject_unknown(t, where, {"base", "amplitude", "sigma", "shape", "enforce_positive"});
  FieldConfig f;
  f.base = get_real(t, where, "base", base_default);
  f.amplitude = get_real(t, where, "amplitude", 0.0);
  f.sigma = get_real(t, where, "sigma", 2.0);
  const std::string shape = get_string(t, where, "shape", "fourier");
  f.shape = as_config(where + ".shape", [&] { return fields::parse_mode_shape(shape); });
  f.enforce_positive = get_bool(t, where, "enforce_positive", positive_default);
  if (f.amplitude < 0.0) throw ConfigError(where + ".amplitude must be >= 0");
  if (!(f.sigma > 1.0)) throw ConfigError(where + ".sigma must be > 1");
  return f;
}

toml::table parse_toml(std::string_view text) {
  try {
    return toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
}

}  // namespace

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig parse_config(std::string_view text) {
  const toml::table root = parse_toml(text);
  reject_unknown(root, "config", {"problem", "field", "solver", "gamma", "certificate", "qmc", "run"});
  RunConfig cfg;
  cfg.source = std::string(text);
  cfg.hash = fnv1a_hex(text);

  if (const auto* t = section(root, "problem")) {
    reject_unknown(*t, "problem", {"kind", "n_cells", "s", "eta", "p"});
    const std::string kind = get_string(*t, "problem", "kind", "linear");
    if (kind == "linear") {
      cfg.kind = ProblemKind::Linear;
    } else if (kind == "semilinear") {
      cfg.kind = ProblemKind::Semilinear;
    } else {
      throw ConfigError("problem.kind must be 'linear' or 'semilinear', got '" + kind + "'");
    }
    cfg.n_cells = get_count(*t, "problem", "n_cells", cfg.n_cells, 2);
    cfg.s = get_count(*t, "problem", "s", cfg.s, 0);
    cfg.eta = get_real(*t, "problem", "eta", cfg.eta);
    cfg.p = static_cast<int>(get_int(*t, "problem", "p", cfg.p));
    if (cfg.eta < 0.0) throw ConfigError("problem.eta must be >= 0");
    if (cfg.p != 1 && cfg.p != 3 && cfg.p != 5) throw ConfigError("problem.p must be 1, 3 or 5");
  }

  if (const auto* t = section(root, "field")) {
    reject_unknown(*t, "field", {"A", "B", "C"});
    if (const auto* a = section(*t, "A")) cfg.A = parse_field(*a, "field.A", 1.0, true);
    if (const auto* b = section(*t, "B")) {
      cfg.B = parse_field(*b, "field.B", 0.0, false);
    } else {
      cfg.B.base = 0.0;
    }
    if (const auto* c = section(*t, "C")) {
      if (cfg.kind == ProblemKind::Semilinear) throw ConfigError("field.C is not used by the semilinear problem");
      cfg.C = parse_field(*c, "field.C", 1.0, true);
    }
  } else {
    cfg.B.base = 0.0;
  }

  if (const auto* t = section(root, "solver")) {
    reject_unknown(*t, "solver", {"tol", "max_iters", "polish_iters", "damping", "max_scf"});
    cfg.solver.tol = get_real(*t, "solver", "tol", cfg.solver.tol);
    cfg.solver.max_iters = static_cast<int>(get_count(*t, "solver", "max_iters", 500));
    cfg.solver.polish_iters = static_cast<int>(get_count(*t, "solver", "polish_iters", 2, 0));
    cfg.damping = get_real(*t, "solver", "damping", cfg.damping);
    cfg.max_scf = static_cast<int>(get_count(*t, "solver", "max_scf", 500));
    if (!(cfg.solver.tol >= 1e-13 && cfg.solver.tol < 1.0)) throw ConfigError("solver.tol must lie in [1e-13, 1)");
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) throw ConfigError("solver.damping must lie in (0, 1]");
  }

  if (const auto* t = section(root, "gamma")) {
    reject_unknown(*t, "gamma", {"policy", "param", "target_fraction"});
    const std::string kind = get_string(*t, "gamma", "policy", "power");
    cfg.gamma.kind = as_config("gamma.policy", [&] { return cert::parse_gamma_kind(kind); });
    cfg.gamma.param = get_real(*t, "gamma", "param", cfg.gamma.param);
    cfg.gamma.target_fraction = get_real(*t, "gamma", "target_fraction", cfg.gamma.target_fraction);
    if (!(cfg.gamma.target_fraction > 0.0 && cfg.gamma.target_fraction < 1.0)) {
      throw ConfigError("gamma.target_fraction must lie in (0, 1)");
    }
  }

  if (const auto* t = section(root, "certificate")) {
    reject_unknown(*t, "certificate",
                   {"j_max", "n_max", "fit_points", "sample_budget", "margin", "theta", "fit_radius", "Q"});
    auto& o = cfg.certificate;
    o.j_max = get_count(*t, "certificate", "j_max", o.j_max);
    o.n_max = static_cast<unsigned>(get_count(*t, "certificate", "n_max", o.n_max));
    o.fit_points = get_count(*t, "certificate", "fit_points", o.fit_points);
    o.sample_budget = get_count(*t, "certificate", "sample_budget", o.sample_budget, 4);
    o.margin = get_real(*t, "certificate", "margin", o.margin);
    o.theta = get_real(*t, "certificate", "theta", o.theta);
    o.fit_radius = get_real(*t, "certificate", "fit_radius", o.fit_radius);
    o.Q = get_count(*t, "certificate", "Q", o.Q, 8);
    if (o.n_max > 6) throw ConfigError("certificate.n_max must be <= 6");
    if (!(o.margin >= 1.0)) throw ConfigError("certificate.margin must be >= 1");
    if (!(o.theta > 0.0 && o.theta < 1.0)) throw ConfigError("certificate.theta must lie in (0, 1)");
    if (!(o.fit_radius > 0.0)) throw ConfigError("certificate.fit_radius must be > 0");
  }

  if (const auto* t = section(root, "qmc")) {
    reject_unknown(*t, "qmc", {"N", "R", "s", "functional", "weights", "continuation"});
    auto& q = cfg.qmc;
    if (t->get("N") != nullptr) {
      q.N.clear();
      for (double v : get_reals(*t, "qmc", "N")) {
        if (v < 2 || v != std::floor(v)) throw ConfigError("qmc.N must contain integers >= 2");
        q.N.push_back(static_cast<std::uint32_t>(v));
      }
    }
    q.R = get_count(*t, "qmc", "R", q.R, 8);
    if (t->get("s") != nullptr) q.s = get_count(*t, "qmc", "s", 1);
    q.functional = get_string(*t, "qmc", "functional", q.functional);
    q.weights = get_string(*t, "qmc", "weights", q.weights);
    q.continuation = get_bool(*t, "qmc", "continuation", q.continuation);
    if (q.functional != "lambda" && q.functional != "mean_u") {
      throw ConfigError("qmc.functional must be 'lambda' or 'mean_u'");
    }
    if (q.weights != "certificate" && q.weights != "amplitude") {
      throw ConfigError("qmc.weights must be 'certificate' or 'amplitude'");
    }
  }

  if (const auto* t = section(root, "run")) {
    reject_unknown(*t, "run", {"seed", "threads"});
    const std::int64_t seed = get_int(*t, "run", "seed", 1);
    if (seed < 0) throw ConfigError("run.seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.threads = get_count(*t, "run", "threads", 0, 0);
  }
  cfg.certificate.seed = cfg.seed;

  if (cfg.kind == ProblemKind::Semilinear && cfg.A.amplitude != 0.0) {
    throw ConfigError("semilinear problem requires a non-parametric A (field.A.amplitude = 0)");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

fields::AffineField make_field(const FieldConfig& f, std::size_t s) {
  fields::DecaySpec spec;
  spec.base = f.base;
  spec.amplitude = f.amplitude;
  spec.sigma = f.sigma;
  spec.s = s;
  spec.shape = f.shape;
  spec.require_positive = f.enforce_positive;
  return fields::make_decay_field(spec);
}

ParametricProblem build_problem(const RunConfig& cfg) {
  const fem::Mesh1D mesh = fem::Mesh1D::uniform(cfg.n_cells);
  if (cfg.kind == ProblemKind::Linear) {
    return ParametricProblem::linear(mesh, make_field(cfg.A, cfg.s), make_field(cfg.B, cfg.s),
                                     make_field(cfg.C, cfg.s), cfg.s, cfg.solver);
  }
  fem::SemilinearOptions so;
  so.linear = cfg.solver;
  so.tol = cfg.solver.tol;
  so.damping = cfg.damping;
  so.max_scf = cfg.max_scf;
  return ParametricProblem::semilinear(mesh, make_field(cfg.A, cfg.s), make_field(cfg.B, cfg.s), cfg.eta,
                                       cfg.p, cfg.s, so);
}

GeometryProfile parse_profile(std::string_view text) {
  const toml::table root = parse_toml(text);
  reject_unknown(root, "profile", {"b", "rho", "eps", "p", "form", "samples"});
  GeometryProfile g;
  g.source = std::string(text);
  g.hash = fnv1a_hex(text);
  g.b = get_reals(root, "profile", "b");
  g.rho = get_reals(root, "profile", "rho");
  g.eps = get_real(root, "profile", "eps", g.eps);
  g.p = get_real(root, "profile", "p", g.p);
  g.samples = get_count(root, "profile", "samples", g.samples, 64);
  const std::string form = get_string(root, "profile", "form", "sum");
  if (form != "sum" && form != "max") throw ConfigError("profile.form must be 'sum' or 'max'");
  g.max_form = form == "max";
  if (g.b.empty()) throw ConfigError("profile.b must be a non-empty array");
  if (g.rho.size() > g.b.size()) throw ConfigError("profile.rho is longer than profile.b");
  return g;
}

GeometryProfile load_profile(const std::string& path) { return parse_profile(read_file(path)); }

std::string toml_version() {
  return std::to_string(TOML_LIB_MAJOR) + "." + std::to_string(TOML_LIB_MINOR) + "." + std::to_string(TOML_LIB_PATCH);
}

}  // namespace holo::config
