#include "holo/cli.hpp"

#include "holo/certificate.hpp"
#include "holo/combinatorics.hpp"
#include "holo/config.hpp"
#include "holo/derivatives.hpp"
#include "holo/errors.hpp"
#include "holo/geometry.hpp"
#include "holo/qmc.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <boost/version.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace holo::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(text);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_reals(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, ',')) {
    const std::string t = trim(part);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != t.size() || !std::isfinite(v)) {
      throw ConfigError(what + ": '" + t + "' is not a finite number");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<std::uint32_t> parse_sizes(const std::string& text, const std::string& what) {
  std::vector<std::uint32_t> out;
  for (double v : parse_reals(text, what)) {
    if (v < 1 || v != std::floor(v) || v > 4294967295.0) throw ConfigError(what + " must contain positive integers");
    out.push_back(static_cast<std::uint32_t>(v));
  }
  return out;
}

std::string join_y(std::span<const double> y) {
  std::string s;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (i > 0) s += ';';
    s += num(y[i]);
  }
  return s;
}

// Collects one command's output and writes it to a file or the console.
struct Output {
  std::string path;  ///< empty: console
  std::ostringstream buf;

  void flush(std::ostream& console, bool append = false) const {
    if (path.empty()) {
      console << buf.str();
      return;
    }
    std::error_code ec;
    if (const auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir, ec);
    std::ofstream f(path, append ? std::ios::app | std::ios::binary : std::ios::trunc | std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f << buf.str();
  }
};

json library_versions() {
  return {{"holo_evp", kVersion},
          {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) +
                        "." + std::to_string(BOOST_VERSION % 100)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"tomlplusplus", config::toml_version()},
          {"cli11", CLI11_VERSION},
          {"compiler", __VERSION__}};
}

// <out>.manifest.json beside every written output.
void write_manifest(const std::string& out_path, const std::string& command, const std::vector<std::string>& args,
                    const std::string& hash, std::uint64_t seed) {
  if (out_path.empty()) return;
  json m;
  m["tool"] = "holo_evp";
  m["command"] = command;
  m["args"] = args;
  m["config_hash"] = hash;
  m["seed"] = seed;
  m["outputs"] = {fs::path(out_path).filename().string()};
  m["versions"] = library_versions();
  std::ofstream f(out_path + ".manifest.json", std::ios::trunc | std::ios::binary);
  if (!f) throw ConfigError("cannot write manifest beside '" + out_path + "'");
  f << m.dump(2) << '\n';
}

struct Context {
  std::vector<std::string> args;
  std::ostream& out;
  std::ostream& err;
};

// ---- alpha ------------------------------------------------------------------

struct AlphaArgs {
  std::string rule = "quad";
  unsigned n_max = 8;
  std::string out;
};

int cmd_alpha(const AlphaArgs& a, Context& ctx) {
  const auto rule = combinatorics::parse_alpha_rule(a.rule);
  if (a.n_max < 1 || a.n_max > combinatorics::kMaxIndex) throw ConfigError("--n-max must lie in [1, 64]");
  const std::string hash = config::fnv1a_hex("alpha rule=" + std::string(combinatorics::to_string(rule)) +
                                             " n_max=" + std::to_string(a.n_max));
  const auto seq = combinatorics::alpha_sequence(rule, a.n_max);
  Output o{a.out, {}};
  o.buf << "config_hash,n,alpha,ratio_exact,ratio\n";
  for (unsigned n = 1; n <= a.n_max; ++n) {
    o.buf << hash << ',' << n << ',' << seq[n].str() << ',';
    if (n < combinatorics::kMaxIndex) {
      const auto r = combinatorics::epsilon_ratio(n, rule);
      o.buf << numerator(r).str() << '/' << denominator(r).str() << ',' << num(r.convert_to<double>());
    } else {
      o.buf << ',';
    }
    o.buf << '\n';
  }
  o.flush(ctx.out);
  write_manifest(a.out, "alpha", ctx.args, hash, 0);
  return 0;
}

// ---- geometry check -----------------------------------------------------------

struct GeometryArgs {
  std::string profile;
  std::string out;
};

int cmd_geometry(const GeometryArgs& a, Context& ctx) {
  const config::GeometryProfile g = config::load_profile(a.profile);
  geometry::AdmissibleProfile prof{g.b, g.eps, g.p};
  prof.validate();
  std::vector<double> rho = g.rho;
  // Without explicit rho: spread the budget evenly, b_j (rho_j - 1) = eps / s.
  for (std::size_t j = rho.size(); j < g.b.size(); ++j) {
    rho.push_back(1.0 + g.eps / (static_cast<double>(g.b.size()) * g.b[j]));
  }
  const auto form = g.max_form ? geometry::AdmissibilityForm::Max : geometry::AdmissibilityForm::Sum;
  const bool admissible = geometry::is_admissible(rho, prof, form);
  Output o{a.out, {}};
  o.buf << "config_hash,j,b_j,rho_j,R_minor,R_major,radius,included\n";
  bool all = true;
  for (std::size_t j = 0; j < g.b.size(); ++j) {
    const double radius = g.eps / g.b[j];
    const auto inc =
        geometry::ellipse_in_stadium(geometry::BernsteinEllipse(rho[j]), geometry::Stadium(radius), g.samples);
    all = all && inc.included();
    o.buf << g.hash << ',' << j + 1 << ',' << num(g.b[j]) << ',' << num(rho[j]) << ','
          << num(geometry::semi_minor_length(rho[j])) << ',' << num(geometry::semi_major_length(rho[j])) << ','
          << num(radius) << ',' << (inc.included() ? "true" : "false") << '\n';
  }
  o.flush(ctx.out);
  ctx.err << "admissible=" << (admissible ? "true" : "false") << " budget="
          << num(geometry::admissibility_budget(rho, prof, form)) << " all_included=" << (all ? "true" : "false")
          << '\n';
  write_manifest(a.out, "geometry", ctx.args, g.hash, 0);
  return 0;
}

// ---- solve --------------------------------------------------------------------

struct SolveArgs {
  std::string config;
  std::string problem;
  std::string y;
  std::string dump_u;
  std::string out;
};

int cmd_solve(const SolveArgs& a, Context& ctx) {
  const config::RunConfig cfg = config::load_config(a.config);
  if (!a.problem.empty()) {
    const std::string kind = cfg.kind == ProblemKind::Linear ? "linear" : "semilinear";
    if (a.problem != "linear" && a.problem != "semilinear") {
      throw ConfigError("--problem must be 'linear' or 'semilinear'");
    }
    if (a.problem != kind) throw ConfigError("--problem " + a.problem + " contradicts problem.kind = " + kind);
  }
  const ParametricProblem problem = config::build_problem(cfg);
  const std::vector<double> y = parse_reals(a.y, "--y");
  const CVector z(y.begin(), y.end());
  const fem::GroundPair gp = problem.solve(z);
  std::string gap;
  if (problem.kind() == ProblemKind::Linear) gap = num(problem.second_eigenvalue(z, gp) - gp.lambda.real());

  Output o{a.out, {}};
  o.buf << "config_hash,kind,y,lambda,lambda_im,residual,hnorm,norm_check,iterations,gap\n";
  o.buf << cfg.hash << ',' << (problem.kind() == ProblemKind::Linear ? "linear" : "semilinear") << ','
        << join_y(y) << ',' << num(gp.lambda.real()) << ',' << num(gp.lambda.imag()) << ',' << num(gp.residual)
        << ',' << num(problem.hnorm(gp.u)) << ',' << num(gp.norm_check) << ',' << gp.iterations << ',' << gap
        << '\n';
  o.flush(ctx.out);
  write_manifest(a.out, "solve", ctx.args, cfg.hash, cfg.seed);

  if (!a.dump_u.empty()) {
    Output d{a.dump_u, {}};
    d.buf << "config_hash,x,u\n";
    const auto& nodes = problem.mesh().nodes();
    d.buf << cfg.hash << ',' << num(nodes.front()) << ",0\n";
    for (std::size_t i = 0; i < gp.u.size(); ++i) {
      d.buf << cfg.hash << ',' << num(nodes[i + 1]) << ',' << num(gp.u[i].real()) << '\n';
    }
    d.buf << cfg.hash << ',' << num(nodes.back()) << ",0\n";
    d.flush(ctx.out);
    write_manifest(a.dump_u, "solve-u", ctx.args, cfg.hash, cfg.seed);
  }
  return 0;
}

// ---- derivs -------------------------------------------------------------------

struct DerivArgs {
  std::string config;
  std::size_t j = 1;
  unsigned n_max = 4;
  std::string method = "contour";
  std::string y;
  double radius = 0.25;
  double h = 0.05;
  std::size_t Q = 64;
  std::string out;
};

int cmd_derivs(const DerivArgs& a, Context& ctx) {
  const config::RunConfig cfg = config::load_config(a.config);
  const ParametricProblem problem = config::build_problem(cfg);
  if (a.j < 1 || a.j > problem.s()) {
    throw ConfigError("--j must lie in [1, " + std::to_string(problem.s()) + "]");
  }
  std::vector<double> y = parse_reals(a.y, "--y");
  if (y.size() > problem.s()) throw ConfigError("--y is longer than the truncation s");
  y.resize(problem.s(), 0.0);
  const std::size_t j = a.j - 1;
  const deriv::Method method = deriv::parse_method(a.method);

  std::vector<deriv::Entry> entries;
  double closure = std::numeric_limits<double>::quiet_NaN();
  switch (method) {
    case deriv::Method::FD:
      entries = deriv::deriv_fd(problem, y, j, a.n_max, {a.h});
      break;
    case deriv::Method::Chebyshev:
      entries = deriv::deriv_cheb(problem, y, j, a.n_max);
      break;
    case deriv::Method::Contour: {
      const auto res = deriv::deriv_contour(problem, y, {j, a.radius, a.Q, 1}, a.n_max);
      closure = res.loop_closure;
      for (const auto& e : res.entries) {
        if (e.nu.order() > 0) entries.push_back(e);
      }
      break;
    }
  }
  Output o{a.out, {}};
  o.buf << "config_hash,method,j,n,y,d_lambda,d_lambda_im,hnorm_du,est_error,est_error_u,loop_closure\n";
  for (const auto& e : entries) {
    o.buf << cfg.hash << ',' << deriv::to_string(e.method) << ',' << a.j << ',' << e.nu.order() << ','
          << join_y(y) << ',' << num(e.d_lambda.real()) << ',' << num(e.d_lambda.imag()) << ','
          << num(e.hnorm_du) << ',' << num(e.est_error) << ',' << num(e.est_error_u) << ','
          << (std::isnan(closure) ? std::string() : num(closure)) << '\n';
  }
  o.flush(ctx.out);
  write_manifest(a.out, "derivs", ctx.args, cfg.hash, cfg.seed);
  return 0;
}

// ---- certify / validate ---------------------------------------------------------

struct CertifyArgs {
  std::string config;
  std::string out;
};

int cmd_certify(const CertifyArgs& a, Context& ctx) {
  const config::RunConfig cfg = config::load_config(a.config);
  const ParametricProblem problem = config::build_problem(cfg);
  const cert::HoloCertificate c = cert::build_certificate(problem, cfg.gamma, cfg.certificate);
  json j = cert::to_json(c);
  j["config_hash"] = cfg.hash;
  j["config_toml"] = cfg.source;
  Output o{a.out, {}};
  o.buf << j.dump(2) << '\n';
  o.flush(ctx.out);
  if (!a.out.empty()) {
    ctx.err << "certificate: rule=" << combinatorics::to_string(c.rule) << " zeta=" << num(c.zeta)
            << " Gamma=" << num(c.Gamma) << " cap=" << num(c.Gamma_cap) << " M_lambda=" << num(c.M_lambda)
            << " M_u=" << num(c.M_u) << '\n';
  }
  write_manifest(a.out, "certify", ctx.args, cfg.hash, cfg.seed);
  return 0;
}

struct ValidateArgs {
  std::string cert;
  std::string config;
  std::vector<std::string> nu;
  std::size_t points = 5;
  std::string out;
};

int cmd_validate(const ValidateArgs& a, Context& ctx) {
  json j;
  try {
    j = json::parse(config::read_file(a.cert));
  } catch (const json::exception& e) {
    throw ConfigError("certificate '" + a.cert + "' is not valid JSON: " + e.what());
  }
  const cert::HoloCertificate c = cert::certificate_from_json(j);
  config::RunConfig cfg;
  if (!a.config.empty()) {
    cfg = config::load_config(a.config);
    if (j.contains("config_hash") && j["config_hash"].get<std::string>() != cfg.hash) {
      throw ConfigError("certificate was built for config " + j["config_hash"].get<std::string>() +
                        ", not " + cfg.hash);
    }
  } else if (j.contains("config_toml") && j["config_toml"].is_string()) {
    cfg = config::parse_config(j["config_toml"].get<std::string>());
  } else {
    throw ConfigError("certificate carries no config; pass --config");
  }
  const ParametricProblem problem = config::build_problem(cfg);
  if (problem.s() != c.s()) throw ConfigError("certificate truncation differs from the problem truncation");

  std::vector<deriv::MultiIndex> nus;
  for (const auto& t : a.nu) nus.push_back(deriv::MultiIndex::parse_dense(t));
  if (nus.empty()) {
    for (const char* t : {"1", "0,1", "2", "1,1", "3", "2,1"}) nus.push_back(deriv::MultiIndex::parse_dense(t));
  }
  for (const auto& nu : nus) {
    for (const auto& [k, n] : nu.entries) {
      if (k >= c.s()) throw ConfigError("multi-index " + nu.str() + " exceeds the truncation");
    }
  }
  const auto ys = cert::seeded_points(a.points, problem.s(), cfg.seed);
  const cert::BoundReport rep = cert::validate_bounds(c, problem, ys, nus);

  Output o{a.out, {}};
  const bool header = a.out.empty() || !fs::exists(a.out) || fs::file_size(a.out) == 0;
  if (header) {
    o.buf << "config_hash,nu,measured_lambda,predicted_lambda,measured_u,predicted_u,worst_ratio,samples,pass,"
             "error\n";
  }
  for (const auto& r : rep.rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    o.buf << cfg.hash << ',' << '"' << r.nu.str() << '"' << ',' << num(r.measured_lambda) << ','
          << num(r.predicted_lambda) << ',' << num(r.measured_u) << ',' << num(r.predicted_u) << ','
          << num(r.worst_ratio) << ',' << r.samples << ',' << (r.pass ? "true" : "false") << ',' << err << '\n';
  }
  o.flush(ctx.out, true);
  write_manifest(a.out, "validate", ctx.args, cfg.hash, cfg.seed);
  ctx.err << (rep.all_pass() ? "all bounds hold\n" : "some bounds FAIL\n");
  return 0;
}

// ---- qmc ------------------------------------------------------------------------

struct QmcArgs {
  std::string config;
  std::string integrand = "pde";
  std::string N;
  std::optional<std::size_t> s;
  std::optional<std::size_t> R;
  std::optional<std::uint64_t> seed;
  bool mc = false;
  std::string out;
};

void emit_study(std::ostringstream& buf, const std::string& hash, const char* method, const qmc::Study& st) {
  std::vector<double> x, y;
  for (const auto& r : st.rows) {
    x.push_back(r.N);
    y.push_back(r.rms);
    buf << hash << ',' << method << ',' << r.N << ',' << r.s << ',' << r.R << ',' << num(r.estimate) << ','
        << num(r.rms) << ',';
    if (x.size() >= 2) buf << num(qmc::fit_loglog_slope(x, y));
    buf << '\n';
  }
}

int cmd_qmc(const QmcArgs& a, Context& ctx) {
  std::optional<config::RunConfig> cfg;
  if (!a.config.empty()) cfg = config::load_config(a.config);
  if (a.integrand != "pde" && a.integrand != "product") throw ConfigError("--integrand must be 'pde' or 'product'");
  if (a.integrand == "pde" && !cfg) throw ConfigError("--integrand pde needs --config");

  std::vector<std::uint32_t> N_list = cfg ? cfg->qmc.N : std::vector<std::uint32_t>{251, 503, 1009, 2003};
  if (!a.N.empty()) N_list = parse_sizes(a.N, "--N");
  const std::size_t R = a.R.value_or(cfg ? cfg->qmc.R : 16);
  const std::uint64_t seed = a.seed.value_or(cfg ? cfg->seed : 1);
  const std::size_t threads = cfg ? cfg->threads : 0;
  if (R < 8) throw ConfigError("--R must be >= 8");

  std::string hash;
  Output o{a.out, {}};
  o.buf << "config_hash,method,N,s,R,estimate,rms,alpha_obs\n";

  if (a.integrand == "product") {
    const std::size_t s = a.s.value_or(cfg && cfg->qmc.s ? *cfg->qmc.s : 16);
    std::string canon = "qmc integrand=product s=" + std::to_string(s) + " R=" + std::to_string(R) +
                        " seed=" + std::to_string(seed) + " N=";
    for (auto n : N_list) canon += std::to_string(n) + ";";
    hash = cfg ? config::fnv1a_hex(cfg->source + "\n#" + canon) : config::fnv1a_hex(canon);
    std::vector<double> c(s), w(s);
    for (std::size_t j = 0; j < s; ++j) {
      c[j] = std::pow(static_cast<double>(j + 1), -3.0);
      w[j] = c[j] * c[j];
    }
    const qmc::Integrand f = [c](std::span<const double> y) {
      double p = 1.0;
      for (std::size_t j = 0; j < y.size(); ++j) p *= 1.0 + c[j] * y[j];
      return p;
    };
    emit_study(o.buf, hash, "lattice", qmc::convergence_study(f, N_list, s, w, R, seed, threads));
    if (a.mc) emit_study(o.buf, hash, "mc", qmc::monte_carlo_study(f, N_list, s, R, seed, threads));
  } else {
    hash = cfg->hash;
    const ParametricProblem problem = config::build_problem(*cfg);
    const std::size_t s = a.s.value_or(cfg->qmc.s.value_or(problem.s()));
    if (s < 1 || s > problem.s()) {
      throw ConfigError("qmc dimension must lie in [1, " + std::to_string(problem.s()) + "]");
    }
    std::vector<double> w(s);
    if (cfg->qmc.weights == "certificate") {
      const auto c = cert::build_certificate(problem, cfg->gamma, cfg->certificate);
      for (std::size_t j = 0; j < s; ++j) w[j] = c.b[j] * c.b[j];
    } else {
      const auto c = problem.amplitudes();
      for (std::size_t j = 0; j < s; ++j) w[j] = c[j] * c[j];
    }
    qmc::Functional fn;
    if (cfg->qmc.functional == "mean_u") {
      fn.kind = qmc::Functional::Kind::G;
      fn.g.assign(problem.mesh().interior_dofs(), Complex(1.0));
    }
    qmc::Study st;
    std::vector<double> x, r;
    for (std::uint32_t N : N_list) {
      const auto rule = qmc::make_rule(N, qmc::cbc_construct(N, s, w), R, seed);
      const auto est = qmc::estimate_problem(problem, fn, rule, {cfg->qmc.continuation, threads});
      st.rows.push_back({N, s, R, est.mean, est.rms, 0.0});
    }
    emit_study(o.buf, hash, "lattice", st);
    if (a.mc) {
      const qmc::Integrand f = [&](std::span<const double> y) {
        const fem::GroundPair gp = problem.solve_real(y);
        return fn.kind == qmc::Functional::Kind::Lambda ? gp.lambda.real()
                                                         : problem.functional(fn.g, gp.u).real();
      };
      emit_study(o.buf, hash, "mc", qmc::monte_carlo_study(f, N_list, s, R, seed, threads));
    }
  }
  o.flush(ctx.out);
  write_manifest(a.out, "qmc", ctx.args, hash, seed);
  return 0;
}

// ---- report ---------------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> dirs;
  std::string out;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::map<std::string, std::string>> rows;
};

std::optional<Table> read_csv(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  Table t;
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  t.columns = split(line, ',');
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // Quoted fields only appear for multi-indices; commas inside quotes are kept.
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
      if (ch == '"') {
        quoted = !quoted;
        cur += ch;
      } else if (ch == ',' && !quoted) {
        cells.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    cells.push_back(cur);
    if (cells.size() != t.columns.size()) return std::nullopt;
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < cells.size(); ++i) row[t.columns[i]] = cells[i];
    t.rows.push_back(std::move(row));
  }
  return t;
}

double numeric_or_inf(const std::map<std::string, std::string>& row, const char* key) {
  auto it = row.find(key);
  if (it == row.end() || it->second.empty()) return std::numeric_limits<double>::infinity();
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
}

int cmd_report(const ReportArgs& a, Context& ctx) {
  std::vector<std::string> columns{"kind", "config_hash"};
  struct Row {
    std::map<std::string, std::string> cells;
    std::size_t order;
  };
  std::vector<Row> rows;
  std::vector<std::string> hashes;

  for (const auto& dir : a.dirs) {
    if (!fs::is_directory(dir)) {
      ctx.err << "warning: '" << dir << "' is not a directory, skipped\n";
      continue;
    }
    std::vector<fs::path> manifests;
    for (const auto& e : fs::directory_iterator(dir)) {
      const std::string name = e.path().filename().string();
      if (e.is_regular_file() && name.size() > 14 && name.ends_with(".manifest.json")) manifests.push_back(e.path());
    }
    std::sort(manifests.begin(), manifests.end());
    if (manifests.empty()) ctx.err << "warning: no manifest in '" << dir << "', skipped\n";
    for (const auto& mp : manifests) {
      json m;
      try {
        m = json::parse(config::read_file(mp.string()));
        if (!m.at("command").is_string() || !m.at("outputs").is_array() || !m.at("config_hash").is_string()) {
          throw std::runtime_error("bad field types");
        }
      } catch (const std::exception& e) {
        ctx.err << "warning: corrupted manifest '" << mp.string() << "' skipped (" << e.what() << ")\n";
        continue;
      }
      const std::string kind = m["command"].get<std::string>();
      if (kind == "report") continue;
      for (const auto& o : m["outputs"]) {
        if (!o.is_string()) continue;
        const fs::path data = mp.parent_path() / o.get<std::string>();
        if (data.extension() != ".csv") continue;
        const auto t = read_csv(data);
        if (!t) {
          ctx.err << "warning: output '" << data.string() << "' unreadable or malformed, skipped\n";
          continue;
        }
        for (const auto& c : t->columns) {
          if (std::find(columns.begin(), columns.end(), c) == columns.end()) columns.push_back(c);
        }
        for (auto cells : t->rows) {
          cells["kind"] = kind;
          if (cells["config_hash"].empty()) cells["config_hash"] = m["config_hash"].get<std::string>();
          rows.push_back({std::move(cells), rows.size()});
        }
      }
      hashes.push_back(m["config_hash"].get<std::string>());
    }
  }

  std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
    const auto kx = std::make_tuple(x.cells.at("kind"), numeric_or_inf(x.cells, "s"), numeric_or_inf(x.cells, "N"),
                                    x.cells.at("config_hash"));
    const auto ky = std::make_tuple(y.cells.at("kind"), numeric_or_inf(y.cells, "s"), numeric_or_inf(y.cells, "N"),
                                    y.cells.at("config_hash"));
    return kx < ky;
  });
  Output o{a.out, {}};
  for (std::size_t i = 0; i < columns.size(); ++i) o.buf << (i ? "," : "") << columns[i];
  o.buf << '\n';
  std::set<std::string> seen;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) line += ',';
      auto it = r.cells.find(columns[i]);
      if (it != r.cells.end()) line += it->second;
    }
    // Re-merging the same study twice leaves the table unchanged.
    if (!seen.insert(line).second) continue;
    o.buf << line << '\n';
  }
  o.flush(ctx.out);
  std::sort(hashes.begin(), hashes.end());
  hashes.erase(std::unique(hashes.begin(), hashes.end()), hashes.end());
  std::string joined;
  for (const auto& h : hashes) joined += h + ";";
  write_manifest(a.out, "report", ctx.args, config::fnv1a_hex(joined), 0);
  return 0;
}

const char* category(const std::exception& e) {
  if (dynamic_cast<const AssumptionError*>(&e)) return "assumption";
  if (dynamic_cast<const IterationError*>(&e)) return "iteration";
  if (dynamic_cast<const ContinuationError*>(&e)) return "continuation";
  if (dynamic_cast<const ContourError*>(&e)) return "contour";
  if (dynamic_cast<const CertificateError*>(&e)) return "certificate";
  if (dynamic_cast<const EstimateError*>(&e)) return "estimate";
  if (dynamic_cast<const AssemblyError*>(&e)) return "assembly";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  return "internal";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Holomorphy certificates and lattice rules for parametric ground-state eigenproblems",
               "holo_evp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Context ctx{args, out, err};
  std::function<int()> action;

  AlphaArgs alpha;
  auto* s_alpha = app.add_subcommand("alpha", "table of the derivative growth sequence");
  s_alpha->add_option("--rule", alpha.rule, "quad | factorial")->check(CLI::IsMember({"quad", "factorial"}));
  s_alpha->add_option("--n-max", alpha.n_max, "largest n")->required();
  s_alpha->add_option("--out", alpha.out, "CSV path (default stdout)");
  s_alpha->callback([&] { action = [&] { return cmd_alpha(alpha, ctx); }; });

  GeometryArgs geo;
  auto* s_geo = app.add_subcommand("geometry", "Bernstein ellipse / stadium checks");
  s_geo->require_subcommand(1);
  auto* s_check = s_geo->add_subcommand("check", "per-coordinate inclusion table for a profile");
  s_check->add_option("--profile", geo.profile, "profile TOML")->required();
  s_check->add_option("--out", geo.out, "CSV path (default stdout)");
  s_check->callback([&] { action = [&] { return cmd_geometry(geo, ctx); }; });

  SolveArgs solve;
  auto* s_solve = app.add_subcommand("solve", "ground pair at one parameter point");
  s_solve->add_option("--config", solve.config, "run config TOML")->required();
  s_solve->add_option("--problem", solve.problem, "linear | semilinear (must match the config)");
  s_solve->add_option("--y", solve.y, "comma-separated real parameter values");
  s_solve->add_option("--dump-u", solve.dump_u, "CSV of nodal u");
  s_solve->add_option("--out", solve.out, "CSV path (default stdout)");
  s_solve->callback([&] { action = [&] { return cmd_solve(solve, ctx); }; });

  DerivArgs der;
  auto* s_der = app.add_subcommand("derivs", "parametric derivatives in one coordinate");
  s_der->add_option("--config", der.config, "run config TOML")->required();
  s_der->add_option("--j", der.j, "coordinate, 1-based");
  s_der->add_option("--n-max", der.n_max, "highest order");
  s_der->add_option("--method", der.method, "contour | fd | cheb")
      ->check(CLI::IsMember({"contour", "fd", "cheb"}));
  s_der->add_option("--y", der.y, "comma-separated real parameter values");
  s_der->add_option("--radius", der.radius, "contour radius");
  s_der->add_option("--step", der.h, "finite-difference step");
  s_der->add_option("--Q", der.Q, "contour nodes");
  s_der->add_option("--out", der.out, "CSV path (default stdout)");
  s_der->callback([&] { action = [&] { return cmd_derivs(der, ctx); }; });

  CertifyArgs cer;
  auto* s_cert = app.add_subcommand("certify", "fit and write a holomorphy certificate");
  s_cert->add_option("--config", cer.config, "run config TOML")->required();
  s_cert->add_option("--out", cer.out, "JSON path (default stdout)");
  s_cert->callback([&] { action = [&] { return cmd_certify(cer, ctx); }; });

  ValidateArgs val;
  auto* s_val = app.add_subcommand("validate", "measure mixed derivatives against a certificate");
  s_val->add_option("--cert", val.cert, "certificate JSON")->required();
  s_val->add_option("--config", val.config, "run config TOML (default: the one stored in the certificate)");
  s_val->add_option("--nu", val.nu, "dense multi-index such as \"2,1\"; repeatable");
  s_val->add_option("--points", val.points, "seeded parameter points");
  s_val->add_option("--out", val.out, "CSV path, appended (default stdout)");
  s_val->callback([&] { action = [&] { return cmd_validate(val, ctx); }; });

  QmcArgs q;
  auto* s_qmc = app.add_subcommand("qmc", "randomly shifted lattice convergence study");
  s_qmc->add_option("--config", q.config, "run config TOML");
  s_qmc->add_option("--integrand", q.integrand, "pde | product")->check(CLI::IsMember({"pde", "product"}));
  s_qmc->add_option("--N", q.N, "comma-separated primes");
  s_qmc->add_option("--s", q.s, "dimension");
  s_qmc->add_option("--R", q.R, "random shifts");
  s_qmc->add_option("--seed", q.seed, "shift seed (default from config)");
  s_qmc->add_flag("--mc", q.mc, "add the Monte Carlo baseline");
  s_qmc->add_option("--out", q.out, "CSV path (default stdout)");
  s_qmc->callback([&] { action = [&] { return cmd_qmc(q, ctx); }; });

  ReportArgs rep;
  auto* s_rep = app.add_subcommand("report", "merge run directories into one table");
  s_rep->add_option("dirs", rep.dirs, "run directories")->required();
  s_rep->add_option("--out", rep.out, "CSV path (default stdout)");
  s_rep->callback([&] { action = [&] { return cmd_report(rep, ctx); }; });

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "holo_evp: usage error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    return action();
  } catch (const ConfigError& e) {
    err << "holo_evp: config error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "holo_evp: domain error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "holo_evp: " << category(e) << " error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "holo_evp: internal error: " << e.what() << '\n';
    return 3;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace holo::cli
