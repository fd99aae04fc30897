#include "holo/certificate.hpp"

#include "holo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace holo::cert {

namespace {

double to_double(const combinatorics::BigInt& v) { return v.convert_to<double>(); }

std::size_t contour_q(unsigned order, std::size_t q_min) {
  std::size_t q = std::max<std::size_t>(q_min, 32);
  while (q < 4 * static_cast<std::size_t>(order)) q *= 2;
  return q;
}

double unit(std::mt19937_64& gen) {
  // 53 random bits mapped to [0, 1); independent of the library's distribution code.
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

GammaKind parse_gamma_kind(std::string_view name) {
  if (name == "geometric") return GammaKind::Geometric;
  if (name == "power") return GammaKind::Power;
  throw ConfigError("unknown gamma policy '" + std::string(name) + "' (expected geometric|power)");
}

std::string_view to_string(GammaKind k) { return k == GammaKind::Geometric ? "geometric" : "power"; }

double gamma_cap(combinatorics::AlphaRule rule, double D_low) {
  return rule == combinatorics::AlphaRule::QuadrupleFactorial ? std::min(1.0, 4.0 * D_low) : 1.0;
}

std::vector<double> make_gamma(const GammaPolicy& policy, std::size_t s, double cap) {
  if (!(policy.target_fraction > 0.0 && policy.target_fraction < 1.0)) {
    throw ConfigError("gamma target_fraction must lie in (0, 1)");
  }
  if (!(policy.param > 0.0)) throw ConfigError("gamma policy parameter must be positive");
  if (policy.kind == GammaKind::Geometric && !(policy.param > 1.0)) {
    throw ConfigError("geometric gamma policy needs ratio r > 1");
  }
  if (!(cap > 0.0)) throw AssumptionError("Gamma cap is not positive (D_low <= 0)");
  std::vector<double> raw(s);
  double inv_sum = 0.0;
  for (std::size_t j = 0; j < s; ++j) {
    const double jj = static_cast<double>(j + 1);
    raw[j] = policy.kind == GammaKind::Geometric ? std::pow(policy.param, jj) : std::pow(jj, policy.param);
    inv_sum += 1.0 / raw[j];
  }
  const double kappa = inv_sum / (policy.target_fraction * cap);
  for (auto& g : raw) g *= kappa;
  return raw;
}

double check_gamma(std::span<const double> gamma, double cap) {
  double G = 0.0;
  for (double g : gamma) {
    if (!(g > 0.0)) throw AssumptionError("gamma entries must be positive");
    G += 1.0 / g;
  }
  if (!(G < cap)) {
    std::ostringstream msg;
    msg << "Gamma = sum 1/gamma_j = " << G << " is not below the cap " << cap;
    throw AssumptionError(msg.str());
  }
  return G;
}

std::vector<std::vector<double>> seeded_points(std::size_t count, std::size_t s, std::uint64_t seed,
                                               double half_width) {
  std::mt19937_64 gen(seed);
  std::vector<std::vector<double>> pts(count, std::vector<double>(s));
  for (auto& p : pts) {
    for (auto& v : p) v = half_width * (2.0 * unit(gen) - 1.0);
  }
  return pts;
}

HoloCertificate build_certificate(const ParametricProblem& problem, const GammaPolicy& policy,
                                  const CertOptions& opts) {
  using combinatorics::AlphaRule;
  HoloCertificate cert;
  cert.rule = problem.kind() == ProblemKind::Linear ? AlphaRule::QuadrupleFactorial : AlphaRule::Factorial;
  cert.eps = combinatorics::rule_epsilon(cert.rule);
  cert.policy = policy;
  cert.options = opts;
  cert.D_low = problem.assumptions().D_low;
  const std::size_t s = problem.s();
  if (s == 0) throw CertificateError("certificate needs at least one parameter");
  cert.c = problem.amplitudes();
  for (std::size_t j = 0; j < s; ++j) {
    if (!(cert.c[j] > 0.0)) {
      throw CertificateError("coordinate " + std::to_string(j + 1) + " has zero amplitude; lower s");
    }
  }

  cert.Gamma_cap = gamma_cap(cert.rule, cert.D_low);
  cert.gamma = make_gamma(policy, s, cert.Gamma_cap);
  cert.Gamma = check_gamma(cert.gamma, cert.Gamma_cap);

  // Real sup over U.
  const auto fit_pts = seeded_points(opts.fit_points, s, opts.seed);
  const auto real_pts = seeded_points(opts.sample_budget, s, opts.seed + 1);
  for (const auto* set : {&fit_pts, &real_pts}) {
    for (const auto& y : *set) {
      const fem::GroundPair g = problem.solve_real(y);
      cert.lambda_bar = std::max(cert.lambda_bar, std::abs(g.lambda));
      cert.u_bar = std::max(cert.u_bar, problem.hnorm(g.u));
    }
  }

  // Fit zeta from contour derivatives.
  const auto alpha = combinatorics::alpha_sequence(cert.rule, std::max(opts.n_max, 1u));
  const std::size_t j_max = std::min(opts.j_max, s);
  for (const auto& y : fit_pts) {
    for (std::size_t j = 0; j < j_max; ++j) {
      double r = opts.fit_radius;
      deriv::ContourResult res;
      for (int attempt = 0;; ++attempt) {
        try {
          res = deriv::deriv_contour(problem, y, {j, r, contour_q(opts.n_max, opts.Q), 1}, opts.n_max);
          break;
        } catch (const ContourError& e) {
          if (attempt >= 4) {
            throw CertificateError("fit contour for coordinate " + std::to_string(j + 1) +
                                   " failed down to radius " + std::to_string(r) + ": " + e.what());
          }
          r *= 0.5;
        }
      }
      ++cert.fit_samples;
      for (unsigned n = 1; n <= opts.n_max; ++n) {
        const double a = to_double(alpha[n]);
        const double rl = std::pow(std::abs(res.entries[n].d_lambda) / (cert.lambda_bar * a), 1.0 / n) / cert.c[j];
        const double ru = std::pow(res.entries[n].hnorm_du / (cert.u_bar * a), 1.0 / n) / cert.c[j];
        cert.fit_ratio_lambda = std::max(cert.fit_ratio_lambda, rl);
        cert.fit_ratio_u = std::max(cert.fit_ratio_u, ru);
      }
    }
  }
  cert.zeta = opts.margin * std::max({1.0, cert.fit_ratio_lambda, cert.fit_ratio_u});
  cert.beta.resize(s);
  cert.b.resize(s);
  for (std::size_t j = 0; j < s; ++j) {
    cert.beta[j] = cert.zeta * cert.c[j];
    cert.b[j] = cert.gamma[j] * cert.beta[j];
    if (j > 0 && cert.b[j] > cert.b[j - 1] * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "b = gamma beta is not non-increasing (b_" << j + 1 << " = " << cert.b[j] << " > b_" << j
          << " = " << cert.b[j - 1] << "); choose a slower gamma policy";
      throw CertificateError(msg.str());
    }
  }
  cert.p = 1.0;
  for (double p : {0.25, 0.5, 0.75, 1.0}) {
    double sum = 0.0;
    for (double bj : cert.b) sum += std::pow(bj, p);
    if (sum <= 4.0) {
      cert.p = p;
      break;
    }
  }

  // Sample the stadiums through continuation for M_lambda, M_u.
  cert.M_lambda = cert.lambda_bar;
  cert.M_u = cert.u_bar;
  std::mt19937_64 gen(opts.seed + 2);
  for (std::size_t j = 0; j < s; ++j) {
    const double R = cert.stadium_radius(j);
    for (std::size_t k = 0; k < opts.sample_budget; ++k) {
      std::vector<double> base(s);
      for (auto& v : base) v = 2.0 * unit(gen) - 1.0;
      Complex z;
      if (k % 4 != 3) {
        // Boundary of the stadium: straight sides and the two end caps, by arclength.
        const double len = 4.0 + 2.0 * std::numbers::pi * R;
        const double t = unit(gen) * len;
        if (t < 2.0) {
          z = {-1.0 + t, R};
        } else if (t < 4.0) {
          z = {1.0 - (t - 2.0), -R};
        } else {
          const double phi = (t - 4.0) / R;
          z = phi < std::numbers::pi ? Complex(1.0, 0.0) + std::polar(R, phi - 0.5 * std::numbers::pi)
                                     : Complex(-1.0, 0.0) + std::polar(R, phi - 0.5 * std::numbers::pi);
        }
      } else {
        do {
          z = {(1.0 + R) * (2.0 * unit(gen) - 1.0), R * (2.0 * unit(gen) - 1.0)};
        } while (geometry::distance_to_unit_segment(z) > R);
      }
      base[j] = std::clamp(z.real(), -1.0, 1.0);
      const CVector from(base.begin(), base.end());
      CVector to = from;
      to[j] = z;
      try {
        const fem::GroundPair start = problem.solve(from);
        const fem::GroundPair g = deriv::continue_path(problem, start, from, to, 0.05);
        cert.M_lambda = std::max(cert.M_lambda, std::abs(g.lambda));
        cert.M_u = std::max(cert.M_u, problem.hnorm(g.u));
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << "continuation into the stadium of coordinate " << j + 1 << " (radius " << R << ") failed at z = "
            << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i: " << e.what();
        throw CertificateError(msg.str());
      }
      ++cert.stadium_samples;
    }
  }
  return cert;
}

bool AdmissibilityReport::all_included() const {
  return std::all_of(coords.begin(), coords.end(), [](const CoordinateCheck& c) { return c.inclusion.included(); });
}

AdmissibilityReport check_admissibility_theorem(const HoloCertificate& cert, std::span<const double> rho) {
  geometry::AdmissibleProfile prof{cert.b, cert.eps, cert.p};
  AdmissibilityReport r;
  r.budget = geometry::admissibility_budget(rho, prof);
  r.admissible = geometry::is_admissible(rho, prof);
  for (std::size_t j = 0; j < rho.size(); ++j) {
    CoordinateCheck c;
    c.rho = rho[j];
    c.radius = cert.stadium_radius(j);
    c.R_minor = geometry::semi_minor_length(rho[j]);
    c.R_major = geometry::semi_major_length(rho[j]);
    c.inclusion = geometry::ellipse_in_stadium(geometry::BernsteinEllipse(rho[j]), geometry::Stadium(c.radius));
    r.coords.push_back(c);
  }
  return r;
}

double predict(const HoloCertificate& cert, const deriv::MultiIndex& nu, double M) {
  double v = M * nu.factorial();
  for (const auto& [j, n] : nu.entries) {
    if (j >= cert.b.size()) throw DomainError("multi-index outside the certificate truncation");
    v *= std::pow(cert.b[j] / cert.eps, static_cast<double>(n));
  }
  return v;
}

bool BoundReport::all_pass() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const BoundRow& r) { return r.pass; });
}

BoundReport predict_mixed_bounds(const HoloCertificate& cert, std::span<const deriv::MultiIndex> nus) {
  BoundReport rep;
  for (const auto& nu : nus) {
    BoundRow row;
    row.nu = nu;
    row.predicted_lambda = predict(cert, nu, cert.M_lambda);
    row.predicted_u = predict(cert, nu, cert.M_u);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

BoundReport validate_bounds(const HoloCertificate& cert, const ParametricProblem& problem,
                            std::span<const std::vector<double>> y_samples,
                            std::span<const deriv::MultiIndex> nus) {
  BoundReport rep = predict_mixed_bounds(cert, nus);
  for (auto& row : rep.rows) {
    std::vector<deriv::ContourSpec> specs;
    for (const auto& [j, n] : row.nu.entries) {
      specs.push_back({j, cert.options.theta * cert.stadium_radius(j), contour_q(n, cert.options.Q), 1});
    }
    for (const auto& y : y_samples) {
      try {
        const deriv::Entry e = deriv::deriv_mixed(problem, y, row.nu, specs);
        row.measured_lambda = std::max(row.measured_lambda, std::abs(e.d_lambda));
        row.measured_u = std::max(row.measured_u, e.hnorm_du);
        ++row.samples;
      } catch (const Error& e) {
        if (row.error.empty()) row.error = e.what();
      }
    }
    row.worst_ratio = std::max(row.measured_lambda / row.predicted_lambda, row.measured_u / row.predicted_u);
    row.pass = row.error.empty() && row.samples == y_samples.size() && row.worst_ratio <= 1.0;
  }
  return rep;
}

std::vector<SingleCheck> check_single_bounds(const HoloCertificate& cert, const ParametricProblem& problem,
                                             std::span<const double> y, std::size_t j_max, unsigned n_max) {
  const auto alpha = combinatorics::alpha_sequence(cert.rule, std::max(n_max, 1u));
  std::vector<SingleCheck> out;
  for (std::size_t j = 0; j < std::min(j_max, cert.s()); ++j) {
    const deriv::ContourResult res = deriv::deriv_contour(
        problem, y, {j, cert.options.theta * cert.stadium_radius(j), contour_q(n_max, cert.options.Q), 1}, n_max);
    for (unsigned n = 1; n <= n_max; ++n) {
      SingleCheck c;
      c.j = j;
      c.n = n;
      const double scale = to_double(alpha[n]) * std::pow(cert.beta[j], static_cast<double>(n));
      c.measured_lambda = std::abs(res.entries[n].d_lambda);
      c.bound_lambda = cert.lambda_bar * scale;
      c.measured_u = res.entries[n].hnorm_du;
      c.bound_u = cert.u_bar * scale;
      out.push_back(c);
    }
  }
  return out;
}

nlohmann::json to_json(const HoloCertificate& cert) {
  nlohmann::json j;
  j["rule"] = std::string(combinatorics::to_string(cert.rule));
  j["eps"] = cert.eps;
  j["c"] = cert.c;
  j["zeta"] = cert.zeta;
  j["beta"] = cert.beta;
  j["gamma"] = cert.gamma;
  j["b"] = cert.b;
  j["p"] = cert.p;
  j["Gamma"] = cert.Gamma;
  j["Gamma_cap"] = cert.Gamma_cap;
  j["M_gamma"] = cert.M_u;
  j["M_lambda"] = cert.M_lambda;
  j["M_u"] = cert.M_u;
  j["lambda_bar"] = cert.lambda_bar;
  j["u_bar"] = cert.u_bar;
  j["D_low"] = cert.D_low;
  j["gamma_policy"] = {{"kind", std::string(to_string(cert.policy.kind))},
                       {"param", cert.policy.param},
                       {"target_fraction", cert.policy.target_fraction}};
  j["fit"] = {{"method", "contour"},
              {"margin", cert.options.margin},
              {"j_max", cert.options.j_max},
              {"n_max", cert.options.n_max},
              {"fit_points", cert.options.fit_points},
              {"fit_radius", cert.options.fit_radius},
              {"fit_samples", cert.fit_samples},
              {"ratio_lambda", cert.fit_ratio_lambda},
              {"ratio_u", cert.fit_ratio_u},
              {"seed", cert.options.seed}};
  j["sampling"] = {{"sample_budget", cert.options.sample_budget},
                   {"stadium_samples", cert.stadium_samples},
                   {"theta", cert.options.theta},
                   {"Q", cert.options.Q}};
  return j;
}

HoloCertificate certificate_from_json(const nlohmann::json& j) {
  try {
    HoloCertificate c;
    c.rule = combinatorics::parse_alpha_rule(j.at("rule").get<std::string>());
    c.eps = j.at("eps").get<double>();
    c.c = j.at("c").get<std::vector<double>>();
    c.zeta = j.at("zeta").get<double>();
    c.beta = j.at("beta").get<std::vector<double>>();
    c.gamma = j.at("gamma").get<std::vector<double>>();
    c.b = j.at("b").get<std::vector<double>>();
    c.p = j.at("p").get<double>();
    c.Gamma = j.at("Gamma").get<double>();
    c.Gamma_cap = j.at("Gamma_cap").get<double>();
    c.M_lambda = j.at("M_lambda").get<double>();
    c.M_u = j.at("M_u").get<double>();
    c.lambda_bar = j.at("lambda_bar").get<double>();
    c.u_bar = j.at("u_bar").get<double>();
    c.D_low = j.at("D_low").get<double>();
    const auto& gp = j.at("gamma_policy");
    c.policy = {parse_gamma_kind(gp.at("kind").get<std::string>()), gp.at("param").get<double>(),
                gp.at("target_fraction").get<double>()};
    const auto& fit = j.at("fit");
    c.options.margin = fit.at("margin").get<double>();
    c.options.j_max = fit.at("j_max").get<std::size_t>();
    c.options.n_max = fit.at("n_max").get<unsigned>();
    c.options.fit_points = fit.at("fit_points").get<std::size_t>();
    c.options.fit_radius = fit.at("fit_radius").get<double>();
    c.options.seed = fit.at("seed").get<std::uint64_t>();
    c.fit_samples = fit.at("fit_samples").get<std::size_t>();
    c.fit_ratio_lambda = fit.at("ratio_lambda").get<double>();
    c.fit_ratio_u = fit.at("ratio_u").get<double>();
    const auto& smp = j.at("sampling");
    c.options.sample_budget = smp.at("sample_budget").get<std::size_t>();
    c.stadium_samples = smp.at("stadium_samples").get<std::size_t>();
    c.options.theta = smp.at("theta").get<double>();
    c.options.Q = smp.at("Q").get<std::size_t>();
    if (c.beta.size() != c.gamma.size() || c.b.size() != c.beta.size()) {
      throw ConfigError("certificate arrays differ in length");
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed certificate JSON: ") + e.what());
  }
}

}  // namespace holo::cert
