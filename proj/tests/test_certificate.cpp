#include "doctest.h"

#include "holo/certificate.hpp"
#include "holo/errors.hpp"

#include <cmath>
#include <numbers>

using namespace holo;
using namespace holo::cert;

namespace {

fields::AffineField decay(double base, double amp, double sigma, std::size_t s, fields::ModeShape shape,
                          bool positive = true) {
  fields::DecaySpec d;
  d.base = base;
  d.amplitude = amp;
  d.sigma = sigma;
  d.s = s;
  d.shape = shape;
  d.require_positive = positive;
  return fields::make_decay_field(d);
}

ParametricProblem small_fourier() {
  const std::size_t s = 4;
  return ParametricProblem::linear(fem::Mesh1D::uniform(64), decay(1.0, 0.3, 2.0, s, fields::ModeShape::Fourier),
                                   decay(0.0, 0.5, 2.0, s, fields::ModeShape::Fourier, false),
                                   decay(1.0, 0.1, 2.0, s, fields::ModeShape::Bump), s);
}

// lambda(y) = lambda(0) + sum_j c_j y_j with lambda(0) close to 0.
ParametricProblem tight_affine() {
  const std::size_t n = 64, s = 4;
  const double h = 1.0 / n, c = std::cos(std::numbers::pi * h);
  const double lh = 6.0 / (h * h) * (1.0 - c) / (2.0 + c);
  return ParametricProblem::linear(fem::Mesh1D::uniform(n), fields::AffineField::constant(1.0),
                                   decay(-lh, 0.1, 3.0, s, fields::ModeShape::Constant, false),
                                   fields::AffineField::constant(1.0), s);
}

CertOptions quick() {
  CertOptions o;
  o.fit_points = 6;
  o.sample_budget = 32;
  return o;
}

std::vector<deriv::MultiIndex> standard_nus() {
  std::vector<deriv::MultiIndex> nus;
  for (const char* t : {"1", "0,1", "2", "1,1", "3", "2,1"}) nus.push_back(deriv::MultiIndex::parse_dense(t));
  return nus;
}

}  // namespace

TEST_CASE("gamma policies sit at the target fraction of the cap") {
  for (GammaKind k : {GammaKind::Power, GammaKind::Geometric}) {
    GammaPolicy p{k, k == GammaKind::Power ? 2.0 : 1.5, 0.9};
    const auto g = make_gamma(p, 10, 0.8);
    double G = 0.0;
    for (double v : g) G += 1.0 / v;
    CHECK(G == doctest::Approx(0.72).epsilon(1e-14));
    CHECK(check_gamma(g, 0.8) == doctest::Approx(0.72));
    for (std::size_t j = 1; j < g.size(); ++j) CHECK(g[j] > g[j - 1]);
  }
  CHECK_THROWS_AS(check_gamma(std::vector<double>{1.0, 2.0}, 1.0), AssumptionError);
  CHECK_THROWS_AS(make_gamma({GammaKind::Geometric, 1.0, 0.9}, 4, 1.0), ConfigError);
  CHECK(gamma_cap(combinatorics::AlphaRule::QuadrupleFactorial, 0.1) == doctest::Approx(0.4));
  CHECK(gamma_cap(combinatorics::AlphaRule::QuadrupleFactorial, 0.9) == 1.0);
  CHECK(gamma_cap(combinatorics::AlphaRule::Factorial, 0.1) == 1.0);
}

TEST_CASE("seeded points are reproducible and inside the cube") {
  const auto a = seeded_points(20, 5, 7);
  const auto b = seeded_points(20, 5, 7);
  CHECK(a == b);
  CHECK(a != seeded_points(20, 5, 8));
  for (const auto& y : a)
    for (double v : y) CHECK(std::abs(v) <= 1.0);
}

TEST_CASE("certificate on the fourier problem") {
  const auto problem = small_fourier();
  const auto c = build_certificate(problem, {}, quick());
  CHECK(c.rule == combinatorics::AlphaRule::QuadrupleFactorial);
  CHECK(c.eps == 0.25);
  CHECK(c.Gamma < c.Gamma_cap);
  CHECK(c.zeta >= c.options.margin * std::max(c.fit_ratio_lambda, c.fit_ratio_u) - 1e-12);
  for (std::size_t j = 1; j < c.s(); ++j) CHECK(c.b[j] <= c.b[j - 1] * (1 + 1e-12));
  for (std::size_t j = 0; j < c.s(); ++j) CHECK(c.b[j] == doctest::Approx(c.gamma[j] * c.beta[j]));
  CHECK(c.M_lambda >= c.lambda_bar);
  CHECK(c.M_u >= c.u_bar * (1 - 1e-12));

  SUBCASE("single-coordinate bounds") {
    for (const auto& y : seeded_points(3, c.s(), 11)) {
      for (const auto& sc : check_single_bounds(c, problem, y, c.s(), 4)) CHECK(sc.pass());
    }
  }
  SUBCASE("mixed bounds") {
    const auto nus = standard_nus();
    const auto rep = validate_bounds(c, problem, seeded_points(2, c.s(), 3), nus);
    CHECK(rep.all_pass());
  }
  SUBCASE("prediction formula") {
    const auto nu = deriv::MultiIndex::parse_dense("2,1");
    const double ref = 3.0 * 2.0 * std::pow(c.b[0] / 0.25, 2) * (c.b[1] / 0.25);
    CHECK(predict(c, nu, 3.0) == doctest::Approx(ref).epsilon(1e-14));
  }
  SUBCASE("admissible rho gives included ellipses") {
    std::vector<double> rho(c.s());
    for (std::size_t j = 0; j < c.s(); ++j) rho[j] = 1.0 + c.eps / (c.s() * c.b[j]);
    CHECK(check_admissibility_theorem(c, rho).pass());
  }
  SUBCASE("json round trip") {
    const auto back = certificate_from_json(to_json(c));
    CHECK(back.beta == c.beta);
    CHECK(back.gamma == c.gamma);
    CHECK(back.M_lambda == c.M_lambda);
    CHECK(back.M_u == c.M_u);
    CHECK(back.zeta == c.zeta);
    CHECK(to_json(back) == to_json(c));
  }
}

TEST_CASE("deflated beta breaks the tight affine certificate") {
  const auto problem = tight_affine();
  const auto c = build_certificate(problem, {GammaKind::Power, 3.0, 0.9}, quick());
  const auto ys = seeded_points(3, c.s(), 5);
  const auto nus = standard_nus();
  const auto ok = validate_bounds(c, problem, ys, nus);
  CHECK(ok.all_pass());
  // First-order measurement is c_1 = 0.1 at every y.
  CHECK(ok.rows[0].measured_lambda == doctest::Approx(0.1).epsilon(1e-9));

  auto bad = c;
  for (auto& b : bad.beta) b /= 10.0;
  for (auto& b : bad.b) b /= 10.0;
  const auto rep = validate_bounds(bad, problem, ys, nus);
  CHECK_FALSE(rep.all_pass());
  CHECK_FALSE(rep.rows[0].pass);
}

TEST_CASE("certificate errors") {
  const std::size_t s = 3;
  const auto flat = ParametricProblem::linear(fem::Mesh1D::uniform(32), fields::AffineField::constant(1.0),
                                              fields::AffineField::constant(0.0), fields::AffineField::constant(1.0), s);
  CHECK_THROWS_AS(build_certificate(flat, {}, quick()), CertificateError);
  CHECK_THROWS_AS(certificate_from_json(nlohmann::json{{"rule", "quad"}}), ConfigError);
  // gamma growing faster than c decays makes b increasing.
  CHECK_THROWS_AS(build_certificate(small_fourier(), {GammaKind::Power, 4.0, 0.9}, quick()), CertificateError);
}
