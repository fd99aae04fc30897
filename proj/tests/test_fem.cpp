#include "doctest.h"

#include "holo/errors.hpp"
#include "holo/fem.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

using namespace holo::fem;

namespace {

CVector constant(std::size_t n, Complex v) { return CVector(n, v); }

double ground_dense(const CsrMatrix& K, const CsrMatrix& M) {
  const std::size_t n = K.dim();
  Eigen::MatrixXd k(n, n), m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      k(i, j) = K.at(i, j).real();
      m(i, j) = M.at(i, j).real();
    }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, m);
  return es.eigenvalues()(0);
}

GroundPair laplace(std::size_t n, Complex b = 0.0) {
  const Mesh1D mesh = Mesh1D::uniform(n);
  const auto sys = assemble(mesh, constant(n, 1.0), constant(n, b), constant(n, 1.0));
  SolverOptions o;
  o.cold_shift = std::min(0.0, b.real()) - 1.0;
  return ground_pair_linear(sys.K, sys.M, nullptr, o);
}

}  // namespace

TEST_CASE("mesh") {
  const Mesh1D m = Mesh1D::uniform(4);
  CHECK(m.interior_dofs() == 3);
  CHECK(m.h() == 0.25);
  CHECK_THROWS_AS(Mesh1D({0.0, 0.6, 0.5, 1.0}), holo::DomainError);
  CHECK_THROWS_AS(Mesh1D({0.1, 0.5, 1.0}), holo::DomainError);
}

TEST_CASE("textbook P1 matrices") {
  const std::size_t n = 8;
  const double h = 1.0 / n;
  const Mesh1D mesh = Mesh1D::uniform(n);
  const auto sys = assemble(mesh, constant(n, 1.0), constant(n, 0.0), constant(n, 1.0));
  for (std::size_t i = 0; i < mesh.interior_dofs(); ++i) {
    CHECK(std::abs(sys.K.at(i, i) - 2.0 / h) < 1e-12);
    CHECK(std::abs(sys.M.at(i, i) - 4.0 * h / 6) < 1e-15);
    if (i + 1 < mesh.interior_dofs()) {
      CHECK(std::abs(sys.K.at(i, i + 1) + 1.0 / h) < 1e-12);
      CHECK(std::abs(sys.M.at(i, i + 1) - h / 6) < 1e-15);
    }
  }
  CHECK(sys.K.structurally_symmetric());
  CHECK(sys.K.asymmetry() <= 1e-14);

  const auto shifted = assemble(mesh, constant(n, 1.0), constant(n, 3.0), constant(n, 1.0));
  const CsrMatrix diff = shifted.K.axpy(-1.0, sys.K).axpy(-3.0, sys.M);
  for (const auto& v : diff.values()) CHECK(v == Complex(0.0));
}

TEST_CASE("complex coefficients give complex-symmetric matrices") {
  const Mesh1D mesh = Mesh1D::uniform(3);
  const auto sys = assemble(mesh, constant(3, {1.0, 0.1}), constant(3, 0.0), constant(3, 1.0));
  CHECK(sys.K.asymmetry() == 0.0);
  CHECK(sys.K.at(0, 1) == sys.K.at(1, 0));
  CHECK(sys.K.at(0, 1).imag() != 0.0);
  CHECK(std::abs(sys.K.at(0, 1) - std::conj(sys.K.at(1, 0))) > 0.0);
}

TEST_CASE("non-finite coefficients are rejected") {
  const Mesh1D mesh = Mesh1D::uniform(4);
  CVector a = constant(4, 1.0);
  a[2] = std::nan("");
  CHECK_THROWS_AS(stiffness(mesh, a), holo::AssemblyError);
  CHECK_THROWS_AS(stiffness(mesh, constant(3, 1.0)), holo::AssemblyError);
}

TEST_CASE("tridiagonal LU against dense solve") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> N01;
  const std::size_t n = 9;
  Tridiagonal t{CVector(n - 1), CVector(n), CVector(n - 1)};
  for (auto& v : t.sub) v = {N01(gen), N01(gen)};
  for (auto& v : t.diag) v = {0.1 * N01(gen), N01(gen)};  // weak diagonal forces pivoting
  for (auto& v : t.sup) v = {N01(gen), N01(gen)};
  CVector b(n);
  for (auto& v : b) v = {N01(gen), N01(gen)};
  const CsrMatrix A = CsrMatrix::from_bands(t);
  CVector x = b;
  TridiagonalLU(t).solve(x);
  const CVector Ax = A * x;
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(Ax[i] - b[i]) < 1e-11);

  Tridiagonal singular{CVector(2, 1.0), CVector(3, 1.0), CVector(2, 1.0)};
  singular.diag[0] = 0.0;
  singular.sub[0] = 0.0;
  CHECK_THROWS_AS(TridiagonalLU{singular}, holo::ContinuationError);
}

TEST_CASE("discrete Laplacian ground pair") {
  const GroundPair g = laplace(4);
  const double c = std::cos(std::numbers::pi / 4);
  CHECK(g.lambda.real() == doctest::Approx(96 * (1 - c) / (2 + c)).epsilon(1e-12));
  CHECK(g.lambda.imag() == 0.0);

  const Mesh1D mesh = Mesh1D::uniform(4);
  const auto sys = assemble(mesh, constant(4, 1.0), constant(4, 0.0), constant(4, 1.0));
  CHECK(g.lambda.real() == doctest::Approx(ground_dense(sys.K, sys.M)).epsilon(1e-12));

  const GroundPair fine = laplace(512);
  CHECK(std::abs(fine.lambda.real() - std::numbers::pi * std::numbers::pi) < 1e-4);
  const Mesh1D fm = Mesh1D::uniform(512);
  const auto x = fm.interior_nodes();
  double err = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    err = std::max(err, std::abs(fine.u[i] - std::sqrt(2.0) * std::sin(std::numbers::pi * x[i])));
  }
  CHECK(err < 1e-4);
  CHECK(g.norm_check < 1e-10);
}

TEST_CASE("mesh convergence is second order") {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  double prev = std::abs(laplace(32).lambda.real() - pi2);
  for (std::size_t n = 64; n <= 256; n *= 2) {
    const double e = std::abs(laplace(n).lambda.real() - pi2);
    CHECK(prev / e > 3.6);
    CHECK(prev / e < 4.4);
    prev = e;
  }
}

TEST_CASE("constant shift and joint scaling") {
  const std::size_t n = 64;
  const Mesh1D mesh = Mesh1D::uniform(n);
  CVector a(n), b(n), c(n);
  const auto mid = mesh.midpoints();
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = 1.0 + 0.3 * std::sin(3 * mid[i]);
    b[i] = 2.0 * mid[i];
    c[i] = 1.0 + 0.2 * mid[i] * mid[i];
  }
  SolverOptions o;
  o.tol = 1e-12;
  o.cold_shift = -1.0;
  const CVector ones = constant(n, 1.0);
  const auto s0 = assemble(mesh, a, b, ones);
  const GroundPair g0 = ground_pair_linear(s0.K, s0.M, nullptr, o);
  CVector b5 = b;
  for (auto& v : b5) v += 5.0;
  const auto s5 = assemble(mesh, a, b5, ones);
  const GroundPair g5 = ground_pair_linear(s5.K, s5.M, nullptr, o);
  CHECK(std::abs(g5.lambda - g0.lambda - 5.0) < 1e-10);
  for (std::size_t i = 0; i < g0.u.size(); ++i) CHECK(std::abs(g5.u[i] - g0.u[i]) < 1e-10);

  const CsrMatrix gram = mass(mesh, ones);
  const auto s1 = assemble(mesh, a, b, c);
  const GroundPair h1 = ground_pair_linear(s1.K, s1.M, gram, nullptr, o);
  CVector ta = a, tb = b, tc = c;
  for (std::size_t i = 0; i < n; ++i) {
    ta[i] *= 3.7;
    tb[i] *= 3.7;
    tc[i] *= 3.7;
  }
  const auto st = assemble(mesh, ta, tb, tc);
  const GroundPair ht = ground_pair_linear(st.K, st.M, gram, nullptr, o);
  CHECK(std::abs(ht.lambda - h1.lambda) < 1e-10);
  for (std::size_t i = 0; i < h1.u.size(); ++i) CHECK(std::abs(ht.u[i] - h1.u[i]) < 1e-10);
}

TEST_CASE("min-max and Rayleigh quotient") {
  const std::size_t n = 32;
  const Mesh1D mesh = Mesh1D::uniform(n);
  const auto sys = assemble(mesh, constant(n, 1.5), constant(n, 0.5), constant(n, 1.0));
  SolverOptions o;
  o.cold_shift = -1;
  const GroundPair g = ground_pair_linear(sys.K, sys.M, nullptr, o);
  CHECK(std::abs(g.lambda - bilinear(g.u, sys.K, g.u) / bilinear(g.u, sys.M, g.u)) < 1e-10);
  CHECK(std::abs(g.lambda.real() - ground_dense(sys.K, sys.M)) < 1e-9);
  std::mt19937_64 gen(11);
  std::normal_distribution<double> N01;
  for (int t = 0; t < 50; ++t) {
    CVector v(n - 1);
    for (auto& x : v) x = N01(gen);
    CHECK(g.lambda.real() <= (bilinear(v, sys.K, v) / bilinear(v, sys.M, v)).real() + 1e-12);
  }
  Complex sum = 0;
  const CVector Mu = sys.M * g.u;
  for (auto& v : Mu) sum += v;
  CHECK(sum.real() > 0);
  CHECK(second_eigenvalue(sys.K, sys.M, g, o) > g.lambda.real() + 1.0);
}

TEST_CASE("seeded solve follows the cold branch") {
  const std::size_t n = 64;
  const Mesh1D mesh = Mesh1D::uniform(n);
  const auto mid = mesh.midpoints();
  auto system = [&](double y) {
    CVector a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = 1.0 + 0.3 * y * std::sin(std::numbers::pi * mid[i]);
    return assemble(mesh, a, constant(n, 0.0), constant(n, 1.0));
  };
  SolverOptions o;
  o.tol = 1e-12;
  o.cold_shift = -1;
  const auto s0 = system(0.2), s1 = system(0.25);
  const GroundPair g0 = ground_pair_linear(s0.K, s0.M, nullptr, o);
  const GroundPair seeded = ground_pair_linear(s1.K, s1.M, &g0, o);
  const GroundPair cold = ground_pair_linear(s1.K, s1.M, nullptr, o);
  CHECK(std::abs(seeded.lambda - cold.lambda) < 1e-10);
  for (std::size_t i = 0; i < cold.u.size(); ++i) CHECK(std::abs(seeded.u[i] - cold.u[i]) < 1e-8);
  CHECK_THROWS_AS(ground_pair_linear(s1.K, s1.M, nullptr, SolverOptions{.tol = 1e-14}), holo::DomainError);
}

TEST_CASE("hnorm") {
  const Mesh1D half = Mesh1D::uniform(2);
  const CVector hat{1.0};
  CHECK(hnorm(hat, half) == doctest::Approx(2.0));
  CHECK(hnorm(CVector{0.0}, half) == 0.0);
  const Mesh1D mesh = Mesh1D::uniform(400);
  CVector u;
  for (double x : mesh.interior_nodes()) u.push_back(std::sqrt(2.0) * std::sin(std::numbers::pi * x));
  CHECK(std::abs(hnorm(u, mesh) - std::numbers::pi) < 1e-4);
  // hnorm^2 equals u^H K_0 u.
  const CsrMatrix K0 = stiffness(mesh, constant(400, 1.0));
  CHECK(hnorm(u, mesh) * hnorm(u, mesh) == doctest::Approx(hermitian(u, K0, u).real()).epsilon(1e-12));
}

TEST_CASE("Gauss quadrature is exact on P1 powers") {
  const Mesh1D mesh = Mesh1D::uniform(4);
  // u = hat at x=1/2 with height 1: int u^4 = 2 * int_0^{1/2} (2x)^4 = 1/5.
  const CVector u{0.0, 1.0, 0.0};
  CHECK(integral_power(mesh, u, 4).real() == doctest::Approx(0.5 * 0.4 / 2 * 1.0).epsilon(1e-14));
  CHECK(integral_power(mesh, u, 1).real() == doctest::Approx(0.25));
}

TEST_CASE("semilinear solver") {
  const std::size_t n = 256;
  const Mesh1D mesh = Mesh1D::uniform(n);
  const CVector a = constant(n, 1.0), b = constant(n, 0.0);
  SemilinearOptions o;
  o.linear.cold_shift = -1;
  const GroundPair lin = ground_pair_semilinear(mesh, a, b, 0.0, 3, nullptr, o);
  const auto sys = assemble(mesh, a, b, constant(n, 1.0));
  const GroundPair direct = ground_pair_linear(sys.K, sys.M, nullptr, o.linear);
  CHECK(lin.lambda == direct.lambda);

  const GroundPair small = ground_pair_semilinear(mesh, a, b, 1e-8, 3, nullptr, o);
  CHECK(std::abs(small.lambda - lin.lambda - 1.5e-8) < 1e-10);

  const GroundPair g = ground_pair_semilinear(mesh, a, b, 1.0, 3, nullptr, o);
  const SemilinearEnergy e = semilinear_energy(mesh, a, b, 1.0, 3, g.u);
  CHECK(std::abs(g.lambda - e.total()) < 1e-12);
  CHECK(g.residual < o.tol);
  CHECK(g.lambda.real() > lin.lambda.real() + 1.0);
  CHECK(g.lambda.real() < lin.lambda.real() + 1.6);

  CHECK_THROWS_AS(ground_pair_semilinear(mesh, a, b, -1.0, 3, nullptr, o), holo::DomainError);
  CHECK_THROWS_AS(ground_pair_semilinear(mesh, a, b, 1.0, 2, nullptr, o), holo::DomainError);
}
