#include "doctest.h"

#include "holo/errors.hpp"
#include "holo/qmc.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <set>

using namespace holo;
using namespace holo::qmc;

namespace {

// Independent long-double evaluation of the shift-averaged error.
long double err2(std::uint32_t N, const std::vector<std::uint32_t>& z, const std::vector<double>& w) {
  const long double pi2 = std::numbers::pi_v<long double> * std::numbers::pi_v<long double>;
  long double sum = 0.0L;
  for (std::uint32_t k = 0; k < N; ++k) {
    long double prod = 1.0L;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const long double x = static_cast<long double>((static_cast<std::uint64_t>(k) * z[j]) % N) / N;
      prod *= 1.0L + w[j] * 2.0L * pi2 * (x * x - x + 1.0L / 6.0L);
    }
    sum += prod;
  }
  return sum / N - 1.0L;
}

}  // namespace

TEST_CASE("primes and kernel") {
  std::set<std::uint64_t> small;
  for (std::uint64_t n = 0; n < 60; ++n)
    if (is_prime(n)) small.insert(n);
  CHECK(small == std::set<std::uint64_t>{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59});
  CHECK(is_prime(4001));
  CHECK_FALSE(is_prime(4003 * 3));
  CHECK(omega(0.0) == doctest::Approx(std::numbers::pi * std::numbers::pi / 3.0));
  // Mean zero over [0, 1] (midpoint sum of a quadratic is exact up to h^2 / 12 terms).
  double m = 0.0;
  const int K = 2000;
  for (int i = 0; i < K; ++i) m += omega((i + 0.5) / K);
  CHECK(std::abs(m / K + 2.0 * std::numbers::pi * std::numbers::pi / (12.0 * K * K)) < 1e-12);
}

TEST_CASE("CBC matches exhaustive search at each step") {
  for (std::uint32_t N : {5u, 7u, 11u, 13u, 31u}) {
    const std::vector<double> w{0.9, 0.4, 0.1};
    const auto z = cbc_construct(N, 3, w);
    for (std::size_t s = 1; s <= 3; ++s) {
      std::vector<std::uint32_t> prefix(z.begin(), z.begin() + s - 1);
      long double best = 1e300L;
      std::uint32_t arg = 0;
      for (std::uint32_t c = 1; c < N; ++c) {
        auto trial = prefix;
        trial.push_back(c);
        const long double e = err2(N, trial, w);
        if (e < best - 1e-13L) {
          best = e;
          arg = c;
        }
      }
      const std::vector<double> ws(w.begin(), w.begin() + s);
      const std::vector<std::uint32_t> zs(z.begin(), z.begin() + s);
      CHECK(std::abs(static_cast<long double>(shift_averaged_error(N, zs, ws)) - best) <= 1e-12L * (1 + best));
      CHECK(z[s - 1] == arg);
    }
  }
  CHECK(cbc_construct(7, 1, std::vector<double>{1.0})[0] == 1);
  CHECK_THROWS_AS(cbc_construct(8, 2, std::vector<double>{1.0, 0.5}), DomainError);
  CHECK_THROWS(cbc_construct(7, 2, std::vector<double>{0.5, 1.0}));
}

TEST_CASE("lattice points form a group") {
  const std::uint32_t N = 101;
  const std::vector<std::uint32_t> z{1, 27, 40};
  std::set<std::vector<std::uint32_t>> pts;
  for (std::uint32_t k = 0; k < N; ++k) {
    std::vector<std::uint32_t> p;
    for (auto zj : z) p.push_back(k * zj % N);
    pts.insert(p);
  }
  CHECK(pts.size() == N);
  for (std::uint32_t a = 0; a < N; a += 7)
    for (std::uint32_t b = 0; b < N; b += 5) {
      std::vector<std::uint32_t> sum;
      for (auto zj : z) sum.push_back((a * zj + b * zj) % N);
      CHECK(pts.contains(sum));
    }
}

TEST_CASE("shifted points and trigonometric exactness") {
  const std::uint32_t N = 251;
  const auto z = cbc_construct(N, 4, std::vector<double>{1.0, 0.5, 0.25, 0.125});
  const auto rule = make_rule(N, z, 8, 3);
  std::vector<double> y(4);
  for (std::size_t r = 0; r < rule.R(); ++r)
    for (std::uint32_t k = 0; k < N; k += 17) {
      rule.point(k, r, y);
      for (double v : y) CHECK((v >= -0.5 && v < 0.5));
    }
  // e^{2 pi i h.x} integrates exactly to 0 unless h.z = 0 mod N.
  const Integrand f = [](std::span<const double> y) { return std::cos(2.0 * std::numbers::pi * (y[0] + 0.5)); };
  const auto est = estimate(f, rule);
  for (double m : est.shift_means) CHECK(std::abs(m) < 1e-13);
  CHECK_THROWS_AS(make_rule(N, z, 4, 3), DomainError);
}

TEST_CASE("estimates do not depend on the worker count") {
  const std::uint32_t N = 503;
  std::vector<double> w(6);
  for (std::size_t j = 0; j < 6; ++j) w[j] = std::pow(j + 1.0, -4.0);
  const auto rule = make_rule(N, cbc_construct(N, 6, w), 16, 9);
  const Integrand f = [](std::span<const double> y) {
    double p = 1.0;
    for (std::size_t j = 0; j < y.size(); ++j) p *= 1.0 + y[j] / std::pow(j + 1.0, 2.0);
    return std::exp(p);
  };
  const auto a = estimate(f, rule, 1);
  const auto b = estimate(f, rule, 4);
  CHECK(a.shift_means == b.shift_means);
  CHECK(a.mean == b.mean);
  CHECK(a.rms == b.rms);
  CHECK(a.evaluations == N * 16);

  setenv("HOLO_EVP_THREADS", "3", 1);
  CHECK(worker_count() == 3);
  const auto c = estimate(f, rule);
  CHECK(c.mean == a.mean);
  unsetenv("HOLO_EVP_THREADS");

  const auto m1 = monte_carlo(f, 6, 200, 8, 5, 1);
  const auto m2 = monte_carlo(f, 6, 200, 8, 5, 3);
  CHECK(m1.mean == m2.mean);
  CHECK(m1.rms == m2.rms);
}

TEST_CASE("log-log slope") {
  const std::vector<double> x{10, 20, 40, 80}, y{1.0, 0.25, 0.0625, 0.015625};
  CHECK(fit_loglog_slope(x, y) == doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("affine lambda is estimated without bias") {
  fields::DecaySpec d;
  d.base = 0.0;
  d.amplitude = 0.5;
  d.s = 4;
  d.shape = fields::ModeShape::Constant;
  d.require_positive = false;
  const std::size_t n = 32;
  const auto problem = ParametricProblem::linear(fem::Mesh1D::uniform(n), fields::AffineField::constant(1.0),
                                                 fields::make_decay_field(d), fields::AffineField::constant(1.0), 4);
  const double lambda0 = problem.solve_real(std::vector<double>{}).lambda.real();
  std::vector<double> w(4);
  for (std::size_t j = 0; j < 4; ++j) w[j] = std::pow(0.5 / std::pow(j + 1.0, 2.0), 2.0);
  const auto rule = make_rule(61, cbc_construct(61, 4, w), 8, 21);
  const auto cold = estimate_problem(problem, {}, rule);
  CHECK(std::abs(cold.mean - lambda0) <= 5.0 * cold.rms);
  const auto warm = estimate_problem(problem, {}, rule, {true, 1});
  CHECK(std::abs(warm.mean - cold.mean) < 1e-10);

  Functional g;
  g.kind = Functional::Kind::G;
  g.g.assign(n - 1, 1.0);
  // u does not move with a constant potential, so G(u) is constant.
  const auto eg = estimate_problem(problem, g, rule);
  for (double m : eg.shift_means) CHECK(m == doctest::Approx(eg.shift_means[0]).epsilon(1e-9));
}

TEST_CASE("smooth product integrand rates") {
  const std::size_t s = 8;
  std::vector<double> c(s), w(s);
  for (std::size_t j = 0; j < s; ++j) {
    c[j] = std::pow(j + 1.0, -3.0);
    w[j] = c[j] * c[j];
  }
  const Integrand f = [&](std::span<const double> y) {
    double p = 1.0;
    for (std::size_t j = 0; j < y.size(); ++j) p *= 1.0 + c[j] * y[j];
    return p;
  };
  const std::vector<std::uint32_t> Ns{127, 251, 503, 1009};
  const auto q = convergence_study(f, Ns, s, w, 16, 2);
  const auto m = monte_carlo_study(f, Ns, s, 16, 2);
  CHECK(q.slope < -0.8);
  CHECK(m.slope > -0.65);
  CHECK(m.slope < -0.35);
  CHECK_THROWS(convergence_study(f, std::vector<std::uint32_t>{127, 251, 503}, s, w, 16, 2));
}
