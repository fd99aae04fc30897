#include "doctest.h"

#include "holo/errors.hpp"
#include "holo/fields.hpp"

#include <cmath>
#include <numbers>

using namespace holo::fields;

TEST_CASE("decay family amplitudes") {
  const AffineField f = make_decay_field({1.0, 0.1, 2.0, 4, ModeShape::Fourier});
  REQUIRE(f.truncation() == 4);
  const std::vector<double> want{0.1, 0.025, 0.1 / 9, 0.00625};
  for (std::size_t j = 0; j < 4; ++j) CHECK(f.amplitudes()[j] == 0.1 * std::pow(double(j + 1), -2.0));
  for (std::size_t j = 0; j < 4; ++j) CHECK(f.amplitudes()[j] == doctest::Approx(want[j]).epsilon(1e-15));

  const AffineField flat = make_decay_field({1.0, 0.0, 2.0, 4, ModeShape::Fourier});
  CHECK(flat.truncation() == 0);
  CHECK(flat.amplitudes().empty());

  CHECK_THROWS_AS(make_decay_field({0.5, 0.4, 1.1, 8, ModeShape::Fourier}), holo::ConfigError);
  CHECK_THROWS_AS(make_decay_field({1.0, 0.1, 1.0, 8, ModeShape::Fourier}), holo::ConfigError);
}

TEST_CASE("amplitudes match sampled sup norm") {
  const auto grid = sampling_grid(64);
  for (ModeShape shape : {ModeShape::Fourier, ModeShape::Bump, ModeShape::Constant}) {
    const AffineField f = make_decay_field({1.0, 0.3, 2.0, 8, shape});
    for (std::size_t j = 0; j < 8; ++j) {
      double sup = 0;
      for (double x : grid) sup = std::max(sup, std::abs(f.mode(j, x)));
      CHECK(std::abs(sup - f.amplitudes()[j]) < 1e-12);
      if (j > 0) CHECK(f.amplitudes()[j] <= f.amplitudes()[j - 1]);
    }
  }
}

TEST_CASE("field evaluation") {
  const AffineField f = make_decay_field({1.0, 0.1, 2.0, 4, ModeShape::Fourier});
  const std::vector<double> x{0.1, 0.5, 0.8};
  const std::vector<Complex> zero(4);
  auto v0 = f.eval(zero, x);
  for (std::size_t i = 0; i < 3; ++i) CHECK(v0[i] == Complex(1.0));

  const std::vector<Complex> e1{1.0};
  auto v1 = f.eval(e1, x);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(v1[i].real() == doctest::Approx(1.0 + 0.1 * std::sin(std::numbers::pi * x[i])));
    CHECK(v1[i].imag() == 0.0);
  }

  const std::vector<Complex> yi{Complex(0, 0.5), 0, 0};
  auto vi = f.eval(yi, x);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(vi[i].real() == 1.0);
    CHECK(std::abs(vi[i].imag() - 0.05 * std::sin(std::numbers::pi * x[i])) < 1e-15);
  }

  const std::vector<Complex> too_long(5);
  CHECK_THROWS_AS(f.eval(too_long, x), holo::DomainError);
}

TEST_CASE("affinity and table agreement") {
  const AffineField f = make_decay_field({2.0, 0.7, 1.5, 6, ModeShape::Bump});
  const auto x = sampling_grid(20);
  const std::vector<Complex> y{{0.3, 0.1}, -0.5, {0, 0.2}, 0.9, -0.1, 0.4};
  const std::vector<Complex> z{-0.2, {0.4, -0.3}, 0.1, 0, 0.7, {-0.6, 0.2}};
  std::vector<Complex> yz(6);
  for (int j = 0; j < 6; ++j) yz[j] = y[j] + z[j];
  const auto a = f.eval(yz, x), b = f.eval(std::vector<Complex>(6), x), c = f.eval(y, x), d = f.eval(z, x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(a[i] + b[i] - c[i] - d[i]) < 1e-13);

  const FieldTable table(f, x);
  std::vector<Complex> t;
  table.eval(y, t);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(t[i] - c[i]) < 1e-15);
}

TEST_CASE("assumption bounds") {
  const auto grid = sampling_grid(64);
  const AffineField A = make_decay_field({1.0, 0.1, 2.0, 4, ModeShape::Fourier});
  const AffineField B = make_decay_field({0.0, 3.0, 2.0, 4, ModeShape::Fourier, false});
  const AffineField C = AffineField::constant(1.0);
  const FieldAssumptions fa = verify_assumptions(A, B, C, 4, grid);
  const double partial = 0.1 * (1 + 0.25 + 1.0 / 9 + 1.0 / 16);
  CHECK(fa.A_low >= 1 - partial - 1e-14);
  CHECK(fa.A_low < 1 - partial + 0.05);
  CHECK(fa.C_low == 1.0);
  CHECK(fa.D_low == fa.A_low);
  CHECK(fa.B_bar > 0);

  // Worst-case sign assignment y_j = -sign(phi_j(x)) realises the lower bound.
  double worst = 1e9;
  for (double x : grid) {
    double v = A.base(x);
    for (std::size_t j = 0; j < 4; ++j) v -= std::abs(A.mode(j, x));
    worst = std::min(worst, v);
  }
  CHECK(fa.A_low == doctest::Approx(worst).epsilon(1e-14));

  const AffineField bad = make_decay_field({0.1, 0.2, 2.0, 4, ModeShape::Fourier, false});
  try {
    verify_assumptions(bad, B, C, 4, grid);
    FAIL("expected an assumption error");
  } catch (const holo::AssumptionError& e) {
    CHECK(e.node() >= 0.0);
    CHECK(e.node() <= 1.0);
  }
}

TEST_CASE("combined amplitudes take the max") {
  const AffineField a = make_decay_field({1.0, 0.1, 2.0, 3, ModeShape::Fourier});
  const AffineField b = make_decay_field({1.0, 0.05, 1.5, 5, ModeShape::Fourier});
  const AffineField* fs[] = {&a, &b};
  const auto c = combined_amplitudes(fs, 5);
  CHECK(c[0] == 0.1);
  CHECK(c[4] == b.amplitudes()[4]);
  CHECK(c[2] == std::max(a.amplitudes()[2], b.amplitudes()[2]));
}
