#include "holo/problem.hpp"

#include "holo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace holo {

ParametricProblem::ParametricProblem(ProblemKind kind, fem::Mesh1D mesh, fields::AffineField A,
                                     fields::AffineField B, fields::AffineField C, std::size_t s)
    : kind_(kind), mesh_(std::move(mesh)), A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), s_(s) {
  const auto mid = mesh_.midpoints();
  tA_ = fields::FieldTable(A_, mid);
  tB_ = fields::FieldTable(B_, mid);
  tC_ = fields::FieldTable(C_, mid);
  assumptions_ = fields::verify_assumptions(A_, B_, C_, s_, fields::sampling_grid(mesh_.n_cells()));
  gram_ = fem::mass(mesh_, CVector(mesh_.n_cells(), Complex(1.0)));
}

ParametricProblem ParametricProblem::linear(fem::Mesh1D mesh, fields::AffineField A, fields::AffineField B,
                                            fields::AffineField C, std::size_t s, fem::SolverOptions opts) {
  ParametricProblem out(ProblemKind::Linear, std::move(mesh), std::move(A), std::move(B), std::move(C), s);
  out.opts_.linear = opts;
  return out;
}

ParametricProblem ParametricProblem::semilinear(fem::Mesh1D mesh, fields::AffineField A,
                                                fields::AffineField B, double eta, int p, std::size_t s,
                                                fem::SemilinearOptions opts) {
  if (A.parametric()) throw ConfigError("semilinear problem needs a non-parametric coefficient A");
  if (eta < 0.0 || !std::isfinite(eta)) throw DomainError("eta must be non-negative");
  if (p != 1 && p != 3 && p != 5) throw DomainError("p must be 1, 3 or 5");
  ParametricProblem out(ProblemKind::Semilinear, std::move(mesh), std::move(A), std::move(B),
                        fields::AffineField::constant(1.0), s);
  out.eta_ = eta;
  out.p_ = p;
  out.opts_ = opts;
  return out;
}

std::vector<double> ParametricProblem::amplitudes() const {
  if (kind_ == ProblemKind::Semilinear) {
    const fields::AffineField* f[] = {&B_};
    return fields::combined_amplitudes(f, s_);
  }
  const fields::AffineField* f[] = {&A_, &B_, &C_};
  return fields::combined_amplitudes(f, s_);
}

bool ParametricProblem::coefficients_admissible(std::span<const Complex> y) const {
  CVector a, c;
  tA_.eval(y.first(std::min(y.size(), s_)), a);
  tC_.eval(y.first(std::min(y.size(), s_)), c);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].real() > 0.0) || !(c[i].real() > 0.0)) return false;
  }
  return true;
}

fem::GroundPair ParametricProblem::solve(std::span<const Complex> y, const fem::GroundPair* seed) const {
  if (y.size() > s_) {
    throw DomainError("parameter of length " + std::to_string(y.size()) + " exceeds truncation " +
                      std::to_string(s_));
  }
  CVector a, b, c;
  tA_.eval(y, a);
  tB_.eval(y, b);
  tC_.eval(y, c);
  double low = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].real() > 0.0) || !(c[i].real() > 0.0)) {
      throw ContinuationError("coefficient A or C lost a positive real part at cell " + std::to_string(i));
    }
    low = std::min(low, b[i].real() / c[i].real());
  }
  if (kind_ == ProblemKind::Linear) {
    fem::SolverOptions o = opts_.linear;
    o.cold_shift = low - 1.0;
    const fem::SystemMatrices sys = fem::assemble(mesh_, a, b, c);
    return fem::ground_pair_linear(sys.K, sys.M, gram_, seed, o);
  }
  fem::SemilinearOptions o = opts_;
  o.linear.cold_shift = low - 1.0;
  return fem::ground_pair_semilinear(mesh_, a, b, eta_, p_, seed, o);
}

fem::GroundPair ParametricProblem::solve_real(std::span<const double> y) const {
  const CVector z(y.begin(), y.end());
  return solve(z);
}

double ParametricProblem::second_eigenvalue(std::span<const Complex> y, const fem::GroundPair& ground) const {
  if (kind_ != ProblemKind::Linear) throw DomainError("second eigenvalue is only reported for the linear problem");
  CVector a, b, c;
  tA_.eval(y.first(std::min(y.size(), s_)), a);
  tB_.eval(y.first(std::min(y.size(), s_)), b);
  tC_.eval(y.first(std::min(y.size(), s_)), c);
  double low = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) low = std::min(low, b[i].real() / c[i].real());
  fem::SolverOptions o = opts_.linear;
  o.cold_shift = low - 1.0;
  const fem::SystemMatrices sys = fem::assemble(mesh_, a, b, c);
  return fem::second_eigenvalue(sys.K, sys.M, ground, o);
}

Complex ParametricProblem::functional(std::span<const Complex> g, std::span<const Complex> u) const {
  return fem::bilinear(g, gram_, u);
}

}  // namespace holo
