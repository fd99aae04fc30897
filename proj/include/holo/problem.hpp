#pragma once

#include "holo/fem.hpp"
#include "holo/fields.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace holo {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

enum class ProblemKind { Linear, Semilinear };

/// A truncated affine-parametric ground-state problem on a fixed mesh.
///
/// Linear:      -(A u')' + B u = lambda C u.
/// Semilinear:  -(A u')' + B u + eta u^p = lambda u, A non-parametric.
/// Immutable after construction; solve() is safe to call concurrently.
class ParametricProblem {
 public:
  static ParametricProblem linear(fem::Mesh1D mesh, fields::AffineField A, fields::AffineField B,
                                  fields::AffineField C, std::size_t s,
                                  fem::SolverOptions opts = {});
  static ParametricProblem semilinear(fem::Mesh1D mesh, fields::AffineField A, fields::AffineField B,
                                      double eta, int p, std::size_t s,
                                      fem::SemilinearOptions opts = {});

  ProblemKind kind() const noexcept { return kind_; }
  std::size_t s() const noexcept { return s_; }
  const fem::Mesh1D& mesh() const noexcept { return mesh_; }
  double eta() const noexcept { return eta_; }
  int p() const noexcept { return p_; }
  const fields::AffineField& A() const noexcept { return A_; }
  const fields::AffineField& B() const noexcept { return B_; }
  const fields::AffineField& C() const noexcept { return C_; }
  const fields::FieldAssumptions& assumptions() const noexcept { return assumptions_; }
  const fem::CsrMatrix& gram() const noexcept { return gram_; }
  const fem::SolverOptions& solver_options() const noexcept { return opts_.linear; }

  /// c_j on the truncation: max over A, B, C (linear) or the B amplitudes (semilinear).
  std::vector<double> amplitudes() const;

  /// Ground pair at y (length <= s, missing coordinates are 0). Real y without a
  /// seed is a cold start; complex y should come with a nearby seed.
  fem::GroundPair solve(std::span<const Complex> y, const fem::GroundPair* seed = nullptr) const;
  fem::GroundPair solve_real(std::span<const double> y) const;

  /// Second eigenvalue of the linear pencil at y (diagnostic gap report only).
  double second_eigenvalue(std::span<const Complex> y, const fem::GroundPair& ground) const;

  /// Re A > 0 and Re C > 0 at every cell midpoint.
  bool coefficients_admissible(std::span<const Complex> y) const;

  double hnorm(std::span<const Complex> u) const { return fem::hnorm(u, mesh_); }
  /// Discrete G(u) = g^T (G u) for a dual vector g.
  Complex functional(std::span<const Complex> g, std::span<const Complex> u) const;

 private:
  ParametricProblem(ProblemKind kind, fem::Mesh1D mesh, fields::AffineField A, fields::AffineField B,
                    fields::AffineField C, std::size_t s);

  ProblemKind kind_;
  fem::Mesh1D mesh_;
  fields::AffineField A_, B_, C_;
  std::size_t s_;
  double eta_ = 0.0;
  int p_ = 1;
  fem::SemilinearOptions opts_;
  fields::FieldTable tA_, tB_, tC_;
  fields::FieldAssumptions assumptions_;
  fem::CsrMatrix gram_;
};

}  // namespace holo
