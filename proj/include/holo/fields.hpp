#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace holo::fields {

using Complex = std::complex<double>;
using SpatialFn = std::function<double(double)>;

enum class ModeShape {
  Fourier,   ///< sin(j pi x)
  Bump,      ///< hat of height 1 centred at (j - 1/2)/s, half-width 1/s
  Constant,  ///< identically 1 (spatially flat mode)
};

ModeShape parse_mode_shape(std::string_view name);
std::string_view to_string(ModeShape shape);

/// phi(x, y) = phi_0(x) + sum_{j < s} y_j phi_j(x) on the truncation s.
///
/// Amplitudes c_j = ||phi_j||_inf are cached at construction. Immutable
/// afterwards, so concurrent evaluation is safe.
class AffineField {
 public:
  AffineField(SpatialFn phi0, std::vector<SpatialFn> modes, std::vector<double> amplitudes);

  /// Non-parametric field phi(x, y) = value.
  static AffineField constant(double value);

  /// Amplitudes taken as the sampled sup-norm over `sample_points`.
  static AffineField sampled(SpatialFn phi0, std::vector<SpatialFn> modes,
                             std::span<const double> sample_points);

  double base(double x) const { return phi0_(x); }
  double mode(std::size_t j, double x) const { return modes_.at(j)(x); }
  std::size_t truncation() const noexcept { return modes_.size(); }
  bool parametric() const noexcept { return !modes_.empty(); }
  const std::vector<double>& amplitudes() const noexcept { return amplitudes_; }

  /// Nodewise phi_0(x) + sum_{j < y.size()} y_j phi_j(x); throws DomainError if
  /// y is longer than the truncation.
  std::vector<Complex> eval(std::span<const Complex> y, std::span<const double> x) const;

 private:
  SpatialFn phi0_;
  std::vector<SpatialFn> modes_;
  std::vector<double> amplitudes_;
};

/// Field values frozen on a fixed point set; the hot path of every solve.
struct FieldTable {
  std::vector<double> base;                ///< phi_0 at each point
  std::vector<std::vector<double>> modes;  ///< modes[j][i] = phi_j(x_i)

  FieldTable() = default;
  FieldTable(const AffineField& field, std::span<const double> x);

  std::size_t points() const noexcept { return base.size(); }
  /// Coordinates of y beyond the stored modes are ignored (truncated away).
  void eval(std::span<const Complex> y, std::vector<Complex>& out) const;
};

struct DecaySpec {
  double base = 1.0;
  double amplitude = 0.0;
  double sigma = 2.0;
  std::size_t s = 0;
  ModeShape shape = ModeShape::Fourier;
  /// Enforce base > amplitude * sum_j j^-sigma (coefficients A and C).
  bool require_positive = true;
};

/// phi_0 = base, phi_j = amplitude j^-sigma shape_j with c_j = amplitude j^-sigma.
/// amplitude == 0 yields a constant field with no modes.
AffineField make_decay_field(const DecaySpec& spec);

/// Nodes plus cell midpoints of a uniform grid with n_cells cells on [0, 1].
std::vector<double> sampling_grid(std::size_t n_cells);

struct FieldAssumptions {
  double A_low = 0, C_low = 0, D_low = 0;  ///< certified lower bounds, D = min(A, C)
  double A_bar = 0, B_bar = 0, C_bar = 0;  ///< sup-norm upper bounds over the cube
  std::size_t s = 0;
  std::size_t sample_points = 0;
};

/// Worst-case bounds over y in [-1,1]^s, evaluated pointwise on sample_points.
/// Throws AssumptionError (carrying the node) if the lower bound of A or C is
/// not positive.
FieldAssumptions verify_assumptions(const AffineField& A, const AffineField& B,
                                    const AffineField& C, std::size_t s,
                                    std::span<const double> sample_points);

/// c_j = max of the amplitudes of the given fields (missing modes count as 0).
std::vector<double> combined_amplitudes(std::span<const AffineField* const> fields, std::size_t s);

}  // namespace holo::fields
