#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace holo::fem {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

/// P1 mesh of [0, 1] with homogeneous Dirichlet ends; unknowns live on the
/// n_cells - 1 interior nodes.
class Mesh1D {
 public:
  explicit Mesh1D(std::vector<double> nodes);
  static Mesh1D uniform(std::size_t n_cells);

  std::size_t n_cells() const noexcept { return nodes_.size() - 1; }
  std::size_t interior_dofs() const noexcept { return nodes_.size() - 2; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  double width(std::size_t cell) const { return nodes_[cell + 1] - nodes_[cell]; }
  double h() const noexcept { return h_; }
  std::vector<double> midpoints() const;
  std::vector<double> interior_nodes() const;

 private:
  std::vector<double> nodes_;
  double h_ = 0.0;
};

struct Tridiagonal {
  CVector sub;   ///< sub[i]  = A(i+1, i)
  CVector diag;  ///< diag[i] = A(i, i)
  CVector sup;   ///< sup[i]  = A(i, i+1)
};

/// Square sparse matrix in CSR layout with complex entries.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t dim, std::vector<std::size_t> row_offsets, std::vector<std::size_t> cols,
            CVector values);
  static CsrMatrix from_bands(const Tridiagonal& t);

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<std::size_t>& row_offsets() const noexcept { return row_offsets_; }
  const std::vector<std::size_t>& cols() const noexcept { return cols_; }
  const CVector& values() const noexcept { return values_; }

  Complex at(std::size_t i, std::size_t j) const;
  void multiply(std::span<const Complex> x, std::span<Complex> y) const;
  CVector operator*(std::span<const Complex> x) const;

  /// this + scale * other; both must share one sparsity pattern.
  CsrMatrix axpy(Complex scale, const CsrMatrix& other) const;

  bool structurally_symmetric() const;
  /// max |A(i,j) - A(j,i)|, i.e. distance from complex symmetry (not Hermitian).
  double asymmetry() const;
  Tridiagonal bands() const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> cols_;
  CVector values_;
};

/// Gaussian elimination with partial pivoting on a tridiagonal matrix.
class TridiagonalLU {
 public:
  /// Throws ContinuationError if a pivot falls below pivot_tol * max|diag|.
  explicit TridiagonalLU(Tridiagonal t, double pivot_tol = 1e-14);
  void solve(std::span<Complex> rhs) const;
  std::size_t dim() const noexcept { return d_.size(); }

 private:
  CVector dl_, d_, du_, du2_;
  std::vector<unsigned char> swapped_;
};

struct SystemMatrices {
  CsrMatrix K;  ///< stiffness(A) + mass(B)
  CsrMatrix M;  ///< mass(C)
};

/// Piecewise-constant coefficients given at cell midpoints.
CsrMatrix stiffness(const Mesh1D& mesh, std::span<const Complex> a_mid);
CsrMatrix mass(const Mesh1D& mesh, std::span<const Complex> c_mid);
SystemMatrices assemble(const Mesh1D& mesh, std::span<const Complex> a_mid,
                        std::span<const Complex> b_mid, std::span<const Complex> c_mid);

/// Four-point Gauss-Legendre rule per cell (exact for polynomial degree 7).
inline constexpr std::size_t kGaussPoints = 4;
std::vector<double> gauss_points(const Mesh1D& mesh);
/// P1 function (interior coefficients u) evaluated at gauss_points(mesh).
CVector eval_at_gauss(const Mesh1D& mesh, std::span<const Complex> u);
/// int w phi_i phi_j with w sampled at gauss_points(mesh).
CsrMatrix weighted_mass(const Mesh1D& mesh, std::span<const Complex> w_gauss);
/// int u^q over [0,1] for the P1 function u, exact for q <= 7.
Complex integral_power(const Mesh1D& mesh, std::span<const Complex> u, int q);

Complex bilinear(std::span<const Complex> x, const CsrMatrix& A, std::span<const Complex> y);
Complex hermitian(std::span<const Complex> x, const CsrMatrix& A, std::span<const Complex> y);
double norm2(std::span<const Complex> x);

/// Discrete H^1_0 seminorm sqrt(u^H K_0 u) with K_0 the unit-coefficient stiffness.
double hnorm(std::span<const Complex> u, const Mesh1D& mesh);

struct SolverOptions {
  double tol = 1e-10;           ///< ||Ku - lambda Mu|| / (||Ku|| + max(1, |lambda|) ||Mu||)
  int max_iters = 500;
  double cold_shift = 0.0;      ///< shift for unseeded solves, below the ground eigenvalue
  int polish_iters = 2;         ///< extra sweeps after the tolerance is met
  double pivot_tol = 1e-14;
  double seed_offset = 1e-7;    ///< relative offset of the seeded shift below seed lambda
};

/// Ground eigenpair of K u = lambda M u.
///
/// u is normalised by the bilinear gauge u^T G u = 1 with G the L2 Gram
/// matrix, which coincides with ||u||_{L2} = 1 for real data and continues
/// holomorphically for complex coefficients. Unseeded solves fix the sign by
/// Re sum(G u) > 0; seeded solves align with the seed.
struct GroundPair {
  Complex lambda{};
  CVector u;
  double residual = 0.0;    ///< relative residual at return
  double norm_check = 0.0;  ///< |u^T G u - 1|
  int iterations = 0;
};

/// Shifted inverse iteration with a tridiagonal LU. With a seed, the shift
/// sits just below seed->lambda and the iteration starts from seed->u, which
/// tracks one analytic branch under small parameter steps.
GroundPair ground_pair_linear(const CsrMatrix& K, const CsrMatrix& M, const CsrMatrix& gram,
                              const GroundPair* seed, const SolverOptions& opts);
inline GroundPair ground_pair_linear(const CsrMatrix& K, const CsrMatrix& M,
                                     const GroundPair* seed, const SolverOptions& opts) {
  return ground_pair_linear(K, M, M, seed, opts);
}

/// Flip u when Re(ref^H G u) < 0.
void align_sign(std::span<const Complex> ref, std::span<Complex> u, const CsrMatrix& gram);

struct SemilinearOptions {
  SolverOptions linear{};
  double damping = 0.5;  ///< mixing weight theta of the new iterate
  int max_scf = 500;
  double tol = 1e-10;    ///< relative residual of the full nonlinear equation
};

/// Terms of lambda = int A |u'|^2 + int B u^2 + eta int u^{p+1} at a given u.
struct SemilinearEnergy {
  Complex gradient, potential, nonlinear;
  Complex total() const { return gradient + potential + nonlinear; }
};

SemilinearEnergy semilinear_energy(const Mesh1D& mesh, std::span<const Complex> a_mid,
                                   std::span<const Complex> b_mid, double eta, int p,
                                   std::span<const Complex> u);

/// Ground state of -(A u')' + B u + eta u^p = lambda u, ||u||_{L2} = 1, by damped
/// self-consistent iteration on the linearisation eta u_k^{p-1} u. lambda is
/// reported through the energy identity.
GroundPair ground_pair_semilinear(const Mesh1D& mesh, std::span<const Complex> a_mid,
                                  std::span<const Complex> b_mid, double eta, int p,
                                  const GroundPair* seed, const SemilinearOptions& opts);

/// Second eigenvalue of a real pencil by M-deflated inverse iteration;
/// diagnostic only (gap report).
double second_eigenvalue(const CsrMatrix& K, const CsrMatrix& M, const GroundPair& ground,
                         const SolverOptions& opts);

}  // namespace holo::fem
