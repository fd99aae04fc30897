#include "holo/fem.hpp"

#include "holo/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace holo::fem {

Mesh1D::Mesh1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 3) throw DomainError("mesh needs at least two cells");
  if (nodes_.front() != 0.0 || nodes_.back() != 1.0) {
    throw DomainError("mesh nodes must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) throw DomainError("mesh nodes must be strictly increasing");
    h_ = std::max(h_, nodes_[i] - nodes_[i - 1]);
  }
}

Mesh1D Mesh1D::uniform(std::size_t n_cells) {
  if (n_cells < 2) throw DomainError("mesh needs at least two cells");
  std::vector<double> nodes(n_cells + 1);
  for (std::size_t i = 0; i <= n_cells; ++i) {
    nodes[i] = static_cast<double>(i) / static_cast<double>(n_cells);
  }
  nodes.back() = 1.0;
  return Mesh1D(std::move(nodes));
}

std::vector<double> Mesh1D::midpoints() const {
  std::vector<double> mid(n_cells());
  for (std::size_t c = 0; c < mid.size(); ++c) mid[c] = 0.5 * (nodes_[c] + nodes_[c + 1]);
  return mid;
}

std::vector<double> Mesh1D::interior_nodes() const {
  return {nodes_.begin() + 1, nodes_.end() - 1};
}

// ---------------------------------------------------------------------------

CsrMatrix::CsrMatrix(std::size_t dim, std::vector<std::size_t> row_offsets,
                     std::vector<std::size_t> cols, CVector values)
    : dim_(dim), row_offsets_(std::move(row_offsets)), cols_(std::move(cols)), values_(std::move(values)) {
  if (row_offsets_.size() != dim_ + 1 || row_offsets_.back() != cols_.size() ||
      cols_.size() != values_.size()) {
    throw DomainError("inconsistent CSR arrays");
  }
}

CsrMatrix CsrMatrix::from_bands(const Tridiagonal& t) {
  const std::size_t n = t.diag.size();
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> cols;
  CVector vals;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      cols.push_back(i - 1);
      vals.push_back(t.sub[i - 1]);
    }
    cols.push_back(i);
    vals.push_back(t.diag[i]);
    if (i + 1 < n) {
      cols.push_back(i + 1);
      vals.push_back(t.sup[i]);
    }
    offsets.push_back(cols.size());
  }
  return CsrMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
}

Complex CsrMatrix::at(std::size_t i, std::size_t j) const {
  for (std::size_t k = row_offsets_.at(i); k < row_offsets_[i + 1]; ++k) {
    if (cols_[k] == j) return values_[k];
  }
  return {};
}

void CsrMatrix::multiply(std::span<const Complex> x, std::span<Complex> y) const {
  for (std::size_t i = 0; i < dim_; ++i) {
    Complex acc{};
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) acc += values_[k] * x[cols_[k]];
    y[i] = acc;
  }
}

CVector CsrMatrix::operator*(std::span<const Complex> x) const {
  CVector y(dim_);
  multiply(x, y);
  return y;
}

CsrMatrix CsrMatrix::axpy(Complex scale, const CsrMatrix& other) const {
  if (other.row_offsets_ != row_offsets_ || other.cols_ != cols_) {
    throw DomainError("axpy needs matrices with identical sparsity");
  }
  CsrMatrix out = *this;
  for (std::size_t k = 0; k < values_.size(); ++k) out.values_[k] += scale * other.values_[k];
  return out;
}

bool CsrMatrix::structurally_symmetric() const {
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const std::size_t j = cols_[k];
      bool found = false;
      for (std::size_t m = row_offsets_[j]; m < row_offsets_[j + 1]; ++m) found = found || cols_[m] == i;
      if (!found) return false;
    }
  }
  return true;
}

double CsrMatrix::asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      worst = std::max(worst, std::abs(values_[k] - at(cols_[k], i)));
    }
  }
  return worst;
}

Tridiagonal CsrMatrix::bands() const {
  Tridiagonal t;
  t.diag.assign(dim_, {});
  t.sub.assign(dim_ > 0 ? dim_ - 1 : 0, {});
  t.sup.assign(t.sub.size(), {});
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const std::size_t j = cols_[k];
      if (j == i) {
        t.diag[i] = values_[k];
      } else if (j + 1 == i) {
        t.sub[j] = values_[k];
      } else if (j == i + 1) {
        t.sup[i] = values_[k];
      } else if (values_[k] != Complex{}) {
        throw DomainError("matrix is not tridiagonal");
      }
    }
  }
  return t;
}

// ---------------------------------------------------------------------------

TridiagonalLU::TridiagonalLU(Tridiagonal t, double pivot_tol)
    : dl_(std::move(t.sub)), d_(std::move(t.diag)), du_(std::move(t.sup)) {
  const std::size_t n = d_.size();
  if (n == 0) throw DomainError("empty tridiagonal system");
  du2_.assign(n > 2 ? n - 2 : 0, {});
  swapped_.assign(n > 0 ? n - 1 : 0, 0);
  double scale = 0.0;
  for (const Complex& v : d_) scale = std::max(scale, std::abs(v));
  for (const Complex& v : dl_) scale = std::max(scale, std::abs(v));

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d_[i]) >= std::abs(dl_[i])) {
      if (d_[i] != Complex{}) {
        const Complex fact = dl_[i] / d_[i];
        dl_[i] = fact;
        d_[i + 1] -= fact * du_[i];
      }
    } else {
      const Complex fact = d_[i] / dl_[i];
      d_[i] = dl_[i];
      dl_[i] = fact;
      const Complex temp = du_[i];
      du_[i] = d_[i + 1];
      d_[i + 1] = temp - fact * d_[i + 1];
      if (i + 2 < n) {
        du2_[i] = du_[i + 1];
        du_[i + 1] = -fact * du_[i + 1];
      }
      swapped_[i] = 1;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(std::abs(d_[i]) >= pivot_tol * scale) || !std::isfinite(std::abs(d_[i]))) {
      throw ContinuationError("near-singular pivot " + std::to_string(std::abs(d_[i])) + " at row " +
                              std::to_string(i) + " (scale " + std::to_string(scale) +
                              "); continuation step too large or shift on an eigenvalue");
    }
  }
}

void TridiagonalLU::solve(std::span<Complex> b) const {
  const std::size_t n = d_.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!swapped_[i]) {
      b[i + 1] -= dl_[i] * b[i];
    } else {
      const Complex temp = b[i];
      b[i] = b[i + 1];
      b[i + 1] = temp - dl_[i] * b[i];
    }
  }
  b[n - 1] /= d_[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
  for (std::size_t k = n >= 2 ? n - 2 : 0; k-- > 0;) {
    b[k] = (b[k] - du_[k] * b[k + 1] - du2_[k] * b[k + 2]) / d_[k];
  }
}

// ---------------------------------------------------------------------------

namespace {

void check_coefficients(const Mesh1D& mesh, std::span<const Complex> v, const char* name) {
  if (v.size() != mesh.n_cells()) {
    throw AssemblyError(std::string("coefficient ") + name + " needs one value per cell (" +
                        std::to_string(mesh.n_cells()) + "), got " + std::to_string(v.size()));
  }
  for (std::size_t c = 0; c < v.size(); ++c) {
    if (!std::isfinite(v[c].real()) || !std::isfinite(v[c].imag())) {
      throw AssemblyError(std::string("non-finite coefficient ") + name + " in cell " + std::to_string(c));
    }
  }
}

// Adds the 2x2 element block [[e00, e01], [e01, e11]] of cell c to the bands.
void scatter(Tridiagonal& t, std::size_t c, std::size_t n_cells, Complex e00, Complex e01, Complex e11) {
  const bool left = c >= 1;               // node c is interior, dof c-1
  const bool right = c + 1 <= n_cells - 1;  // node c+1 is interior, dof c
  if (left) t.diag[c - 1] += e00;
  if (right) t.diag[c] += e11;
  if (left && right) {
    t.sub[c - 1] += e01;
    t.sup[c - 1] += e01;
  }
}

Tridiagonal zero_bands(std::size_t n) {
  return Tridiagonal{CVector(n - 1), CVector(n), CVector(n - 1)};
}

constexpr std::array<double, kGaussPoints> kGaussNodes = {-0.8611363115940526, -0.3399810435848563,
                                                          0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, kGaussPoints> kGaussWeights = {0.3478548451374538, 0.6521451548625461,
                                                            0.6521451548625461, 0.3478548451374538};

Complex node_value(std::span<const Complex> u, std::size_t node, std::size_t n_cells) {
  return (node == 0 || node == n_cells) ? Complex{} : u[node - 1];
}

}  // namespace

CsrMatrix stiffness(const Mesh1D& mesh, std::span<const Complex> a_mid) {
  check_coefficients(mesh, a_mid, "A");
  Tridiagonal t = zero_bands(mesh.interior_dofs());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const Complex k = a_mid[c] / mesh.width(c);
    scatter(t, c, mesh.n_cells(), k, -k, k);
  }
  return CsrMatrix::from_bands(t);
}

CsrMatrix mass(const Mesh1D& mesh, std::span<const Complex> c_mid) {
  check_coefficients(mesh, c_mid, "mass");
  Tridiagonal t = zero_bands(mesh.interior_dofs());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const Complex m = c_mid[c] * mesh.width(c) / 6.0;
    scatter(t, c, mesh.n_cells(), 2.0 * m, m, 2.0 * m);
  }
  return CsrMatrix::from_bands(t);
}

SystemMatrices assemble(const Mesh1D& mesh, std::span<const Complex> a_mid,
                        std::span<const Complex> b_mid, std::span<const Complex> c_mid) {
  check_coefficients(mesh, b_mid, "B");
  return {stiffness(mesh, a_mid).axpy(1.0, mass(mesh, b_mid)), mass(mesh, c_mid)};
}

std::vector<double> gauss_points(const Mesh1D& mesh) {
  std::vector<double> x;
  x.reserve(mesh.n_cells() * kGaussPoints);
  const auto& nodes = mesh.nodes();
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const double mid = 0.5 * (nodes[c] + nodes[c + 1]);
    const double half = 0.5 * mesh.width(c);
    for (double g : kGaussNodes) x.push_back(mid + half * g);
  }
  return x;
}

CVector eval_at_gauss(const Mesh1D& mesh, std::span<const Complex> u) {
  if (u.size() != mesh.interior_dofs()) throw DomainError("coefficient vector does not match mesh");
  CVector out;
  out.reserve(mesh.n_cells() * kGaussPoints);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const Complex ul = node_value(u, c, mesh.n_cells());
    const Complex ur = node_value(u, c + 1, mesh.n_cells());
    for (double g : kGaussNodes) {
      const double t = 0.5 * (g + 1.0);
      out.push_back((1.0 - t) * ul + t * ur);
    }
  }
  return out;
}

CsrMatrix weighted_mass(const Mesh1D& mesh, std::span<const Complex> w_gauss) {
  if (w_gauss.size() != mesh.n_cells() * kGaussPoints) {
    throw AssemblyError("weighted mass needs one weight per Gauss point");
  }
  Tridiagonal t = zero_bands(mesh.interior_dofs());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    Complex e00{}, e01{}, e11{};
    const double half = 0.5 * mesh.width(c);
    for (std::size_t q = 0; q < kGaussPoints; ++q) {
      const double t1 = 0.5 * (kGaussNodes[q] + 1.0);
      const double t0 = 1.0 - t1;
      const Complex w = w_gauss[c * kGaussPoints + q] * (kGaussWeights[q] * half);
      e00 += w * (t0 * t0);
      e01 += w * (t0 * t1);
      e11 += w * (t1 * t1);
    }
    scatter(t, c, mesh.n_cells(), e00, e01, e11);
  }
  return CsrMatrix::from_bands(t);
}

Complex integral_power(const Mesh1D& mesh, std::span<const Complex> u, int q) {
  const CVector ug = eval_at_gauss(mesh, u);
  Complex sum{};
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const double half = 0.5 * mesh.width(c);
    for (std::size_t k = 0; k < kGaussPoints; ++k) {
      sum += std::pow(ug[c * kGaussPoints + k], q) * (kGaussWeights[k] * half);
    }
  }
  return sum;
}

Complex bilinear(std::span<const Complex> x, const CsrMatrix& A, std::span<const Complex> y) {
  const CVector Ay = A * y;
  Complex s{};
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * Ay[i];
  return s;
}

Complex hermitian(std::span<const Complex> x, const CsrMatrix& A, std::span<const Complex> y) {
  const CVector Ay = A * y;
  Complex s{};
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * Ay[i];
  return s;
}

double norm2(std::span<const Complex> x) {
  double s = 0.0;
  for (const Complex& v : x) s += std::norm(v);
  return std::sqrt(s);
}

double hnorm(std::span<const Complex> u, const Mesh1D& mesh) {
  if (u.size() != mesh.interior_dofs()) throw DomainError("coefficient vector does not match mesh");
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const Complex d = node_value(u, c + 1, mesh.n_cells()) - node_value(u, c, mesh.n_cells());
    s += std::norm(d) / mesh.width(c);
  }
  return std::sqrt(s);
}

}  // namespace holo::fem
