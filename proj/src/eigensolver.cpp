#include "holo/errors.hpp"
#include "holo/fem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace holo::fem {

namespace {

// Bilinear gauge: u <- u / sqrt(u^T G u).
void normalise(CVector& u, const CsrMatrix& gram) {
  const Complex q = bilinear(u, gram, u);
  if (std::abs(q) < 1e-300 || !std::isfinite(std::abs(q))) {
    throw ContinuationError("iterate is isotropic (u^T G u = 0); holomorphic normalisation undefined");
  }
  const Complex inv = 1.0 / std::sqrt(q);
  for (auto& v : u) v *= inv;
}

// ||Ku - lambda Mu|| / (||Ku|| + max(1, |lambda|) ||Mu||); the second term keeps
// the scale when lambda, and with it Ku, passes through zero.
double scaled_residual(const CVector& Ku, const CVector& Mu, const CVector& extra, Complex lambda) {
  double r = 0.0, k = 0.0, m = 0.0;
  for (std::size_t i = 0; i < Ku.size(); ++i) {
    const Complex ku = extra.empty() ? Ku[i] : Ku[i] + extra[i];
    r += std::norm(ku - lambda * Mu[i]);
    k += std::norm(Ku[i]);
    m += std::norm(Mu[i]);
  }
  return std::sqrt(r) / (std::sqrt(k) + std::max(1.0, std::abs(lambda)) * std::sqrt(m));
}

double relative_residual(const CsrMatrix& K, const CsrMatrix& M, const CVector& u, Complex lambda) {
  return scaled_residual(K * u, M * u, {}, lambda);
}

Complex rayleigh(const CsrMatrix& K, const CsrMatrix& M, const CVector& u) {
  return bilinear(u, K, u) / bilinear(u, M, u);
}

TridiagonalLU factor_shifted(const CsrMatrix& K, const CsrMatrix& M, Complex shift, double pivot_tol) {
  return TridiagonalLU(K.axpy(-shift, M).bands(), pivot_tol);
}

void fix_sign_unseeded(CVector& u, const CsrMatrix& gram) {
  const CVector Gu = gram * u;
  Complex s{};
  for (const auto& v : Gu) s += v;
  if (s.real() < 0.0) {
    for (auto& v : u) v = -v;
  }
}

}  // namespace

void align_sign(std::span<const Complex> ref, std::span<Complex> u, const CsrMatrix& gram) {
  if (hermitian(ref, gram, CVector(u.begin(), u.end())).real() < 0.0) {
    for (auto& v : u) v = -v;
  }
}

GroundPair ground_pair_linear(const CsrMatrix& K, const CsrMatrix& M, const CsrMatrix& gram,
                              const GroundPair* seed, const SolverOptions& opts) {
  if (!(opts.tol >= 1e-13)) throw DomainError("solver tolerance below 1e-13 is not attainable");
  const std::size_t n = K.dim();
  if (M.dim() != n || gram.dim() != n) throw DomainError("pencil dimensions differ");

  Complex shift;
  CVector u;
  if (seed != nullptr && seed->u.size() == n) {
    shift = seed->lambda - opts.seed_offset * std::max(1.0, std::abs(seed->lambda));
    u = seed->u;
  } else {
    seed = nullptr;
    shift = opts.cold_shift;
    u.assign(n, Complex(1.0));
  }
  normalise(u, gram);

  TridiagonalLU lu = factor_shifted(K, M, shift, opts.pivot_tol);
  bool refined = seed != nullptr;
  GroundPair out;
  int polish = -1;
  Complex lambda = rayleigh(K, M, u);
  double residual = relative_residual(K, M, u, lambda);

  for (int it = 1; it <= opts.max_iters; ++it) {
    CVector w = M * u;
    lu.solve(w);
    normalise(w, gram);
    align_sign(u, w, gram);
    u = std::move(w);
    lambda = rayleigh(K, M, u);
    residual = relative_residual(K, M, u, lambda);
    out.iterations = it;
    if (!std::isfinite(residual)) throw IterationError("inverse iteration diverged", residual);

    if (!refined && residual < 1e-3) {
      // Move the shift towards the eigenvalue once the branch is identified.
      shift += 0.9 * (lambda - shift);
      lu = factor_shifted(K, M, shift, opts.pivot_tol);
      refined = true;
    }
    if (polish < 0 && residual < opts.tol) polish = 0;
    if (polish >= 0 && polish++ >= opts.polish_iters) break;
  }
  if (polish < 0) {
    std::ostringstream msg;
    msg << "inverse iteration did not reach tol " << opts.tol << " in " << opts.max_iters
        << " iterations (residual " << residual << ")";
    throw IterationError(msg.str(), residual);
  }
  if (seed != nullptr) {
    align_sign(seed->u, u, gram);
  } else {
    fix_sign_unseeded(u, gram);
  }
  out.lambda = lambda;
  out.residual = relative_residual(K, M, u, lambda);
  out.norm_check = std::abs(bilinear(u, gram, u) - 1.0);
  out.u = std::move(u);
  return out;
}

SemilinearEnergy semilinear_energy(const Mesh1D& mesh, std::span<const Complex> a_mid,
                                   std::span<const Complex> b_mid, double eta, int p,
                                   std::span<const Complex> u) {
  SemilinearEnergy e;
  e.gradient = bilinear(u, stiffness(mesh, a_mid), u);
  e.potential = bilinear(u, mass(mesh, b_mid), u);
  e.nonlinear = eta == 0.0 ? Complex{} : eta * integral_power(mesh, u, p + 1);
  return e;
}

namespace {

CVector nonlinear_weights(const Mesh1D& mesh, const CVector& u, double eta, int p) {
  CVector w = eval_at_gauss(mesh, u);
  for (auto& v : w) v = eta * std::pow(v, p - 1);
  return w;
}

// Same scaling for K_lin u + eta g(u) - lambda M u, g_i = int u^p phi_i.
double semilinear_residual(const CsrMatrix& K_lin, const CsrMatrix& M, const CsrMatrix& W,
                           const CVector& u, Complex lambda) {
  return scaled_residual(K_lin * u, M * u, W * u, lambda);
}

}  // namespace

GroundPair ground_pair_semilinear(const Mesh1D& mesh, std::span<const Complex> a_mid,
                                  std::span<const Complex> b_mid, double eta, int p,
                                  const GroundPair* seed, const SemilinearOptions& opts) {
  if (eta < 0.0 || !std::isfinite(eta)) throw DomainError("eta must be non-negative");
  if (p != 1 && p != 3 && p != 5) throw DomainError("p must be 1, 3 or 5");
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) throw DomainError("damping must lie in (0, 1]");

  const CsrMatrix K_lin = stiffness(mesh, a_mid).axpy(1.0, mass(mesh, b_mid));
  const std::vector<Complex> ones(mesh.n_cells(), Complex(1.0));
  const CsrMatrix M = mass(mesh, ones);
  if (eta == 0.0 || p == 1) {
    // p = 1 is linear: eta u^p = eta u is a constant potential shift.
    const CsrMatrix K = p == 1 && eta != 0.0 ? K_lin.axpy(eta, M) : K_lin;
    return ground_pair_linear(K, M, M, seed, opts.linear);
  }

  GroundPair cur = seed != nullptr && seed->u.size() == mesh.interior_dofs()
                       ? *seed
                       : ground_pair_linear(K_lin, M, M, nullptr, opts.linear);
  int total_iters = cur.iterations;
  double residual = 0.0;
  for (int k = 1; k <= opts.max_scf; ++k) {
    const CsrMatrix W = weighted_mass(mesh, nonlinear_weights(mesh, cur.u, eta, p));
    const CsrMatrix K = K_lin.axpy(1.0, W);
    GroundPair next = ground_pair_linear(K, M, M, &cur, opts.linear);
    total_iters += next.iterations;

    CVector mixed(cur.u.size());
    for (std::size_t i = 0; i < mixed.size(); ++i) {
      mixed[i] = (1.0 - opts.damping) * cur.u[i] + opts.damping * next.u[i];
    }
    normalise(mixed, M);
    align_sign(cur.u, mixed, M);
    cur.u = std::move(mixed);

    const SemilinearEnergy e = semilinear_energy(mesh, a_mid, b_mid, eta, p, cur.u);
    cur.lambda = e.total();
    const CsrMatrix W_new = weighted_mass(mesh, nonlinear_weights(mesh, cur.u, eta, p));
    residual = semilinear_residual(K_lin, M, W_new, cur.u, cur.lambda);
    if (!std::isfinite(residual)) throw IterationError("self-consistent iteration diverged", residual);
    if (residual < opts.tol) {
      cur.residual = residual;
      cur.norm_check = std::abs(bilinear(cur.u, M, cur.u) - 1.0);
      cur.iterations = total_iters;
      if (seed == nullptr) fix_sign_unseeded(cur.u, M);
      return cur;
    }
  }
  std::ostringstream msg;
  msg << "self-consistent iteration did not converge in " << opts.max_scf << " steps (residual " << residual
      << ")";
  throw IterationError(msg.str(), residual);
}

double second_eigenvalue(const CsrMatrix& K, const CsrMatrix& M, const GroundPair& ground,
                         const SolverOptions& opts) {
  const std::size_t n = K.dim();
  const CVector Mg = M * ground.u;
  const Complex gMg = bilinear(ground.u, M, ground.u);
  auto deflate = [&](CVector& v) {
    Complex c{};
    for (std::size_t i = 0; i < n; ++i) c += Mg[i] * v[i];
    c /= gMg;
    for (std::size_t i = 0; i < n; ++i) v[i] -= c * ground.u[i];
  };
  const TridiagonalLU lu = factor_shifted(K, M, opts.cold_shift, opts.pivot_tol);
  CVector u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = std::cos(3.0 * static_cast<double>(i) + 0.3);
  deflate(u);
  Complex lambda{};
  for (int it = 0; it < opts.max_iters; ++it) {
    CVector w = M * u;
    lu.solve(w);
    deflate(w);
    const double nw = norm2(w);
    for (auto& v : w) v /= nw;
    u = std::move(w);
    lambda = rayleigh(K, M, u);
    if (relative_residual(K, M, u, lambda) < std::max(opts.tol, 1e-9)) return lambda.real();
  }
  throw IterationError("second eigenvalue iteration did not converge", relative_residual(K, M, u, lambda));
}

}  // namespace holo::fem
