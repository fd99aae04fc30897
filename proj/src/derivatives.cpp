#include "holo/derivatives.hpp"

#include "holo/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

namespace holo::deriv {

Method parse_method(std::string_view name) {
  if (name == "fd") return Method::FD;
  if (name == "cheb") return Method::Chebyshev;
  if (name == "contour") return Method::Contour;
  throw ConfigError("unknown derivative method '" + std::string(name) + "' (expected fd|cheb|contour)");
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::FD: return "fd";
    case Method::Chebyshev: return "cheb";
    case Method::Contour: return "contour";
  }
  return "?";
}

unsigned MultiIndex::order() const {
  unsigned n = 0;
  for (const auto& e : entries) n += e.second;
  return n;
}

double MultiIndex::factorial() const {
  double f = 1.0;
  for (const auto& e : entries) f *= std::tgamma(static_cast<double>(e.second) + 1.0);
  return f;
}

MultiIndex MultiIndex::parse_dense(std::string_view text) {
  MultiIndex nu;
  std::size_t j = 0;
  while (!text.empty()) {
    const std::size_t comma = text.find(',');
    std::string_view tok = text.substr(0, comma);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    unsigned v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      throw ConfigError("bad multi-index entry '" + std::string(tok) + "'");
    }
    if (v > 0) nu.entries.emplace_back(j, v);
    ++j;
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return nu;
}

std::string MultiIndex::str() const {
  std::size_t len = 0;
  for (const auto& e : entries) len = std::max(len, e.first + 1);
  std::vector<unsigned> dense(std::max<std::size_t>(len, 1), 0);
  for (const auto& e : entries) dense[e.first] = e.second;
  std::string out;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(dense[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double gram_norm(const ParametricProblem& pb, std::span<const Complex> u) {
  return std::sqrt(std::abs(fem::hermitian(u, pb.gram(), u)));
}

double overlap(const ParametricProblem& pb, const CVector& a, const CVector& b) {
  return std::abs(fem::hermitian(a, pb.gram(), b)) / (gram_norm(pb, a) * gram_norm(pb, b));
}

CVector lerp(std::span<const Complex> a, std::span<const Complex> b, double t) {
  CVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + t * (b[i] - a[i]);
  return out;
}

double distance(std::span<const Complex> a, std::span<const Complex> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

CVector padded(std::span<const double> y, std::size_t s) {
  if (y.size() > s) throw DomainError("parameter longer than the truncation");
  CVector out(s);
  std::copy(y.begin(), y.end(), out.begin());
  return out;
}

double factorial(unsigned n) { return std::tgamma(static_cast<double>(n) + 1.0); }

constexpr double kClosureTol = 1e-9;

}  // namespace

fem::GroundPair continue_path(const ParametricProblem& problem, const fem::GroundPair& start,
                              std::span<const Complex> y_from, std::span<const Complex> y_to,
                              double max_step) {
  if (y_from.size() != y_to.size()) throw DomainError("continuation endpoints differ in length");
  const double len = distance(y_from, y_to);
  if (len == 0.0) return start;
  const double base_dt = std::min(1.0, max_step / len);
  const double min_dt = base_dt * 1e-6;
  double t = 0.0, dt = base_dt;
  fem::GroundPair cur = start;
  while (t < 1.0) {
    const double t_next = std::min(1.0, t + dt);
    const CVector y = lerp(y_from, y_to, t_next);
    bool ok = false;
    fem::GroundPair next;
    try {
      next = problem.solve(y, &cur);
      ok = overlap(problem, cur.u, next.u) >= 0.9;
    } catch (const ContinuationError&) {
    } catch (const IterationError&) {
    }
    if (!ok) {
      dt *= 0.5;
      if (dt < min_dt) {
        std::ostringstream msg;
        msg << "continuation stalled at t = " << t << " of a path of length " << len;
        throw ContinuationError(msg.str());
      }
      continue;
    }
    cur = std::move(next);
    t = t_next;
    dt = std::min(base_dt, 2.0 * dt);
  }
  return cur;
}

// ---------------------------------------------------------------------------

namespace {

struct Sample {
  Complex lambda;
  CVector u;
};

struct Circle {
  std::vector<Sample> points;  // q = 0..Q-1
  double closure = 0.0;
};

// Values on y + r e^{2 pi i q / Q} e_j reached by continuation from (y, at_y).
Circle run_circle(const ParametricProblem& pb, const CVector& y, const fem::GroundPair& at_y, std::size_t j,
                  double r, std::size_t Q, std::size_t substeps) {
  if (j >= y.size()) throw DomainError("contour coordinate outside the truncation");
  if (!(r > 0.0)) throw DomainError("contour radius must be positive");
  Circle c;
  c.points.reserve(Q);
  CVector z = y;
  z[j] = y[j] + r;
  fem::GroundPair pair;
  try {
    pair = continue_path(pb, at_y, y, z, 0.05);
  } catch (const ContinuationError& e) {
    throw ContourError("radial continuation to radius " + std::to_string(r) + " failed: " + e.what());
  }
  const fem::GroundPair first = pair;
  const double chord = 2.0 * r * std::sin(std::numbers::pi / static_cast<double>(Q));
  const double step = chord / static_cast<double>(std::max<std::size_t>(substeps, 1)) * (1.0 + 1e-12);
  for (std::size_t q = 0; q < Q; ++q) {
    c.points.push_back({pair.lambda, pair.u});
    CVector w = y;
    w[j] = y[j] + std::polar(r, 2.0 * std::numbers::pi * static_cast<double>(q + 1) / static_cast<double>(Q));
    try {
      pair = continue_path(pb, pair, z, w, step);
    } catch (const ContinuationError& e) {
      throw ContourError("continuation around the circle of radius " + std::to_string(r) + " failed: " +
                         e.what());
    }
    z = std::move(w);
  }
  c.closure = std::abs(pair.lambda - first.lambda) / std::max(1.0, std::abs(first.lambda)) +
              distance(pair.u, first.u) / std::max(1e-300, fem::norm2(first.u));
  if (!(c.closure <= kClosureTol)) {
    std::ostringstream msg;
    msg << "contour loop did not close (mismatch " << c.closure << ") at radius " << r
        << "; shrink the radius";
    throw ContourError(msg.str());
  }
  return c;
}

void check_spec(const ContourSpec& spec, unsigned n_max) {
  const std::size_t Q = spec.Q;
  if (Q < 32 || (Q & (Q - 1)) != 0) throw DomainError("contour Q must be a power of two >= 32");
  if (Q < 4 * static_cast<std::size_t>(n_max)) throw DomainError("contour Q must be >= 4 * max order");
}

// Trapezoid Fourier coefficient sum_q f_q w^{-q n} / Q over every `stride`-th point.
template <class F>
Complex fourier(std::size_t Q, std::size_t stride, unsigned n, F&& f) {
  Complex acc{};
  std::size_t count = 0;
  for (std::size_t q = 0; q < Q; q += stride, ++count) {
    acc += f(q) * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(q * n) / static_cast<double>(Q));
  }
  return acc / static_cast<double>(count);
}

}  // namespace

ContourResult deriv_contour(const ParametricProblem& problem, std::span<const double> y,
                            const ContourSpec& spec, unsigned n_max) {
  check_spec(spec, n_max);
  const CVector yc = padded(y, problem.s());
  const fem::GroundPair base = problem.solve(yc);
  const Circle c = run_circle(problem, yc, base, spec.j, spec.radius, spec.Q, spec.substeps);
  const std::size_t Q = spec.Q, dofs = base.u.size();
  double fmax = 0.0;
  for (const auto& p : c.points) fmax = std::max(fmax, std::abs(p.lambda));

  ContourResult out;
  out.loop_closure = c.closure;
  for (unsigned n = 0; n <= n_max; ++n) {
    const double scale = factorial(n) / std::pow(spec.radius, n);
    Entry e;
    e.nu = MultiIndex::single(spec.j, n);
    e.method = Method::Contour;
    const Complex full = fourier(Q, 1, n, [&](std::size_t q) { return c.points[q].lambda; });
    const Complex half = fourier(Q, 2, n, [&](std::size_t q) { return c.points[q].lambda; });
    e.d_lambda = scale * full;
    e.est_error = scale * (std::abs(full - half) + 1e-13 * fmax);
    CVector du(dofs), du_half(dofs);
    double umax = 0.0;
    for (std::size_t i = 0; i < dofs; ++i) {
      du[i] = scale * fourier(Q, 1, n, [&](std::size_t q) { return c.points[q].u[i]; });
      du_half[i] = scale * fourier(Q, 2, n, [&](std::size_t q) { return c.points[q].u[i]; });
    }
    for (const auto& p : c.points) umax = std::max(umax, problem.hnorm(p.u));
    CVector diff(dofs);
    for (std::size_t i = 0; i < dofs; ++i) diff[i] = du[i] - du_half[i];
    e.hnorm_du = problem.hnorm(du);
    e.est_error_u = problem.hnorm(diff) + scale * problem.solver_options().tol * umax;
    if (n == 0) out.mean_value_gap = std::abs(full - base.lambda);
    out.entries.push_back(std::move(e));
  }
  return out;
}

Entry deriv_mixed(const ParametricProblem& problem, std::span<const double> y, const MultiIndex& nu,
                  std::span<const ContourSpec> specs) {
  if (nu.support() == 0) throw DomainError("mixed derivative needs a non-empty multi-index");
  if (nu.support() > 2) throw DomainError("mixed derivatives support at most two coordinates");
  if (specs.size() != nu.support()) throw DomainError("one contour spec per support coordinate required");
  for (std::size_t k = 0; k < specs.size(); ++k) {
    if (specs[k].j != nu.entries[k].first) throw DomainError("contour spec coordinate does not match nu");
    check_spec(specs[k], nu.entries[k].second);
  }
  if (nu.support() == 1) {
    ContourResult r = deriv_contour(problem, y, specs[0], nu.entries[0].second);
    return r.entries.back();
  }

  const CVector yc = padded(y, problem.s());
  const fem::GroundPair base = problem.solve(yc);
  const ContourSpec& sa = specs[0];
  const ContourSpec& sb = specs[1];
  const unsigned na = nu.entries[0].second, nb = nu.entries[1].second;

  // Outer circle in coordinate a; at each outer point an inner circle in b.
  const Circle outer = run_circle(problem, yc, base, sa.j, sa.radius, sa.Q, sa.substeps);
  std::vector<Circle> inner;
  inner.reserve(sa.Q);
  for (std::size_t q = 0; q < sa.Q; ++q) {
    CVector z = yc;
    z[sa.j] = yc[sa.j] + std::polar(sa.radius, 2.0 * std::numbers::pi * static_cast<double>(q) /
                                                   static_cast<double>(sa.Q));
    fem::GroundPair at{outer.points[q].lambda, outer.points[q].u, 0.0, 0.0, 0};
    inner.push_back(run_circle(problem, z, at, sb.j, sb.radius, sb.Q, sb.substeps));
  }

  const std::size_t dofs = base.u.size();
  auto coefficient = [&](std::size_t stride, auto&& value) {
    Complex acc{};
    std::size_t count = 0;
    for (std::size_t qa = 0; qa < sa.Q; qa += stride) {
      const Complex wa = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(qa * na) /
                                             static_cast<double>(sa.Q));
      for (std::size_t qb = 0; qb < sb.Q; qb += stride, ++count) {
        const Complex wb = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(qb * nb) /
                                               static_cast<double>(sb.Q));
        acc += value(qa, qb) * wa * wb;
      }
    }
    return acc / static_cast<double>(count);
  };
  const double scale = factorial(na) * factorial(nb) / (std::pow(sa.radius, na) * std::pow(sb.radius, nb));
  double fmax = 0.0, umax = 0.0;
  for (const auto& c : inner) {
    for (const auto& p : c.points) {
      fmax = std::max(fmax, std::abs(p.lambda));
      umax = std::max(umax, problem.hnorm(p.u));
    }
  }

  Entry e;
  e.nu = nu;
  e.method = Method::Contour;
  const Complex full = coefficient(1, [&](std::size_t a, std::size_t b) { return inner[a].points[b].lambda; });
  const Complex half = coefficient(2, [&](std::size_t a, std::size_t b) { return inner[a].points[b].lambda; });
  e.d_lambda = scale * full;
  e.est_error = scale * (std::abs(full - half) + 1e-13 * fmax);
  CVector du(dofs), diff(dofs);
  for (std::size_t i = 0; i < dofs; ++i) {
    const Complex f = coefficient(1, [&](std::size_t a, std::size_t b) { return inner[a].points[b].u[i]; });
    const Complex h = coefficient(2, [&](std::size_t a, std::size_t b) { return inner[a].points[b].u[i]; });
    du[i] = scale * f;
    diff[i] = scale * (f - h);
  }
  e.hnorm_du = problem.hnorm(du);
  e.est_error_u = problem.hnorm(diff) + scale * problem.solver_options().tol * umax;
  return e;
}

double radius_estimate(const ParametricProblem& problem, std::span<const double> y, std::size_t j,
                       const RadiusOptions& opts) {
  const CVector yc = padded(y, problem.s());
  const fem::GroundPair base = problem.solve(yc);
  auto closes = [&](double r) {
    try {
      const Circle c = run_circle(problem, yc, base, j, r, opts.Q, 1);
      Complex mean{};
      for (const auto& p : c.points) mean += p.lambda;
      mean /= static_cast<double>(c.points.size());
      return std::abs(mean - base.lambda) <= 1e-8 * std::max(1.0, std::abs(base.lambda));
    } catch (const ContourError&) {
      return false;
    }
  };
  double good = 0.0, bad = 0.0;
  double r = opts.r0;
  if (closes(r)) {
    good = r;
    while (true) {
      r = std::min(2.0 * r, opts.cap);
      if (!closes(r)) {
        bad = r;
        break;
      }
      good = r;
      if (r >= opts.cap) return opts.cap;
    }
  } else {
    bad = r;
    while (r > opts.r0 * 1e-3) {
      r *= 0.5;
      if (closes(r)) {
        good = r;
        break;
      }
      bad = r;
    }
    if (good == 0.0) return 0.0;
  }
  for (int k = 0; k < opts.bisections; ++k) {
    const double mid = 0.5 * (good + bad);
    (closes(mid) ? good : bad) = mid;
  }
  return good;
}

// ---------------------------------------------------------------------------

namespace {

struct Stencil {
  int half;
  std::vector<double> w;  // offsets -half..half
};

Stencil fd_stencil(unsigned n) {
  switch (n) {
    case 1: return {2, {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12}};
    case 2: return {2, {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12}};
    case 3: return {3, {1.0 / 8, -1.0, 13.0 / 8, 0.0, -13.0 / 8, 1.0, -1.0 / 8}};
    case 4: return {3, {-1.0 / 6, 2.0, -39.0 / 6, 56.0 / 6, -39.0 / 6, 2.0, -1.0 / 6}};
  }
  throw DomainError("finite differences support orders 1..4");
}

}  // namespace

std::vector<Entry> deriv_fd(const ParametricProblem& problem, std::span<const double> y, std::size_t j,
                            unsigned n_max, const FdOptions& opts) {
  if (n_max < 1 || n_max > 4) throw DomainError("finite differences support orders 1..4");
  if (!(opts.h > 0.0)) throw DomainError("finite-difference step must be positive");
  const CVector yc = padded(y, problem.s());
  if (j >= yc.size()) throw DomainError("coordinate outside the truncation");
  const int reach = n_max <= 2 ? 2 : 3;
  const double yj = yc[j].real();
  if (yj - reach * opts.h < -1.0 - 1e-15 || yj + reach * opts.h > 1.0 + 1e-15) {
    std::ostringstream msg;
    msg << "finite-difference stencil y_" << j + 1 << " +- " << reach << " * " << opts.h
        << " leaves the parameter cube";
    throw DomainError(msg.str());
  }

  // Offsets in units of h/2; the h-stencil uses even offsets only.
  std::map<int, fem::GroundPair> cache;
  auto at = [&](int half_steps) -> const fem::GroundPair& {
    auto it = cache.find(half_steps);
    if (it != cache.end()) return it->second;
    CVector z = yc;
    z[j] = yj + 0.5 * opts.h * half_steps;
    return cache.emplace(half_steps, problem.solve(z)).first->second;
  };

  const std::size_t dofs = at(0).u.size();
  std::vector<Entry> out;
  for (unsigned n = 1; n <= n_max; ++n) {
    const Stencil st = fd_stencil(n);
    Complex coarse{}, fine{};
    CVector u_coarse(dofs), u_fine(dofs);
    double wsum = 0.0, fmax = 0.0, umax = 0.0;
    for (int m = -st.half; m <= st.half; ++m) {
      const double w = st.w[m + st.half];
      wsum += std::abs(w);
      const fem::GroundPair& pc = at(2 * m);
      const fem::GroundPair& pf = at(m);
      coarse += w * pc.lambda;
      fine += w * pf.lambda;
      fmax = std::max({fmax, std::abs(pc.lambda), std::abs(pf.lambda)});
      umax = std::max(umax, problem.hnorm(pf.u));
      for (std::size_t i = 0; i < dofs; ++i) {
        u_coarse[i] += w * pc.u[i];
        u_fine[i] += w * pf.u[i];
      }
    }
    const double hc = std::pow(opts.h, n), hf = std::pow(0.5 * opts.h, n);
    coarse /= hc;
    fine /= hf;
    CVector diff(dofs);
    for (std::size_t i = 0; i < dofs; ++i) {
      u_coarse[i] /= hc;
      u_fine[i] /= hf;
      diff[i] = u_fine[i] - u_coarse[i];
    }
    Entry e;
    e.nu = MultiIndex::single(j, n);
    e.method = Method::FD;
    e.d_lambda = fine;
    e.est_error = std::abs(fine - coarse) / 15.0 + 1e-13 * fmax * wsum / hf;
    e.hnorm_du = problem.hnorm(u_fine);
    e.est_error_u = problem.hnorm(diff) / 15.0 + problem.solver_options().tol * umax * wsum / hf;
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kChebDegree = 32;

// Coefficients of the Lobatto interpolant through values f_k at cos(pi k / N).
std::vector<double> cheb_coefficients(std::span<const double> f) {
  const std::size_t N = f.size() - 1;
  std::vector<double> c(N + 1, 0.0);
  for (std::size_t m = 0; m <= N; ++m) {
    double acc = 0.0;
    for (std::size_t k = 0; k <= N; ++k) {
      const double w = (k == 0 || k == N) ? 0.5 : 1.0;
      acc += w * f[k] * std::cos(std::numbers::pi * static_cast<double>(m * k) / static_cast<double>(N));
    }
    c[m] = 2.0 * acc / static_cast<double>(N);
  }
  c[0] *= 0.5;
  c[N] *= 0.5;
  return c;
}

std::vector<double> cheb_derivative(std::span<const double> c) {
  const std::size_t N = c.size() - 1;
  std::vector<double> d(N + 2, 0.0);
  for (std::size_t m = N; m >= 1; --m) d[m - 1] = d[m + 1] + 2.0 * static_cast<double>(m) * c[m];
  d[0] *= 0.5;
  d.resize(N + 1);
  return d;
}

double cheb_eval(std::span<const double> c, double x) {
  double t0 = 1.0, t1 = x, acc = c[0];
  if (c.size() > 1) acc += c[1] * x;
  for (std::size_t m = 2; m < c.size(); ++m) {
    const double t2 = 2.0 * x * t1 - t0;
    acc += c[m] * t2;
    t0 = t1;
    t1 = t2;
  }
  return acc;
}

// d^n/dx^n T_m at x = 1.
double cheb_endpoint_derivative(std::size_t m, unsigned n) {
  double v = 1.0;
  for (unsigned k = 0; k < n; ++k) {
    v *= (static_cast<double>(m * m) - static_cast<double>(k * k)) / (2.0 * k + 1.0);
  }
  return std::abs(v);
}

}  // namespace

std::vector<Entry> deriv_cheb(const ParametricProblem& problem, std::span<const double> y, std::size_t j,
                              unsigned n_max) {
  if (n_max < 1 || n_max > 6) throw DomainError("Chebyshev derivatives support orders 1..6");
  const CVector yc = padded(y, problem.s());
  if (j >= yc.size()) throw DomainError("coordinate outside the truncation");
  const double x = yc[j].real();
  const std::size_t N = kChebDegree;

  std::vector<fem::GroundPair> pairs;
  pairs.reserve(N + 1);
  for (std::size_t k = 0; k <= N; ++k) {
    CVector z = yc;
    z[j] = std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(N));
    pairs.push_back(problem.solve(z));
  }

  // w[n][k] = d^n l_k(x) for the Lagrange basis l_k of the Lobatto nodes.
  std::vector<std::vector<double>> w(n_max + 1, std::vector<double>(N + 1));
  for (std::size_t k = 0; k <= N; ++k) {
    std::vector<double> unit(N + 1, 0.0);
    unit[k] = 1.0;
    std::vector<double> c = cheb_coefficients(unit);
    for (unsigned n = 1; n <= n_max; ++n) {
      c = cheb_derivative(c);
      w[n][k] = cheb_eval(c, x);
    }
  }

  std::vector<double> lam(N + 1);
  double fmax = 0.0, umax = 0.0;
  for (std::size_t k = 0; k <= N; ++k) {
    lam[k] = pairs[k].lambda.real();
    fmax = std::max(fmax, std::abs(pairs[k].lambda));
    umax = std::max(umax, problem.hnorm(pairs[k].u));
  }
  const std::vector<double> coeff = cheb_coefficients(lam);
  const std::size_t dofs = pairs[0].u.size();
  // Tail coefficients of u, one vector per index m >= N - 3.
  std::vector<CVector> u_tail;
  for (std::size_t m = N - 3; m <= N; ++m) {
    CVector t(dofs);
    for (std::size_t i = 0; i < dofs; ++i) {
      std::vector<double> fi(N + 1);
      for (std::size_t k = 0; k <= N; ++k) fi[k] = pairs[k].u[i].real();
      t[i] = cheb_coefficients(fi)[m];
    }
    u_tail.push_back(std::move(t));
  }

  std::vector<Entry> out;
  for (unsigned n = 1; n <= n_max; ++n) {
    Complex d{};
    CVector du(dofs);
    double wsum = 0.0;
    for (std::size_t k = 0; k <= N; ++k) {
      d += w[n][k] * pairs[k].lambda;
      wsum += std::abs(w[n][k]);
      for (std::size_t i = 0; i < dofs; ++i) du[i] += w[n][k] * pairs[k].u[i];
    }
    double tail = 0.0, tail_u = 0.0;
    for (std::size_t m = N - 3; m <= N; ++m) {
      tail += std::abs(coeff[m]) * cheb_endpoint_derivative(m, n);
      tail_u += problem.hnorm(u_tail[m - (N - 3)]) * cheb_endpoint_derivative(m, n);
    }
    Entry e;
    e.nu = MultiIndex::single(j, n);
    e.method = Method::Chebyshev;
    e.d_lambda = d;
    e.est_error = tail + 1e-13 * fmax * wsum;
    e.hnorm_du = problem.hnorm(du);
    e.est_error_u = tail_u + problem.solver_options().tol * umax * wsum;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace holo::deriv
