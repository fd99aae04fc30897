#include "holo/qmc.hpp"

#include "holo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>

namespace holo::qmc {

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

double omega(double x) { return 2.0 * std::numbers::pi * std::numbers::pi * (x * x - x + 1.0 / 6.0); }

namespace {

std::vector<double> omega_table(std::uint32_t N) {
  std::vector<double> t(N);
  for (std::uint32_t m = 0; m < N; ++m) t[m] = omega(static_cast<double>(m) / static_cast<double>(N));
  return t;
}

void check_modulus(std::uint32_t N) {
  if (!is_prime(N)) throw DomainError("lattice modulus " + std::to_string(N) + " is not prime");
}

void check_weights(std::span<const double> w, std::size_t s) {
  if (w.size() < s) throw DomainError("one weight per coordinate required");
  for (std::size_t j = 0; j < s; ++j) {
    if (!(w[j] > 0.0)) throw DomainError("lattice weights must be positive");
  }
}

double unit(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

// Runs body(i) for i in [0, n) across up to `threads` workers.
template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& body) {
  threads = std::max<std::size_t>(1, std::min(threads == 0 ? worker_count() : threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex m;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) body(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

QmcEstimate pool(std::vector<double> means, std::size_t evaluations) {
  QmcEstimate e;
  const double R = static_cast<double>(means.size());
  double sum = 0.0;
  for (double m : means) sum += m;
  e.mean = sum / R;
  double var = 0.0;
  for (double m : means) var += (m - e.mean) * (m - e.mean);
  e.rms = means.size() > 1 ? std::sqrt(var / (R - 1.0)) / std::sqrt(R) : 0.0;
  e.shift_means = std::move(means);
  e.evaluations = evaluations;
  return e;
}

}  // namespace

double shift_averaged_error(std::uint32_t N, std::span<const std::uint32_t> z, std::span<const double> weights) {
  check_modulus(N);
  check_weights(weights, z.size());
  const auto om = omega_table(N);
  double sum = 0.0;
  for (std::uint32_t k = 0; k < N; ++k) {
    double prod = 1.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      prod *= 1.0 + weights[j] * om[(static_cast<std::uint64_t>(k) * z[j]) % N];
    }
    sum += prod;
  }
  return sum / static_cast<double>(N) - 1.0;
}

std::vector<std::uint32_t> cbc_construct(std::uint32_t N, std::size_t s, std::span<const double> weights) {
  check_modulus(N);
  if (N > 8192) throw DomainError("CBC construction is capped at N <= 8192");
  if (s > 64) throw DomainError("CBC construction is capped at s <= 64");
  check_weights(weights, s);
  for (std::size_t j = 1; j < s; ++j) {
    if (weights[j] > weights[j - 1]) throw DomainError("lattice weights must be non-increasing");
  }
  const auto om = omega_table(N);
  std::vector<double> prod(N, 1.0);
  std::vector<std::uint32_t> z;
  for (std::size_t d = 0; d < s; ++d) {
    std::uint32_t best = 1;
    long double best_err = std::numeric_limits<long double>::infinity();
    for (std::uint32_t c = 1; c < N; ++c) {
      long double sum = 0.0L;
      for (std::uint32_t k = 0; k < N; ++k) {
        sum += prod[k] * (1.0L + weights[d] * om[(static_cast<std::uint64_t>(k) * c) % N]);
      }
      // c and N - c (and other permutations of the point set) tie exactly;
      // rounding must not break the tie away from the smallest c.
      if (c == 1 || sum < best_err - 1e-14L * best_err) {
        best_err = sum;
        best = c;
      }
    }
    z.push_back(best);
    for (std::uint32_t k = 0; k < N; ++k) {
      prod[k] *= 1.0 + weights[d] * om[(static_cast<std::uint64_t>(k) * best) % N];
    }
  }
  return z;
}

void LatticeRule::point(std::uint32_t k, std::size_t r, std::span<double> y) const {
  const auto& shift = shifts.at(r);
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double base = static_cast<double>((static_cast<std::uint64_t>(k) * z[j]) % N) / static_cast<double>(N);
    double v = base + shift[j];
    if (v >= 1.0) v -= 1.0;
    y[j] = v - 0.5;
  }
}

LatticeRule make_rule(std::uint32_t N, std::vector<std::uint32_t> z, std::size_t R, std::uint64_t seed) {
  check_modulus(N);
  if (R < 8) throw DomainError("randomly shifted lattice rules need R >= 8 shifts");
  for (auto zj : z) {
    if (zj == 0 || zj >= N) throw DomainError("generating vector entries must lie in [1, N-1]");
  }
  LatticeRule rule;
  rule.N = N;
  rule.z = std::move(z);
  rule.seed = seed;
  std::mt19937_64 gen(seed);
  rule.shifts.assign(R, std::vector<double>(rule.z.size()));
  for (auto& sh : rule.shifts) {
    for (auto& v : sh) v = unit(gen);
  }
  return rule;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("HOLO_EVP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

QmcEstimate estimate(const Integrand& f, const LatticeRule& rule, std::size_t threads) {
  const std::size_t R = rule.R(), N = rule.N, s = rule.s();
  std::vector<double> values(R * N);
  parallel_for(R * N, threads, [&](std::size_t idx) {
    std::vector<double> y(s);
    rule.point(static_cast<std::uint32_t>(idx % N), idx / N, y);
    values[idx] = f(y);
  });
  std::vector<double> means(R);
  for (std::size_t r = 0; r < R; ++r) {
    double sum = 0.0;
    for (std::size_t k = 0; k < N; ++k) sum += values[r * N + k];
    means[r] = sum / static_cast<double>(N);
  }
  return pool(std::move(means), R * N);
}

QmcEstimate estimate_problem(const ParametricProblem& problem, const Functional& functional,
                             const LatticeRule& rule, const ProblemEstimateOptions& opts) {
  if (rule.s() > problem.s()) throw DomainError("lattice dimension exceeds the problem truncation");
  if (functional.kind == Functional::Kind::G && functional.g.size() != problem.mesh().interior_dofs()) {
    throw DomainError("dual vector g does not match the mesh");
  }
  const std::size_t R = rule.R(), N = rule.N, s = rule.s();
  auto apply = [&](const fem::GroundPair& g) {
    return functional.kind == Functional::Kind::Lambda ? g.lambda.real()
                                                       : problem.functional(functional.g, g.u).real();
  };
  auto fail = [&](const std::vector<double>& y, const Error& e) {
    std::ostringstream msg;
    msg << "solve failed at lattice point y = (";
    for (std::size_t j = 0; j < y.size(); ++j) msg << (j ? ", " : "") << y[j];
    msg << "): " << e.what();
    throw EstimateError(msg.str());
  };

  std::vector<double> values(R * N);
  if (!opts.continuation) {
    parallel_for(R * N, opts.threads, [&](std::size_t idx) {
      std::vector<double> y(s);
      rule.point(static_cast<std::uint32_t>(idx % N), idx / N, y);
      try {
        values[idx] = apply(problem.solve_real(y));
      } catch (const Error& e) {
        fail(y, e);
      }
    });
  } else {
    // One sequential chain per shift, ordered by the first coordinate.
    parallel_for(R, opts.threads, [&](std::size_t r) {
      std::vector<std::vector<double>> pts(N, std::vector<double>(s));
      for (std::uint32_t k = 0; k < N; ++k) rule.point(k, r, pts[k]);
      std::vector<std::uint32_t> order(N);
      std::iota(order.begin(), order.end(), 0u);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return s > 0 && pts[a][0] < pts[b][0]; });
      fem::GroundPair prev;
      bool have = false;
      for (std::uint32_t k : order) {
        const CVector y(pts[k].begin(), pts[k].end());
        try {
          fem::GroundPair g = problem.solve(y, have ? &prev : nullptr);
          values[r * N + k] = apply(g);
          prev = std::move(g);
          have = true;
        } catch (const Error& e) {
          fail(pts[k], e);
        }
      }
    });
  }
  std::vector<double> means(R);
  for (std::size_t r = 0; r < R; ++r) {
    double sum = 0.0;
    for (std::size_t k = 0; k < N; ++k) sum += values[r * N + k];
    means[r] = sum / static_cast<double>(N);
  }
  return pool(std::move(means), R * N);
}

QmcEstimate monte_carlo(const Integrand& f, std::size_t s, std::size_t N, std::size_t R, std::uint64_t seed,
                        std::size_t threads) {
  if (R < 2 || N < 2) throw DomainError("Monte Carlo needs N >= 2 and R >= 2");
  std::vector<double> means(R), sq(R);
  parallel_for(R, threads, [&](std::size_t r) {
    std::mt19937_64 gen(seed + 0x9E3779B97F4A7C15ull * (r + 1));
    std::vector<double> y(s);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      for (auto& v : y) v = unit(gen) - 0.5;
      const double fv = f(y);
      sum += fv;
      sum2 += fv * fv;
    }
    means[r] = sum / static_cast<double>(N);
    sq[r] = sum2;
  });
  QmcEstimate e = pool(means, N * R);
  // The error of a mean of N * R independent samples is better resolved by the
  // pooled sample variance than by the spread of R replica means.
  double ss = 0.0;
  for (std::size_t r = 0; r < R; ++r) ss += sq[r];
  const double M = static_cast<double>(N * R);
  const double var = std::max(0.0, (ss - M * e.mean * e.mean) / (M - 1.0));
  e.rms = std::sqrt(var / M);
  return e;
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("slope fit needs at least two points");
  double mx = 0, my = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("log-log fit needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

namespace {

void check_N_list(std::span<const std::uint32_t> N_list) {
  if (N_list.size() < 4) throw DomainError("convergence studies need at least four values of N");
  for (std::size_t i = 0; i < N_list.size(); ++i) {
    check_modulus(N_list[i]);
    if (i > 0 && N_list[i] <= N_list[i - 1]) throw DomainError("N list must be increasing");
  }
}

double rms_slope(const Study& st) {
  std::vector<double> x, y;
  for (const auto& r : st.rows) {
    if (r.rms > 0.0) {
      x.push_back(r.N);
      y.push_back(r.rms);
    }
  }
  return x.size() >= 2 ? fit_loglog_slope(x, y) : 0.0;
}

}  // namespace

Study convergence_study(const Integrand& f, std::span<const std::uint32_t> N_list, std::size_t s,
                        std::span<const double> weights, std::size_t R, std::uint64_t seed, std::size_t threads) {
  check_N_list(N_list);
  Study st;
  for (std::uint32_t N : N_list) {
    const LatticeRule rule = make_rule(N, cbc_construct(N, s, weights), R, seed);
    const QmcEstimate e = estimate(f, rule, threads);
    st.rows.push_back({N, s, R, e.mean, e.rms, 0.0});
  }
  st.slope = rms_slope(st);
  return st;
}

Study monte_carlo_study(const Integrand& f, std::span<const std::uint32_t> N_list, std::size_t s, std::size_t R,
                        std::uint64_t seed, std::size_t threads) {
  if (N_list.size() < 4) throw DomainError("convergence studies need at least four values of N");
  Study st;
  for (std::uint32_t N : N_list) {
    const QmcEstimate e = monte_carlo(f, s, N, R, seed + N, threads);
    st.rows.push_back({N, s, R, e.mean, e.rms, 0.0});
  }
  st.slope = rms_slope(st);
  return st;
}

Study truncation_study(const std::function<double(std::size_t, std::span<const double>)>& f_s,
                       std::span<const std::size_t> s_list, std::uint32_t N, std::span<const double> weights,
                       std::size_t R, std::uint64_t seed, std::size_t threads) {
  if (s_list.empty()) throw DomainError("truncation study needs at least one s");
  for (std::size_t i = 1; i < s_list.size(); ++i) {
    if (s_list[i] <= s_list[i - 1]) throw DomainError("s list must be increasing");
  }
  const std::size_t s_max = s_list.back();
  const std::vector<std::uint32_t> z = cbc_construct(N, s_max, weights);
  const LatticeRule full = make_rule(N, z, R, seed);
  Study st;
  for (std::size_t s : s_list) {
    LatticeRule rule = full;
    rule.z.resize(s);
    for (auto& sh : rule.shifts) sh.resize(s);
    const QmcEstimate e = estimate([&](std::span<const double> y) { return f_s(s, y); }, rule, threads);
    st.rows.push_back({N, s, R, e.mean, e.rms, 0.0});
  }
  const double ref = st.rows.back().estimate;
  std::vector<double> x, y;
  for (auto& r : st.rows) {
    r.error = std::abs(r.estimate - ref);
    if (r.s != s_max && r.error > 0.0) {
      x.push_back(static_cast<double>(r.s));
      y.push_back(r.error);
    }
  }
  st.slope = x.size() >= 2 ? fit_loglog_slope(x, y) : 0.0;
  return st;
}

}  // namespace holo::qmc
