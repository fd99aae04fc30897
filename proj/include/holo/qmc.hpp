#pragma once

#include "holo/problem.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace holo::qmc {

bool is_prime(std::uint64_t n);

/// Bernoulli kernel 2 pi^2 (x^2 - x + 1/6) on [0, 1].
double omega(double x);

/// Shift-averaged squared worst-case error
/// (1/N) sum_k prod_j (1 + w_j omega({k z_j / N})) - 1 over the first z.size() coordinates.
double shift_averaged_error(std::uint32_t N, std::span<const std::uint32_t> z, std::span<const double> weights);

/// Greedy component-by-component generating vector, ties resolved to the smallest z_j.
std::vector<std::uint32_t> cbc_construct(std::uint32_t N, std::size_t s, std::span<const double> weights);

struct LatticeRule {
  std::uint32_t N = 0;
  std::vector<std::uint32_t> z;
  std::vector<std::vector<double>> shifts;  ///< R shifts in [0,1)^s
  std::uint64_t seed = 0;

  std::size_t s() const { return z.size(); }
  std::size_t R() const { return shifts.size(); }
  /// y = frac(k z / N + shift_r) - 1/2.
  void point(std::uint32_t k, std::size_t r, std::span<double> y) const;
};

/// Shifts come from a 64-bit Mersenne twister seeded with `seed`.
LatticeRule make_rule(std::uint32_t N, std::vector<std::uint32_t> z, std::size_t R, std::uint64_t seed);

struct QmcEstimate {
  std::vector<double> shift_means;
  double mean = 0.0;
  double rms = 0.0;  ///< stddev of shift means / sqrt(R)
  std::size_t evaluations = 0;
};

using Integrand = std::function<double(std::span<const double>)>;

/// Worker count: HOLO_EVP_THREADS if set (>= 1), else the hardware concurrency.
std::size_t worker_count();

/// Evaluates f at every lattice point; results do not depend on the worker count.
QmcEstimate estimate(const Integrand& f, const LatticeRule& rule, std::size_t threads = 0);

struct Functional {
  enum class Kind { Lambda, G } kind = Kind::Lambda;
  CVector g;  ///< dual vector for Kind::G
};

struct ProblemEstimateOptions {
  bool continuation = false;  ///< sort points by y_1 and seed each solve with its neighbour
  std::size_t threads = 0;
};

/// E[lambda] or E[G(u)] over y ~ U[-1/2, 1/2]^s. Throws EstimateError naming the failing point.
QmcEstimate estimate_problem(const ParametricProblem& problem, const Functional& functional,
                             const LatticeRule& rule, const ProblemEstimateOptions& opts = {});

/// Plain Monte Carlo with R independent replicas of N points each.
QmcEstimate monte_carlo(const Integrand& f, std::size_t s, std::size_t N, std::size_t R, std::uint64_t seed,
                        std::size_t threads = 0);

struct StudyRow {
  std::uint32_t N = 0;
  std::size_t s = 0;
  std::size_t R = 0;
  double estimate = 0.0;
  double rms = 0.0;
  double error = 0.0;  ///< truncation study: |estimate - estimate at s_max|
};

struct Study {
  std::vector<StudyRow> rows;
  double slope = 0.0;  ///< least-squares slope of log(rms) (or log(error)) against log(N) (or log(s))
};

double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

Study convergence_study(const Integrand& f, std::span<const std::uint32_t> N_list, std::size_t s,
                        std::span<const double> weights, std::size_t R, std::uint64_t seed,
                        std::size_t threads = 0);
Study monte_carlo_study(const Integrand& f, std::span<const std::uint32_t> N_list, std::size_t s,
                        std::size_t R, std::uint64_t seed, std::size_t threads = 0);

/// f_s evaluates the s-truncated quantity at a point of dimension s. One CBC
/// vector for s_max is built and truncated; every s shares the same shifts.
Study truncation_study(const std::function<double(std::size_t, std::span<const double>)>& f_s,
                       std::span<const std::size_t> s_list, std::uint32_t N, std::span<const double> weights,
                       std::size_t R, std::uint64_t seed, std::size_t threads = 0);

}  // namespace holo::qmc
