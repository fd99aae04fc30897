#pragma once

#include "holo/problem.hpp"

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

namespace holo::deriv {

enum class Method { FD, Chebyshev, Contour };
Method parse_method(std::string_view name);
std::string_view to_string(Method m);

/// Sparse multi-index: (coordinate, order) pairs with distinct coordinates, 0-based.
struct MultiIndex {
  std::vector<std::pair<std::size_t, unsigned>> entries;

  static MultiIndex single(std::size_t j, unsigned n) { return {{{j, n}}}; }
  unsigned order() const;
  std::size_t support() const { return entries.size(); }
  double factorial() const;  ///< nu! = prod nu_j!
  /// Parses "2,1" as nu = 2 e_1 + e_2 (dense, 1-based positions).
  static MultiIndex parse_dense(std::string_view text);
  std::string str() const;  ///< dense form, e.g. "2,1"
};

struct Entry {
  MultiIndex nu;
  Complex d_lambda{};
  double hnorm_du = 0.0;
  Method method = Method::Contour;
  double est_error = 0.0;    ///< on d_lambda
  double est_error_u = 0.0;  ///< on hnorm_du
};

struct DerivativeTable {
  CVector y;
  std::vector<Entry> entries;
};

/// Straight-line continuation of a ground pair from y_from (already solved as
/// `start`) to y_to. Steps are at most max_step long and are bisected on
/// solver failure or when the normalised overlap with the previous state
/// drops below 0.9. Throws ContinuationError after too many bisections.
fem::GroundPair continue_path(const ParametricProblem& problem, const fem::GroundPair& start,
                              std::span<const Complex> y_from, std::span<const Complex> y_to,
                              double max_step = 0.05);

struct FdOptions {
  double h = 0.05;  ///< base step, halved once for the Richardson estimate
};

/// Central finite differences in coordinate j for orders 1..n_max (n_max <= 4).
std::vector<Entry> deriv_fd(const ParametricProblem& problem, std::span<const double> y, std::size_t j,
                            unsigned n_max, const FdOptions& opts = {});

/// Degree-32 Chebyshev interpolant in coordinate j over [-1, 1], orders 1..n_max (n_max <= 6).
std::vector<Entry> deriv_cheb(const ParametricProblem& problem, std::span<const double> y, std::size_t j,
                              unsigned n_max);

struct ContourSpec {
  std::size_t j = 0;
  double radius = 0.1;
  std::size_t Q = 64;        ///< power of two, >= 32 and >= 4 n_max
  std::size_t substeps = 1;  ///< continuation steps per arc between quadrature points
};

struct ContourResult {
  std::vector<Entry> entries;  ///< orders 0..n_max
  double loop_closure = 0.0;   ///< |lambda_end - lambda_start| + ||u_end - u_start||_2 relative
  double mean_value_gap = 0.0; ///< |mean lambda(z_q) - lambda(y)|
};

/// Cauchy trapezoid rule on the circle y_j + r e^{i phi} reached by continuation.
ContourResult deriv_contour(const ParametricProblem& problem, std::span<const double> y,
                            const ContourSpec& spec, unsigned n_max);

/// Tensor contour over the (at most two) coordinates of nu; specs gives one
/// circle per support coordinate in the same order as nu.entries.
Entry deriv_mixed(const ParametricProblem& problem, std::span<const double> y, const MultiIndex& nu,
                  std::span<const ContourSpec> specs);

struct RadiusOptions {
  double r0 = 0.05;
  double cap = 8.0;
  int bisections = 8;
  std::size_t Q = 64;
};

/// Largest radius found for which the contour around y_j closes.
double radius_estimate(const ParametricProblem& problem, std::span<const double> y, std::size_t j,
                       const RadiusOptions& opts = {});

}  // namespace holo::deriv
