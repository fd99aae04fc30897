#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <string_view>
#include <vector>

namespace holo::combinatorics {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Largest index for which exact sequence values are served.
inline constexpr unsigned kMaxIndex = 64;

/// Growth rule of the single-coordinate derivative bound alpha_n * beta^n.
enum class AlphaRule {
  QuadrupleFactorial,  ///< alpha_n = (2(n-1))!/(n-1)!, linear eigenproblem
  Factorial,           ///< alpha_n = n!, semilinear eigenproblem
};

AlphaRule parse_alpha_rule(std::string_view name);
std::string_view to_string(AlphaRule rule);

/// Limit of alpha_n (n+1) / alpha_{n+1}: 1/4 for QuadrupleFactorial, 1 for Factorial.
double rule_epsilon(AlphaRule rule);

BigInt factorial(unsigned n);
BigInt binomial(unsigned n, unsigned k);

/// Exact alpha_n for n = 0..n_max.
///
/// values[0] is fixed to 1 for both rules (the recurrence leaves alpha_0
/// undefined while the Taylor series in the holomorphy argument starts at 0).
/// For QuadrupleFactorial the values come from the convolution recurrence and
/// each one is checked against the closed form during construction.
struct AlphaSequence {
  AlphaRule rule;
  std::vector<BigInt> values;

  const BigInt& operator[](std::size_t n) const { return values.at(n); }
  std::size_t n_max() const { return values.empty() ? 0 : values.size() - 1; }
};

AlphaSequence alpha_sequence(AlphaRule rule, unsigned n_max);

/// alpha_n for 1 <= n <= 64; throws DomainError otherwise.
BigInt alpha(unsigned n, AlphaRule rule);

/// Closed forms, usable as independent checks of the recurrence.
BigInt alpha_closed_form(unsigned n, AlphaRule rule);

/// sum_{m=1}^{n-1} C(n,m) alpha_{n-m} alpha_m over an existing sequence.
BigInt alpha_convolution(const AlphaSequence& seq, unsigned n);

/// C_n = (2n)! / (n! (n+1)!), 0 <= n <= 64.
BigInt catalan(unsigned n);

/// alpha_n (n+1) / alpha_{n+1} as an exact rational, 1 <= n <= 63.
Rational epsilon_ratio(unsigned n, AlphaRule rule);

}  // namespace holo::combinatorics
