#include "holo/combinatorics.hpp"

#include "holo/errors.hpp"

#include <string>

namespace holo::combinatorics {

namespace {

void require_range(unsigned n, unsigned lo, unsigned hi, const char* what) {
  if (n < lo || n > hi) {
    throw DomainError(std::string(what) + ": index " + std::to_string(n) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

}  // namespace

AlphaRule parse_alpha_rule(std::string_view name) {
  if (name == "quad" || name == "quadruple" || name == "quadruple_factorial") {
    return AlphaRule::QuadrupleFactorial;
  }
  if (name == "factorial") return AlphaRule::Factorial;
  throw ConfigError("unknown alpha rule '" + std::string(name) + "' (expected quad|factorial)");
}

std::string_view to_string(AlphaRule rule) {
  return rule == AlphaRule::QuadrupleFactorial ? "quad" : "factorial";
}

double rule_epsilon(AlphaRule rule) {
  return rule == AlphaRule::QuadrupleFactorial ? 0.25 : 1.0;
}

BigInt factorial(unsigned n) {
  BigInt out = 1;
  for (unsigned k = 2; k <= n; ++k) out *= k;
  return out;
}

BigInt binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt out = 1;
  // out stays integral: after step i it equals C(n-k+i, i)
  for (unsigned i = 1; i <= k; ++i) {
    out *= n - k + i;
    out /= i;
  }
  return out;
}

BigInt alpha_closed_form(unsigned n, AlphaRule rule) {
  if (n == 0) return 1;
  if (rule == AlphaRule::Factorial) return factorial(n);
  BigInt out = 1;
  // (2(n-1))!/(n-1)! = prod_{k=n}^{2n-2} k
  for (unsigned k = n; k <= 2 * (n - 1); ++k) out *= k;
  return out;
}

BigInt alpha_convolution(const AlphaSequence& seq, unsigned n) {
  BigInt sum = 0;
  for (unsigned m = 1; m + 1 <= n; ++m) sum += binomial(n, m) * seq[n - m] * seq[m];
  return sum;
}

AlphaSequence alpha_sequence(AlphaRule rule, unsigned n_max) {
  require_range(n_max, 0, kMaxIndex, "alpha_sequence");
  AlphaSequence seq{rule, {}};
  seq.values.reserve(n_max + 1);
  seq.values.emplace_back(1);
  if (n_max >= 1) seq.values.emplace_back(1);
  for (unsigned n = 2; n <= n_max; ++n) {
    if (rule == AlphaRule::Factorial) {
      seq.values.push_back(seq.values.back() * n);
      continue;
    }
    BigInt value = alpha_convolution(seq, n);
    if (value != alpha_closed_form(n, rule)) {
      throw Error("alpha recurrence disagrees with (2(n-1))!/(n-1)! at n=" + std::to_string(n));
    }
    seq.values.push_back(std::move(value));
  }
  return seq;
}

BigInt alpha(unsigned n, AlphaRule rule) {
  require_range(n, 1, kMaxIndex, "alpha");
  return alpha_sequence(rule, n)[n];
}

BigInt catalan(unsigned n) {
  require_range(n, 0, kMaxIndex, "catalan");
  return factorial(2 * n) / (factorial(n) * factorial(n + 1));
}

Rational epsilon_ratio(unsigned n, AlphaRule rule) {
  require_range(n, 1, kMaxIndex - 1, "epsilon_ratio");
  const AlphaSequence seq = alpha_sequence(rule, n + 1);
  return Rational(seq[n] * (n + 1), seq[n + 1]);
}

}  // namespace holo::combinatorics
