#include "doctest.h"

#include "holo/combinatorics.hpp"
#include "holo/errors.hpp"

using namespace holo::combinatorics;

namespace {

// Independent factorial by repeated multiplication.
BigInt fact(unsigned n) {
  BigInt r = 1;
  for (unsigned k = 2; k <= n; ++k) r *= k;
  return r;
}

}  // namespace

TEST_CASE("alpha values") {
  CHECK(alpha(1, AlphaRule::QuadrupleFactorial) == 1);
  CHECK(alpha(3, AlphaRule::QuadrupleFactorial) == 12);
  CHECK(alpha(5, AlphaRule::QuadrupleFactorial) == fact(8) / fact(4));
  CHECK(alpha(6, AlphaRule::QuadrupleFactorial) == 30240);
  CHECK(alpha(4, AlphaRule::Factorial) == 24);
  CHECK_THROWS_AS(alpha(0, AlphaRule::QuadrupleFactorial), holo::DomainError);
  CHECK_THROWS_AS(alpha(65, AlphaRule::Factorial), holo::DomainError);
  CHECK(alpha(64, AlphaRule::QuadrupleFactorial) == fact(126) / fact(63));
}

TEST_CASE("recurrence matches closed form and grows") {
  const AlphaSequence seq = alpha_sequence(AlphaRule::QuadrupleFactorial, 32);
  CHECK(seq[0] == 1);
  CHECK(seq[1] == 1);
  for (unsigned n = 2; n <= 32; ++n) {
    CHECK(seq[n] == fact(2 * (n - 1)) / fact(n - 1));
    CHECK(seq[n] == alpha_convolution(seq, n));
    CHECK(BigInt(n) * seq[n - 1] <= seq[n]);
  }
  const AlphaSequence f = alpha_sequence(AlphaRule::Factorial, 20);
  for (unsigned n = 2; n <= 20; ++n) CHECK(BigInt(n) * f[n - 1] <= f[n]);
}

TEST_CASE("catalan") {
  CHECK(catalan(0) == 1);
  CHECK(catalan(3) == 5);
  CHECK(catalan(10) == 16796);
  for (unsigned n = 0; n <= 64; n += 7) CHECK(catalan(n) == fact(2 * n) / (fact(n) * fact(n + 1)));
  CHECK_THROWS_AS(catalan(65), holo::DomainError);
}

TEST_CASE("convolution identity up to 20") {
  const AlphaSequence seq = alpha_sequence(AlphaRule::QuadrupleFactorial, 20);
  for (unsigned N = 2; N <= 20; ++N) {
    BigInt sum = 0;
    for (unsigned k = 1; k < N; ++k) sum += binomial(N, k) * seq[k] * seq[N - k];
    CHECK(sum == seq[N]);
  }
}

TEST_CASE("epsilon ratio") {
  CHECK(epsilon_ratio(2, AlphaRule::QuadrupleFactorial) == Rational(1, 2));
  CHECK(epsilon_ratio(3, AlphaRule::QuadrupleFactorial) == Rational(2, 5));
  CHECK(epsilon_ratio(7, AlphaRule::Factorial) == 1);
  for (unsigned n = 1; n <= 50; ++n) {
    CHECK(epsilon_ratio(n, AlphaRule::QuadrupleFactorial) == Rational(n * (n + 1), 2 * n * (2 * n - 1)));
  }
  for (unsigned n = 3; n <= 50; ++n) {
    CHECK(epsilon_ratio(n, AlphaRule::QuadrupleFactorial) < epsilon_ratio(n - 1, AlphaRule::QuadrupleFactorial));
    CHECK(epsilon_ratio(n, AlphaRule::QuadrupleFactorial) > Rational(1, 4));
  }
  // The gap to 1/4 is exactly 3/(4(2n-1)); it first drops below 5e-3 at n = 76.
  for (unsigned n = 1; n <= 63; ++n) {
    CHECK(epsilon_ratio(n, AlphaRule::QuadrupleFactorial) - Rational(1, 4) == Rational(3, 4 * (2 * n - 1)));
  }
  CHECK(epsilon_ratio(50, AlphaRule::QuadrupleFactorial) - Rational(1, 4) == Rational(1, 132));
  CHECK_THROWS_AS(epsilon_ratio(64, AlphaRule::QuadrupleFactorial), holo::DomainError);
  CHECK(Rational(3, 4 * (2 * 75 - 1)) > Rational(5, 1000));
  CHECK(rule_epsilon(AlphaRule::QuadrupleFactorial) == 0.25);
  CHECK(rule_epsilon(AlphaRule::Factorial) == 1.0);
}

TEST_CASE("rule names") {
  CHECK(parse_alpha_rule("quad") == AlphaRule::QuadrupleFactorial);
  CHECK(parse_alpha_rule("factorial") == AlphaRule::Factorial);
  CHECK_THROWS_AS(parse_alpha_rule("cubic"), holo::ConfigError);
}
