#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "valent/log_num.hpp"

using valent::LogNum;

TEST_CASE("zero and one") {
  CHECK(LogNum::zero().is_zero());
  CHECK(LogNum().log() == -std::numeric_limits<double>::infinity());
  CHECK(LogNum::one().log() == 0.0);
  CHECK((LogNum::zero() + LogNum::one()).log() == 0.0);
  CHECK((LogNum::zero() * LogNum::from_value(3.0)).is_zero());
}

TEST_CASE("rejects +inf and nan") {
  CHECK_THROWS_AS(LogNum::from_log(std::numeric_limits<double>::infinity()), valent::DomainError);
  CHECK_THROWS_AS(LogNum::from_log(std::nan("")), valent::DomainError);
  CHECK_THROWS_AS(LogNum::from_value(-1.0), valent::DomainError);
}

TEST_CASE("sum and product") {
  const auto a = LogNum::from_value(2.0);
  const auto b = LogNum::from_value(3.0);
  CHECK((a + b).value() == doctest::Approx(5.0).epsilon(1e-15));
  CHECK((a * b).value() == doctest::Approx(6.0).epsilon(1e-15));
  CHECK((b / a).value() == doctest::Approx(1.5).epsilon(1e-15));
  // far below double range
  const auto tiny = LogNum::from_log(-1e6);
  CHECK((tiny + tiny).log() == doctest::Approx(-1e6 + std::log(2.0)).epsilon(1e-15));
  CHECK((tiny * tiny).log() == -2e6);
}

TEST_CASE("log-sum-exp is commutative and never below the larger operand") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-800.0, 800.0);
  for (int i = 0; i < 1000; ++i) {
    const auto a = LogNum::from_log(dist(rng));
    const auto b = LogNum::from_log(dist(rng));
    CHECK((a + b).log() == (b + a).log());
    CHECK((a + b).log() >= std::max(a.log(), b.log()));
    CHECK(std::isfinite((a + b).log()));
  }
}
