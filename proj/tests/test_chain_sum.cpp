#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "doctest.h"
#include "valent/chain_sum.hpp"

using namespace valent;

namespace {

constexpr double kZeta2 = std::numbers::pi * std::numbers::pi / 6.0;
constexpr double kZeta4 = kZeta2 * kZeta2 * 0.4;  // pi^4/90
constexpr double kZeta15 = 2.6123753486854883;
constexpr double kZeta3 = 1.2020569031595943;

// s(2) = sum_{x1 <= x2} = (zeta(p)^2 + zeta(2p)) / 2 by symmetrization.
double s2_exact(double zeta_p, double zeta_2p) { return 0.5 * (zeta_p * zeta_p + zeta_2p); }

ChainSpec spec(int n, double p, std::int64_t T) { return ChainSpec::power(n, p, T); }

}  // namespace

TEST_CASE("relation pattern alternates <=, <") {
  CHECK(relation_after(1) == Relation::LessEq);
  CHECK(relation_after(2) == Relation::Less);
  CHECK(relation_after(3) == Relation::LessEq);
  const auto pat = ChainSpec::power(5, 2.0, 10).pattern();
  REQUIRE(pat.size() == 4);
  // last relation is <= for even n, < for odd n
  CHECK(pat.back() == Relation::Less);
  CHECK(ChainSpec::power(4, 2.0, 10).pattern().back() == Relation::LessEq);
}

TEST_CASE("unbounded truncation needs p > 1") {
  CHECK_THROWS_AS(ChainSpec::power(2, 1.0, std::nullopt).validate(), DomainError);
  CHECK_NOTHROW(ChainSpec::power(2, 1.5, std::nullopt).validate());
}

TEST_CASE("brute_s examples") {
  CHECK(brute_s(spec(1, 2, 3)).value() == doctest::Approx(1.0 + 0.25 + 1.0 / 9.0).epsilon(1e-15));
  CHECK(brute_s(spec(2, 2, 1)).log() == doctest::Approx(0.0));

  std::set<std::vector<std::int64_t>> tuples;
  enumerate_chains(3, 3, [&](const std::vector<std::int64_t>& xs) { tuples.insert(xs); });
  const std::set<std::vector<std::int64_t>> expected = {{1, 1, 2}, {1, 1, 3}, {1, 2, 3}, {2, 2, 3}};
  CHECK(tuples == expected);
  CHECK(brute_s(spec(3, 2, 3)).value() == doctest::Approx(57.0 / 144.0).epsilon(1e-15));
}

TEST_CASE("brute_s guards") {
  CHECK_THROWS_AS(brute_s(spec(13, 2, 5)), SizeError);
  CHECK_THROWS_AS(brute_s(spec(3, 2, 31)), SizeError);
  CHECK_THROWS_AS(brute_s(ChainSpec::power(3, 2, std::nullopt)), DomainError);
}

TEST_CASE("dp_s examples") {
  CHECK(dp_s(spec(3, 2, 3)).log() == doctest::Approx(std::log(57.0 / 144.0)).epsilon(1e-14));
  CHECK(dp_s(spec(4, 3, 2)).log() == doctest::Approx(-6.0 * std::log(2.0)).epsilon(1e-14));

  // missing mass of s(2) beyond T is at most zeta(2) * tail_bound(T, 2)
  const std::int64_t T = 100000;
  const double s_T = dp_s(spec(2, 2, T)).value();
  const double s_inf = s2_exact(kZeta2, kZeta4);
  CHECK(s_inf == doctest::Approx(1.8940657).epsilon(1e-7));
  CHECK(s_inf - s_T >= 0.0);
  CHECK(s_inf - s_T <= kZeta2 * tail_bound(T, 2.0));
}

TEST_CASE("dp_s edge cases") {
  CHECK(dp_s(spec(5, 2, 2)).is_zero());  // T < ceil(5/2)
  CHECK_FALSE(dp_s(spec(5, 2, 3)).is_zero());
  CHECK(dp_s(spec(0, 2, 5)).log() == 0.0);
  // nonpositive exponents are fine with a finite T
  CHECK(dp_s(spec(3, -1.0, 4)).log() == doctest::Approx(brute_s(spec(3, -1.0, 4)).log()).epsilon(1e-13));
  CHECK(dp_s(spec(4, 0.0, 6)).value() == doctest::Approx(brute_s(spec(4, 0.0, 6)).value()));
}

TEST_CASE("dp_s with a custom weight matches enumeration") {
  ChainSpec s;
  s.n = 5;
  s.trunc = 9;
  s.weight = Weight::custom([](std::int64_t x) { return -x * 0.3 + std::log(1.0 + x); });
  CHECK(dp_s(s).log() == doctest::Approx(brute_s(s).log()).epsilon(1e-13));
}

TEST_CASE("dp_s agrees with brute_s on the full small grid") {
  for (double p : {1.5, 2.0, 3.0}) {
    for (int n = 1; n <= 8; ++n) {
      for (std::int64_t T = 1; T <= 12; ++T) {
        const auto b = brute_s(spec(n, p, T));
        for (auto prec : {Precision::Standard, Precision::Extended}) {
          const auto d = dp_s(spec(n, p, T), prec);
          if (b.is_zero()) {
            CHECK(d.is_zero());
          } else {
            CHECK(std::abs(d.log() - b.log()) <= 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("dp_s is monotone in T and in p") {
  for (int n = 1; n <= 7; ++n) {
    double prev = -INFINITY;
    for (std::int64_t T = 1; T <= 40; ++T) {
      const double v = dp_s(spec(n, 2.0, T)).log();
      CHECK(v >= prev);
      prev = v;
    }
    prev = INFINITY;
    for (double p : {0.5, 1.0, 1.5, 2.0, 3.0, 5.0}) {
      const double v = dp_s(spec(n, p, 25)).log();
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("even chains contain the witness (1,1,2,2,...)") {
  for (int m = 1; m <= 4; ++m) {
    std::vector<std::int64_t> witness;
    for (int v = 1; v <= m; ++v) {
      witness.push_back(v);
      witness.push_back(v);
    }
    bool found = false;
    enumerate_chains(2 * m, m, [&](const std::vector<std::int64_t>& xs) { found = found || xs == witness; });
    CHECK(found);
  }
}

TEST_CASE("lower bound from the witness chain") {
  for (double p : {1.5, 2.0, 3.0}) {
    for (int m = 1; m <= 6; ++m) {
      for (std::int64_t T : {std::int64_t{m}, std::int64_t{m + 3}, std::int64_t{50}}) {
        CHECK(dp_s(spec(2 * m, p, T)).log() >= even_chain_lower_bound(m, p) - 1e-12);
      }
    }
  }
}

TEST_CASE("odd step bound s(2m+1) <= m^{1-p}/(p-1) s(2m)") {
  for (double p : {1.5, 2.0, 3.0}) {
    for (int m = 1; m <= 6; ++m) {
      const double odd = dp_s(spec(2 * m + 1, p, 20000)).log();
      const double even = dp_s(spec(2 * m, p, 20000)).log();
      CHECK(odd <= even + std::log(odd_step_bound(m, p)));
    }
  }
}

TEST_CASE("tail_bound") {
  CHECK(tail_bound(1, 2.0) == doctest::Approx(1.0));
  CHECK(kZeta2 - 1.0 <= tail_bound(1, 2.0));
  CHECK(tail_bound(10, 2.0) == doctest::Approx(0.1));
  CHECK(tail_bound(4, 3.0) == doctest::Approx(0.03125));
  CHECK_THROWS_AS(tail_bound(3, 1.0), DomainError);
  CHECK_THROWS_AS(tail_bound(0, 2.0), DomainError);
}

TEST_CASE("tail_bound dominates partial tails") {
  const int top = 1000000;
  for (double p : {1.5, 2.0, 3.0}) {
    // suffix sums from the small end of the terms upward
    std::vector<double> suffix(102, 0.0);
    double acc = 0.0;
    for (int m = top; m >= 2; --m) {
      acc += std::pow(m, -p);
      if (m <= 101) suffix[m - 1] = acc;  // sum_{m' >= m} = tail beyond m - 1
    }
    for (int j = 1; j <= 100; ++j) CHECK(suffix[j] <= tail_bound(j, p));
  }
}

TEST_CASE("s_adaptive examples") {
  const auto r1 = s_adaptive(1, 2.0, 1e-6);
  CHECK(std::abs(r1.k - std::sqrt(kZeta2)) / r1.k <= 2e-6);
  CHECK(r1.k == doctest::Approx(1.2825498).epsilon(1e-6));
  CHECK(r1.tail_estimate >= 0.0);
  CHECK(r1.tail_estimate < 1e-6);

  const auto r2 = s_adaptive(2, 2.0, 1e-8);
  CHECK(std::abs(r2.log_s.log() - std::log(s2_exact(kZeta2, kZeta4))) <= 1e-6);

  const auto r3 = s_adaptive(2, 1.5, 1e-4);
  CHECK(r3.tail_estimate < 1e-4);
  const double k_exact = 2.0 * std::pow(s2_exact(kZeta15, kZeta3), 1.0 / 3.0);
  CHECK(std::abs(r3.k - k_exact) / k_exact <= 1e-3);
  CHECK(r3.k > 0.0);
}

TEST_CASE("s_adaptive errors") {
  CHECK_THROWS_AS(s_adaptive(2, 1.0, 1e-3), DomainError);
  CHECK_THROWS_AS(s_adaptive(2, 2.0, 0.5), DomainError);
  CHECK_THROWS_AS(s_adaptive(2, 2.0, 0.0), DomainError);
  AdaptiveOptions tight;
  tight.hard_cap_T = 64;
  try {
    s_adaptive(2, 2.0, 1e-9, tight);
    FAIL("expected ResourceError");
  } catch (const ResourceError& e) {
    CHECK(e.best().T_used == 64);
    CHECK(e.best().k > 0.0);
  }
}

TEST_CASE("truncation_deficit") {
  // n = 1: T = 1, s'_1 = 1, delta = zeta(2) - 1
  const auto d1 = truncation_deficit(1, 2.0, 10.0, 1e-7);
  CHECK(d1.T == 1);
  CHECK(d1.value == doctest::Approx(std::log(kZeta2 - 1.0)).epsilon(1e-5));

  // n = 2, A = 3: T = 8, s'_2 by enumeration, s(2) from zeta values
  const auto d2 = truncation_deficit(2, 2.0, 3.0, 1e-8);
  CHECK(d2.T == 8);
  const double truncated = brute_s(spec(2, 2.0, 8)).value();
  const double expected = 0.5 * std::log((s2_exact(kZeta2, kZeta4) - truncated) / truncated);
  CHECK(d2.value == doctest::Approx(expected).epsilon(1e-5));
  CHECK(d2.value <= 0.0);

  // n^A past the cap, adaptive sum coarser than the truncation: zero deficit
  AdaptiveOptions small;
  small.hard_cap_T = 1 << 12;
  const auto d3 = truncation_deficit(2, 2.0, 30.0, 0.1, small);
  CHECK(d3.approximate);
  CHECK(d3.value == -INFINITY);
}

TEST_CASE("growth_check") {
  ChainSumResult r;
  r.log_s = LogNum::from_value(1.894065);
  CHECK(growth_check(2, 2.0, r) == doctest::Approx(1.705656).epsilon(1e-6));
  r.log_s = LogNum::from_value(kZeta2);
  CHECK(growth_check(1, 2.0, r) == doctest::Approx(0.49770).epsilon(1e-5));
}

TEST_CASE("k is a pure function of log_s") {
  const auto r = s_adaptive(6, 2.0, 1e-3);
  CHECK(k_from_log_s(6, 2.0, r.log_s) == r.k);
  CHECK(k_from_log_s(6, 2.0, r.log_s) == k_from_log_s(6, 2.0, r.log_s));
}

TEST_CASE("long chains do not pick up an underflow floor") {
  // oracle: the same recursion in 80-bit long double, normalized by the layer sum
  const auto s = dp_s(ChainSpec::power(2600, 2.0, 131072));
  CHECK(k_from_log_s(2600, 2.0, s) == doctest::Approx(7.0876341662).epsilon(1e-9));
  // here cells more than 1e-300 below the layer maximum still matter
  const auto deep = dp_s(ChainSpec::power(3500, 2.0, 262144));
  CHECK(k_from_log_s(3500, 2.0, deep) == doctest::Approx(7.0978330816).epsilon(1e-9));
}
