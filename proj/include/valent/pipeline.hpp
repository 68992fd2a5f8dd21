#pragma once

// Level-coarsened ("dyadic") version of the chain sum and its reduction to a
// constrained maximization over level occupancies.
//
// Integers y >= 1 are grouped into levels [alpha^i, alpha^{i+1}); P(y) is the
// lower end of the level holding y. A chain with a_i elements on level i is
// counted by a product of binomials (count_H); replacing the parity-dependent
// shift w_i by a_i/2 gives the smooth relaxation H', whose Stirling form G is
// maximized on sum a_i = n through a single Lagrange multiplier lambda.

#include <cstdint>
#include <vector>

#include "valent/chain_sum.hpp"
#include "valent/log_num.hpp"

namespace valent {

struct DyadicPartition {
  double alpha = 2.0;
  int l = 0;                  // levels 0..l
  std::vector<double> c;      // integers in each level; exact below 2^53
  std::vector<double> lower;  // level boundaries alpha^0 .. alpha^{l+1}
  double T_prime = 0.0;

  // Largest integer covered by levels 0..l. Throws SizeError past 2^53.
  std::int64_t max_index() const;
  // Level of y >= 1.
  int level(std::int64_t y) const;
  double P(std::int64_t y) const;
  double total_capacity() const;  // sum 2 c_i
};

// l = floor(A log_alpha n), T' = alpha n^A.
DyadicPartition make_partition(int n, double alpha, double A);
// Levels 0..l in full.
DyadicPartition make_partition_levels(double alpha, int l);
// Levels covering exactly 1..max_index; the last one may be partial.
DyadicPartition make_partition_to(double alpha, std::int64_t max_index);

// Chain sum with weight P(x)^{-p}, truncated at partition.max_index().
LogNum s_dyadic(int n, double p, const DyadicPartition& partition,
                Precision precision = Precision::Standard);

// Phase of the relation pattern entering a level: the first relation inside
// the level is <= when an even number of chain elements precede it.
enum class Phase { LessEqFirst, LessFirst };

constexpr Phase phase_for_preceding(std::int64_t preceding) {
  return preceding % 2 == 0 ? Phase::LessEqFirst : Phase::LessFirst;
}

// Shift m_j for the j-th element (1-based) of a level block.
constexpr std::int64_t shift_offset(std::int64_t j, Phase phase) {
  return phase == Phase::LessEqFirst ? j / 2 : (j - 1) / 2;
}

// y (satisfying the alternating pattern of its phase) -> strictly increasing.
std::vector<std::int64_t> shift_map(const std::vector<std::int64_t>& y, Phase phase);
std::vector<std::int64_t> shift_inverse(const std::vector<std::int64_t>& x, Phase phase);

// Sequences of length a in [1, c] following the pattern of `phase`:
// C(c + w, a) with w = shift_offset(a, phase).
std::uint64_t chains_in_level(std::int64_t c, std::int64_t a, Phase phase);

// Number of chains with prescribed level occupancies, prod C(c_i + w_i, a_i).
LogNum count_H(const std::vector<std::int64_t>& a, const DyadicPartition& partition);
// Same count in exact integer arithmetic; throws SizeError on overflow.
std::uint64_t count_H_exact(const std::vector<std::int64_t>& a, const DyadicPartition& partition);

namespace dev {
// Mutation switch for the verify harness: widens every binomial top by one
// when a_i >= 2 so that the count_H suite can be shown to fail.
void set_corrupt_binomial(bool on);
}  // namespace dev

// prod alpha^{-i a_i p} / ((c_i + a_i/2 + 1) B(a_i + 1, c_i - a_i/2 + 1)),
// defined for real 0 <= a_i <= 2 c_i.
LogNum H_prime(const std::vector<double>& a, const DyadicPartition& partition, double p);

// Exact sum of H' over integer compositions of n; at most 1e6 compositions.
LogNum s1_sum(int n, double p, const DyadicPartition& partition);

struct IntegerMax {
  LogNum value;
  std::vector<std::int64_t> argmax;
};

// Max of H' over integer compositions, by rounding the continuous maximizer
// and exchanging single units until no transfer improves H'.
IntegerMax s2_max(int n, double p, const DyadicPartition& partition);

// Occupancies at multiplier lambda: 2 c_i / sqrt(4 alpha^{2ip} e^{2 lambda} + 1).
std::vector<double> occupancy_at(double lambda, const DyadicPartition& partition, double p);

// Root of sum_i occupancy_at(lambda)_i = n by bisection.
double solve_lambda(int n, const DyadicPartition& partition, double p);

struct PipelineResult {
  double lambda = 0.0;
  std::vector<double> D;  // 1 + 4 alpha^{2ip} e^{2 lambda}
  double xi = 0.0;
  double log_s4 = 0.0;
  double k4 = 0.0;
  double residual = 0.0;  // sum occupancy - n
};

PipelineResult s4_value(int n, const DyadicPartition& partition, double p, double lambda);

// Stirling-form exponent and its gradient.
double stirling_exponent(const std::vector<double>& a, const DyadicPartition& partition, double p);
std::vector<double> stirling_gradient(const std::vector<double>& a, const DyadicPartition& partition,
                                      double p);

// max_i |dG/da_i - lambda| / max(1, kappa_i), kappa_i = |a_i d^2G/da_i^2| being
// the amplification of a relative rounding of a_i. Levels with a_i rounded
// onto 2 c_i are ill-conditioned and would otherwise dominate.
double foc_residual(double lambda, const std::vector<double>& a, const DyadicPartition& partition, double p);

// log H'(a) - G(a).
double stirling_gap(const std::vector<double>& a, const DyadicPartition& partition, double p);

// -p ln n + p ln(((alpha - 1)/ln alpha) J(p))
double lambda_asymptote(double n, double alpha, double p);

struct XiBounds {
  double lower = 0.0;
  double xi = 0.0;
  double upper = 0.0;
};

XiBounds xi_bounds_check(const PipelineResult& result, int n, double alpha, double p);

// ((alpha - 1)/ln alpha) e J(p), the n -> inf value of k4 up to O(alpha - 1).
double k4_limit(double alpha, double p);

}  // namespace valent
