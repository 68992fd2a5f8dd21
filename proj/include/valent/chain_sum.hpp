#pragma once

// Chain sums
//
//   s(n) = sum over 1 <= x_1 <= x_2 < x_3 <= x_4 < ... of w(x_1) ... w(x_n)
//
// with the default weight w(x) = x^{-p}. Relations alternate: the one between
// x_j and x_{j+1} is <= for odd j and < for even j.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "valent/errors.hpp"
#include "valent/log_num.hpp"

namespace valent {

enum class Relation { LessEq, Less };

// Relation between x_j and x_{j+1} (1-based j).
constexpr Relation relation_after(int j) { return (j % 2 == 1) ? Relation::LessEq : Relation::Less; }

// Weight x -> F(x) given through its logarithm. PowerWeight(p) is x^{-p}.
class Weight {
 public:
  static Weight power(double p);
  static Weight custom(std::function<double(std::int64_t)> log_weight, std::string name = "custom");

  double log_at(std::int64_t x) const { return log_weight_(x); }
  // Exponent p when this is a power weight.
  std::optional<double> power_exponent() const { return power_; }
  const std::string& name() const { return name_; }

 private:
  std::function<double(std::int64_t)> log_weight_;
  std::optional<double> power_;
  std::string name_;
};

enum class Precision { Standard, Extended };

struct ChainSpec {
  int n = 1;
  double p = 2.0;
  std::optional<std::int64_t> trunc;  // nullopt: unbounded
  Weight weight = Weight::power(2.0);

  static ChainSpec power(int n, double p, std::optional<std::int64_t> trunc);

  // Relation sequence r_1 .. r_{n-1}.
  std::vector<Relation> pattern() const;
  // Throws DomainError for n < 0, trunc < 1, or an unbounded trunc with p <= 1.
  void validate() const;
};

struct ChainSumResult {
  LogNum log_s;
  std::int64_t T_used = 0;
  double tail_estimate = 0.0;
  double k = 0.0;
};

// Thrown by s_adaptive when T would exceed the hard cap.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, ChainSumResult best)
      : std::runtime_error(what), best_(best) {}
  const ChainSumResult& best() const { return best_; }

 private:
  ChainSumResult best_;
};

// k = n * s^{1/(np)}
double k_from_log_s(int n, double p, LogNum log_s);

// Exhaustive enumeration. n <= 12, T <= 30.
LogNum brute_s(const ChainSpec& spec);

// Same tuples enumerated, reported individually. Used by the combinatorics
// oracles; visitor gets each admissible tuple.
void enumerate_chains(int n, std::int64_t T, const std::function<void(const std::vector<std::int64_t>&)>& visit);

// Layer recursion f_1 = w, f_j(x) = w(x) * sum_{y r_{j-1} x} f_{j-1}(y).
// O(n T) time, O(T) memory. Empty index set gives LogNum::zero().
LogNum dp_s(const ChainSpec& spec, Precision precision = Precision::Standard);

// Upper bound j^{1-p}/(p-1) for sum_{m>j} m^{-p}.
double tail_bound(std::int64_t j, double p);

struct AdaptiveOptions {
  std::int64_t hard_cap_T = std::int64_t{1} << 26;
  Precision precision = Precision::Standard;
};

// dp_s with T doubling from 4n until k is stable to rel_tol and the last-layer
// tail estimate is below rel_tol.
ChainSumResult s_adaptive(int n, double p, double rel_tol, const AdaptiveOptions& options = {});

struct DeficitResult {
  double value = 0.0;  // (1/n) ln(delta_n / s'_n); -inf when delta_n == 0
  std::int64_t T = 0;  // truncation used for s'_n
  bool approximate = false;  // n^A exceeded the cap
};

// Empirical truncation error of the finite sum at T = floor(n^A).
DeficitResult truncation_deficit(int n, double p, double A, double rel_tol,
                                 const AdaptiveOptions& options = {});

// b(n) = (log s + p n ln n) / n, bounded in n for a correct s.
double growth_check(int n, double p, const ChainSumResult& result);

// log of the witness (1,1,2,2,...,m,m): -2p ln(m!).
double even_chain_lower_bound(int m, double p);

// Upper bound factor for s(2m+1)/s(2m): the last element exceeds x_{2m} >= m,
// so s(2m+1) <= m^{1-p}/(p-1) s(2m).
double odd_step_bound(int m, double p);

}  // namespace valent
