#include "valent/chain_sum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace valent {
namespace {

// Neumaier-compensated running sum.
// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  void scale(double f) {
    sum *= f;
    carry *= f;
  }
  double value() const { return sum + carry; }
};

struct PlainSum {
  double sum = 0.0;
  void add(double v) { sum += v; }
  void scale(double f) { sum *= f; }
  double value() const { return sum; }
};

struct DpDetail {
  LogNum log_s;
  // Total mass of layer n-1 (LogNum::one() for n == 1); the last variable's
  // tail beyond T is at most this times the tail of the weight.
  LogNum last_prefix;
};

std::int64_t first_nonzero(int j) { return (j + 1) / 2; }

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Cells per block sharing one log scale. A layer spans far more than the
// double exponent range between the support edge near j/2 and the bulk, and
// the edge region is amplified by (x_bulk / x_edge)^p per layer, so neither a
// single layer scale nor flushing the edge is accurate. Inside a block the
// range stays within a few hundred decades.
constexpr std::int64_t kBlock = 64;
// Inside a block, relative to the block maximum. Cells below it would only
// round into subnormals.
constexpr double kFlush = 1e-300;

template <class Acc>
DpDetail dp_layers(const ChainSpec& spec) {
  const int n = spec.n;
  const std::int64_t T = *spec.trunc;
  DpDetail out{LogNum::one(), LogNum::one()};
  if (n == 0) return out;
  if (T < first_nonzero(n)) return {LogNum::zero(), LogNum::zero()};

  const auto size = static_cast<std::size_t>(T) + 1;
  std::vector<double> w(size, 0.0);
  double log_w_max = kNegInf;
  for (std::int64_t x = 1; x <= T; ++x) {
    const double lw = spec.weight.log_at(x);
    w[x] = lw;
    log_w_max = std::max(log_w_max, lw);
  }
  if (log_w_max == kNegInf) return {LogNum::zero(), LogNum::zero()};
  for (std::int64_t x = 1; x <= T; ++x) w[x] = std::exp(w[x] - log_w_max);

  // Cell x of block b = x / kBlock holds f(x) * exp(-block_log[b]).
  const std::int64_t blocks = T / kBlock + 1;
  std::vector<double> f = w;
  std::vector<double> block_log(static_cast<std::size_t>(blocks), log_w_max);

  auto normalize_block = [&](std::int64_t b, double log_scale) {
    const std::int64_t x0 = std::max<std::int64_t>(1, b * kBlock);
    const std::int64_t x1 = std::min(T, b * kBlock + kBlock - 1);
    double m = 0.0;
    for (std::int64_t x = x0; x <= x1; ++x) m = std::max(m, f[x]);
    if (m == 0.0) {
      block_log[b] = kNegInf;
      return;
    }
    const double inv = 1.0 / m;
    for (std::int64_t x = x0; x <= x1; ++x) {
      const double v = f[x] * inv;
      f[x] = v < kFlush ? 0.0 : v;
    }
    block_log[b] = log_scale + std::log(m);
  };
  for (std::int64_t b = 0; b < blocks; ++b) normalize_block(b, log_w_max);

  for (int j = 2; j <= n; ++j) {
    const bool inclusive = relation_after(j - 1) == Relation::LessEq;
    const std::int64_t lo = first_nonzero(j - 1);
    std::fill(f.begin(), f.begin() + lo, 0.0);
    // acc holds the running prefix sum of layer j-1 times exp(-acc_log).
    Acc acc;
    double acc_log = kNegInf;
    bool any = false;
    for (std::int64_t b = lo / kBlock; b < blocks; ++b) {
      const double prev_log = block_log[b];
      double factor = 0.0;
      if (prev_log != kNegInf) {
        if (prev_log > acc_log) {
          acc.scale(acc_log == kNegInf ? 0.0 : std::exp(acc_log - prev_log));
          acc_log = prev_log;
        }
        factor = std::exp(prev_log - acc_log);
      }
      if (acc_log == kNegInf) {
        block_log[b] = kNegInf;
        continue;
      }
      const std::int64_t x0 = std::max(lo, b * kBlock);
      const std::int64_t x1 = std::min(T, b * kBlock + kBlock - 1);
      for (std::int64_t x = x0; x <= x1; ++x) {
        const double prev = f[x] * factor;
        if (inclusive) acc.add(prev);
        f[x] = w[x] * acc.value();
        if (!inclusive) acc.add(prev);
      }
      normalize_block(b, acc_log + log_w_max);
      any = any || block_log[b] != kNegInf;
    }
    if (j == n) {
      out.last_prefix = acc.value() > 0.0 ? LogNum::from_log(acc_log + std::log(acc.value())) : LogNum::zero();
    }
    if (!any) return {LogNum::zero(), LogNum::zero()};
  }

  LogNum total = LogNum::zero();
  for (std::int64_t b = 0; b < blocks; ++b) {
    if (block_log[b] == kNegInf) continue;
    const std::int64_t x0 = std::max<std::int64_t>(1, b * kBlock);
    const std::int64_t x1 = std::min(T, b * kBlock + kBlock - 1);
    Acc part;
    for (std::int64_t x = x0; x <= x1; ++x) part.add(f[x]);
    if (part.value() > 0.0) total += LogNum::from_log(block_log[b] + std::log(part.value()));
  }
  out.log_s = total;
  return out;
}

DpDetail dp_detail(const ChainSpec& spec, Precision precision) {
  spec.validate();
  if (!spec.trunc) throw DomainError("dp_s: truncation must be finite");
  return precision == Precision::Extended ? dp_layers<CompensatedSum>(spec)
                                          : dp_layers<PlainSum>(spec);
}

void enumerate_rec(int n, std::int64_t T, std::vector<std::int64_t>& xs, int depth,
                   const std::function<void(const std::vector<std::int64_t>&)>& visit) {
  if (depth == n) {
    visit(xs);
    return;
  }
  std::int64_t lo = 1;
  if (depth > 0) {
    lo = relation_after(depth) == Relation::LessEq ? xs[depth - 1] : xs[depth - 1] + 1;
  }
  for (std::int64_t x = lo; x <= T; ++x) {
    xs[depth] = x;
    enumerate_rec(n, T, xs, depth + 1, visit);
  }
}

}  // namespace

Weight Weight::power(double p) {
  Weight w;
  w.log_weight_ = [p](std::int64_t x) { return -p * std::log(static_cast<double>(x)); };
  w.power_ = p;
  std::ostringstream os;
  os << "power(" << p << ")";
  w.name_ = os.str();
  return w;
}

Weight Weight::custom(std::function<double(std::int64_t)> log_weight, std::string name) {
  Weight w;
  w.log_weight_ = std::move(log_weight);
  w.name_ = std::move(name);
  return w;
}

ChainSpec ChainSpec::power(int n, double p, std::optional<std::int64_t> trunc) {
  ChainSpec s;
  s.n = n;
  s.p = p;
  s.trunc = trunc;
  s.weight = Weight::power(p);
  return s;
}

std::vector<Relation> ChainSpec::pattern() const {
  std::vector<Relation> r;
  for (int j = 1; j < n; ++j) r.push_back(relation_after(j));
  return r;
}

void ChainSpec::validate() const {
  if (n < 0) throw DomainError("chain length must be nonnegative");
  if (trunc && *trunc < 1) throw DomainError("truncation must be positive");
  if (!trunc) {
    const auto q = weight.power_exponent();
    if (q && !(*q > 1.0)) throw DomainError("unbounded chain sum diverges for p <= 1");
  }
}

double k_from_log_s(int n, double p, LogNum log_s) {
  return n * std::exp(log_s.log() / (n * p));
}

LogNum brute_s(const ChainSpec& spec) {
  spec.validate();
  if (!spec.trunc) throw DomainError("brute_s: truncation must be finite");
  if (spec.n > 12 || *spec.trunc > 30) throw SizeError("brute_s: requires n <= 12 and T <= 30");
  if (spec.n == 0) return LogNum::one();
  CompensatedSum sum;
  enumerate_chains(spec.n, *spec.trunc, [&](const std::vector<std::int64_t>& xs) {
    double lw = 0.0;
    for (auto x : xs) lw += spec.weight.log_at(x);
    sum.add(std::exp(lw));
  });
  return LogNum::from_value(sum.value());
}

void enumerate_chains(int n, std::int64_t T,
                      const std::function<void(const std::vector<std::int64_t>&)>& visit) {
  std::vector<std::int64_t> xs(static_cast<std::size_t>(std::max(n, 0)));
  enumerate_rec(n, T, xs, 0, visit);
}

LogNum dp_s(const ChainSpec& spec, Precision precision) { return dp_detail(spec, precision).log_s; }

double tail_bound(std::int64_t j, double p) {
  if (!(p > 1.0)) throw DomainError("tail_bound: requires p > 1");
  if (j < 1) throw DomainError("tail_bound: requires j >= 1");
  return std::pow(static_cast<double>(j), 1.0 - p) / (p - 1.0);
}

ChainSumResult s_adaptive(int n, double p, double rel_tol, const AdaptiveOptions& options) {
  if (!(p > 1.0)) throw DomainError("s_adaptive: requires p > 1");
  if (!(rel_tol > 0.0 && rel_tol < 0.5)) throw DomainError("s_adaptive: rel_tol must lie in (0, 0.5)");
  if (n < 1) throw DomainError("s_adaptive: requires n >= 1");

  ChainSumResult best;
  double prev_k = std::numeric_limits<double>::quiet_NaN();
  for (std::int64_t T = 4 * static_cast<std::int64_t>(n);; T *= 2) {
    if (T > options.hard_cap_T) {
      std::ostringstream os;
      os << "s_adaptive: T would exceed cap " << options.hard_cap_T << " (n=" << n << ", p=" << p << ")";
      throw ResourceError(os.str(), best);
    }
    const auto detail = dp_detail(ChainSpec::power(n, p, T), options.precision);
    const double k = k_from_log_s(n, p, detail.log_s);
    const double tail = std::exp(detail.last_prefix.log() - detail.log_s.log()) * tail_bound(T, p) / (n * p);
    const double change = std::isnan(prev_k) ? tail : std::abs(k - prev_k) / k;
    best = ChainSumResult{detail.log_s, T, change, k};
    if (!std::isnan(prev_k) && change < rel_tol && tail < rel_tol) return best;
    prev_k = k;
  }
}

DeficitResult truncation_deficit(int n, double p, double A, double rel_tol, const AdaptiveOptions& options) {
  if (!(p > 1.0)) throw DomainError("truncation_deficit: requires p > 1");
  DeficitResult out;
  const double target = std::floor(std::pow(static_cast<double>(n), A));
  if (target > static_cast<double>(options.hard_cap_T)) {
    out.T = options.hard_cap_T;
    out.approximate = true;
  } else {
    out.T = std::max<std::int64_t>(1, static_cast<std::int64_t>(target));
  }
  const LogNum truncated = dp_s(ChainSpec::power(n, p, out.T), options.precision);

  ChainSumResult full;
  try {
    full = s_adaptive(n, p, rel_tol, options);
  } catch (const ResourceError& e) {
    full = e.best();
    out.approximate = true;
  }
  const double gap = full.log_s.log() - truncated.log();
  out.value = gap > 0.0 ? std::log(std::expm1(gap)) / n : -std::numeric_limits<double>::infinity();
  return out;
}

double growth_check(int n, double p, const ChainSumResult& result) {
  return (result.log_s.log() + p * n * std::log(static_cast<double>(n))) / n;
}

double even_chain_lower_bound(int m, double p) { return -2.0 * p * std::lgamma(m + 1.0); }

double odd_step_bound(int m, double p) {
  if (!(p > 1.0)) throw DomainError("odd_step_bound: requires p > 1");
  return std::pow(static_cast<double>(m), 1.0 - p) / (p - 1.0);
}

}  // namespace valent
