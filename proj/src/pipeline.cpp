#include "valent/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "valent/errors.hpp"
#include "valent/special_functions.hpp"

namespace valent {
namespace {

constexpr double kExactLimit = 9007199254740992.0;  // 2^53

void require_alpha(double alpha) {
  if (!(alpha > 1.0)) throw DomainError("partition: requires alpha > 1");
}

DyadicPartition build_levels(double alpha, int l) {
  require_alpha(alpha);
  if (l < 0) throw DomainError("partition: level count must be nonnegative");
  DyadicPartition part;
  part.alpha = alpha;
  part.l = l;
  part.lower.resize(static_cast<std::size_t>(l) + 2);
  for (int i = 0; i <= l + 1; ++i) part.lower[i] = std::pow(alpha, i);
  part.c.resize(static_cast<std::size_t>(l) + 1);
  // #{y in Z : lo <= y < hi} = ceil(hi) - ceil(lo)
  for (int i = 0; i <= l; ++i) part.c[i] = std::ceil(part.lower[i + 1]) - std::ceil(part.lower[i]);
  return part;
}

// log(1 + e^x)
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// E_i = ln(D_i - 1) = ln 4 + 2 i p ln alpha + 2 lambda
double level_exponent(int i, double lambda, double alpha, double p) {
  return std::log(4.0) + 2.0 * i * p * std::log(alpha) + 2.0 * lambda;
}

// ln((sqrt D + 1)/(sqrt D - 1)) from E = ln(D - 1).
double log_ratio(double E) {
  if (E > 0.0) return 2.0 * std::atanh(std::exp(-0.5 * softplus(E)));
  return 2.0 * std::log1p(std::exp(0.5 * softplus(E))) - E;
}

// x ln x with 0 ln 0 = 0
double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void require_size(const std::vector<double>& a, const DyadicPartition& part) {
  if (a.size() != part.c.size()) throw ContractError("composition length must equal level count");
}

void require_in_domain(double a, double c) {
  if (!(a >= 0.0 && a <= 2.0 * c)) {
    std::ostringstream os;
    os << "occupancy " << a << " outside [0, " << 2.0 * c << "]";
    throw DomainError(os.str());
  }
}

// log of one level's factor alpha^{-i a p} C(c + a/2, a) in the Beta form.
double level_log_hprime(int i, double a, double c, double alpha, double p) {
  require_in_domain(a, c);
  // 1/((c + a/2 + 1) B(a + 1, c - a/2 + 1)) = Gamma(c + a/2 + 1) / (Gamma(a + 1) Gamma(c - a/2 + 1))
  return -i * a * p * std::log(alpha) + log_gamma_ratio(c - 0.5 * a + 1.0, a) - log_gamma(a + 1.0);
}

std::uint64_t exact_binomial(std::uint64_t top, std::uint64_t k) {
  if (k > top) return 0;
  k = std::min(k, top - k);
  unsigned __int128 r = 1;
  for (std::uint64_t j = 1; j <= k; ++j) {
    r = r * (top - k + j) / j;
    if (r > std::numeric_limits<std::uint64_t>::max()) throw SizeError("binomial overflows 64 bits");
  }
  return static_cast<std::uint64_t>(r);
}

double log_binomial(double top, double k) {
  if (k < 0.0 || k > top) return -std::numeric_limits<double>::infinity();
  return log_gamma_ratio(top - k + 1.0, k) - log_gamma(k + 1.0);
}

void check_composition(const std::vector<std::int64_t>& a, const DyadicPartition& part) {
  if (a.size() != part.c.size()) throw ContractError("composition length must equal level count");
  for (auto v : a) {
    if (v < 0) throw ContractError("occupancies must be nonnegative");
  }
}

std::atomic<bool> g_corrupt_binomial{false};

std::int64_t shift_width(std::int64_t a, std::int64_t preceding) {
  const std::int64_t w = a == 0 ? 0 : shift_offset(a, phase_for_preceding(preceding));
  return g_corrupt_binomial.load(std::memory_order_relaxed) && a >= 2 ? w + 1 : w;
}

double occupancy_sum(double lambda, const DyadicPartition& part, double p) {
  double s = 0.0;
  for (int i = 0; i <= part.l; ++i) {
    if (part.c[i] == 0.0) continue;
    s += 2.0 * part.c[i] * std::exp(-0.5 * softplus(level_exponent(i, lambda, part.alpha, p)));
  }
  return s;
}

}  // namespace

std::int64_t DyadicPartition::max_index() const {
  double total = 0.0;
  for (double v : c) total += v;
  if (total >= kExactLimit) throw SizeError("partition: index range exceeds exact integers");
  return static_cast<std::int64_t>(total);
}

int DyadicPartition::level(std::int64_t y) const {
  if (y < 1) throw DomainError("level: requires y >= 1");
  const auto it = std::upper_bound(lower.begin(), lower.end(), static_cast<double>(y));
  return static_cast<int>(it - lower.begin()) - 1;
}

double DyadicPartition::P(std::int64_t y) const { return lower[static_cast<std::size_t>(level(y))]; }

double DyadicPartition::total_capacity() const {
  double s = 0.0;
  for (double v : c) s += 2.0 * v;
  return s;
}

DyadicPartition make_partition(int n, double alpha, double A) {
  require_alpha(alpha);
  if (n < 1) throw DomainError("make_partition: requires n >= 1");
  if (!(A > 0.0)) throw DomainError("make_partition: requires A > 0");
  const int l = static_cast<int>(std::floor(A * std::log(static_cast<double>(n)) / std::log(alpha)));
  DyadicPartition part = build_levels(alpha, l);
  part.T_prime = alpha * std::pow(static_cast<double>(n), A);
  return part;
}

DyadicPartition make_partition_levels(double alpha, int l) {
  DyadicPartition part = build_levels(alpha, l);
  part.T_prime = part.lower.back();
  return part;
}

DyadicPartition make_partition_to(double alpha, std::int64_t max_index) {
  require_alpha(alpha);
  if (max_index < 1) throw DomainError("make_partition_to: requires max_index >= 1");
  int l = 0;
  while (std::pow(alpha, l + 1) <= static_cast<double>(max_index)) ++l;
  DyadicPartition part = build_levels(alpha, l);
  part.c[l] = static_cast<double>(max_index) - std::ceil(part.lower[l]) + 1.0;
  part.T_prime = static_cast<double>(max_index);
  return part;
}

LogNum s_dyadic(int n, double p, const DyadicPartition& partition, Precision precision) {
  const std::int64_t T = partition.max_index();
  std::vector<double> log_p(static_cast<std::size_t>(partition.l) + 1);
  for (int i = 0; i <= partition.l; ++i) log_p[i] = -p * i * std::log(partition.alpha);
  ChainSpec spec;
  spec.n = n;
  spec.p = p;
  spec.trunc = T;
  spec.weight = Weight::custom([&partition, log_p](std::int64_t x) { return log_p[partition.level(x)]; },
                               "dyadic");
  return dp_s(spec, precision);
}

std::vector<std::int64_t> shift_map(const std::vector<std::int64_t>& y, Phase phase) {
  std::vector<std::int64_t> x(y.size());
  const int offset = phase == Phase::LessEqFirst ? 0 : 1;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (k > 0) {
      const Relation r = relation_after(static_cast<int>(k) + offset);
      const bool ok = r == Relation::LessEq ? y[k - 1] <= y[k] : y[k - 1] < y[k];
      if (!ok) throw ContractError("shift_map: sequence violates its relation pattern");
    }
    x[k] = y[k] + shift_offset(static_cast<std::int64_t>(k) + 1, phase);
  }
  return x;
}

std::vector<std::int64_t> shift_inverse(const std::vector<std::int64_t>& x, Phase phase) {
  std::vector<std::int64_t> y(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (k > 0 && !(x[k - 1] < x[k])) throw ContractError("shift_inverse: sequence is not strictly increasing");
    y[k] = x[k] - shift_offset(static_cast<std::int64_t>(k) + 1, phase);
  }
  return y;
}

namespace dev {
void set_corrupt_binomial(bool on) { g_corrupt_binomial.store(on); }
}  // namespace dev

std::uint64_t chains_in_level(std::int64_t c, std::int64_t a, Phase phase) {
  if (c < 0 || a < 0) throw ContractError("chains_in_level: requires c, a >= 0");
  const std::int64_t w = a == 0 ? 0 : shift_offset(a, phase);
  return exact_binomial(static_cast<std::uint64_t>(c + w), static_cast<std::uint64_t>(a));
}

LogNum count_H(const std::vector<std::int64_t>& a, const DyadicPartition& partition) {
  check_composition(a, partition);
  double total = 0.0;
  std::int64_t preceding = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double top = partition.c[i] + static_cast<double>(shift_width(a[i], preceding));
    total += log_binomial(top, static_cast<double>(a[i]));
    preceding += a[i];
  }
  return LogNum::from_log(total);
}

std::uint64_t count_H_exact(const std::vector<std::int64_t>& a, const DyadicPartition& partition) {
  check_composition(a, partition);
  unsigned __int128 total = 1;
  std::int64_t preceding = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (partition.c[i] >= kExactLimit) throw SizeError("count_H_exact: level too large");
    const auto top = static_cast<std::uint64_t>(partition.c[i]) +
                     static_cast<std::uint64_t>(shift_width(a[i], preceding));
    total *= exact_binomial(top, static_cast<std::uint64_t>(a[i]));
    if (total > std::numeric_limits<std::uint64_t>::max()) throw SizeError("count_H_exact: overflow");
    preceding += a[i];
  }
  return static_cast<std::uint64_t>(total);
}

LogNum H_prime(const std::vector<double>& a, const DyadicPartition& partition, double p) {
  require_size(a, partition);
  double total = 0.0;
  for (int i = 0; i <= partition.l; ++i) total += level_log_hprime(i, a[i], partition.c[i], partition.alpha, p);
  return LogNum::from_log(total);
}

LogNum s1_sum(int n, double p, const DyadicPartition& partition) {
  if (n < 0) throw DomainError("s1_sum: requires n >= 0");
  const double compositions = std::exp(log_binomial(n + partition.l, partition.l));
  if (compositions > 1e6) {
    throw SizeError("s1_sum: more than 1e6 compositions; use s2_max or s4_value");
  }
  // sums[m]: total over the levels seen so far with m elements placed.
  std::vector<LogNum> sums(static_cast<std::size_t>(n) + 1, LogNum::zero());
  sums[0] = LogNum::one();
  for (int i = 0; i <= partition.l; ++i) {
    const double c = partition.c[i];
    const int cap = static_cast<int>(std::min<double>(n, 2.0 * c));
    std::vector<LogNum> factor(static_cast<std::size_t>(cap) + 1);
    for (int a = 0; a <= cap; ++a) factor[a] = LogNum::from_log(level_log_hprime(i, a, c, partition.alpha, p));
    std::vector<LogNum> next(sums.size(), LogNum::zero());
    for (int m = 0; m <= n; ++m) {
      LogNum acc;
      for (int a = 0; a <= std::min(m, cap); ++a) acc += sums[m - a] * factor[a];
      next[m] = acc;
    }
    sums.swap(next);
  }
  return sums[n];
}

IntegerMax s2_max(int n, double p, const DyadicPartition& partition) {
  if (n < 0) throw DomainError("s2_max: requires n >= 0");
  const int levels = partition.l + 1;
  std::vector<std::int64_t> cap(levels);
  std::int64_t cap_total = 0;
  for (int i = 0; i < levels; ++i) {
    cap[i] = static_cast<std::int64_t>(std::min<double>(std::floor(2.0 * partition.c[i]), n));
    cap_total += cap[i];
  }
  if (n > cap_total) throw InfeasibleError("s2_max: n exceeds the total level capacity");

  std::vector<std::int64_t> a(levels, 0);
  if (n == cap_total) {
    a = cap;
  } else if (levels == 1) {
    a[0] = n;
  } else {
    const double lambda = solve_lambda(n, partition, p);
    const auto real = occupancy_at(lambda, partition, p);
    for (int i = 0; i < levels; ++i) a[i] = std::clamp<std::int64_t>(std::llround(real[i]), 0, cap[i]);
  }

  auto h = [&](int i, std::int64_t v) {
    return level_log_hprime(i, static_cast<double>(v), partition.c[i], partition.alpha, p);
  };
  auto gain_up = [&](int i) {
    return a[i] < cap[i] ? h(i, a[i] + 1) - h(i, a[i]) : -std::numeric_limits<double>::infinity();
  };
  auto loss_down = [&](int i) {
    return a[i] > 0 ? h(i, a[i]) - h(i, a[i] - 1) : std::numeric_limits<double>::infinity();
  };

  // Restore the sum, then exchange units. log H' is separable and concave in
  // each a_i, so a point no single transfer improves is a global maximum.
  std::int64_t sum = 0;
  for (auto v : a) sum += v;
  while (sum < n) {
    int best = -1;
    for (int i = 0; i < levels; ++i) {
      if (a[i] < cap[i] && (best < 0 || gain_up(i) > gain_up(best))) best = i;
    }
    ++a[best];
    ++sum;
  }
  while (sum > n) {
    int best = -1;
    for (int i = 0; i < levels; ++i) {
      if (a[i] > 0 && (best < 0 || loss_down(i) < loss_down(best))) best = i;
    }
    --a[best];
    --sum;
  }
  for (;;) {
    // Best two raises and cheapest two removals suffice to find the best
    // transfer between distinct levels.
    int up1 = -1, up2 = -1, down1 = -1, down2 = -1;
    for (int i = 0; i < levels; ++i) {
      if (a[i] < cap[i]) {
        if (up1 < 0 || gain_up(i) > gain_up(up1)) {
          up2 = up1;
          up1 = i;
        } else if (up2 < 0 || gain_up(i) > gain_up(up2)) {
          up2 = i;
        }
      }
      if (a[i] > 0) {
        if (down1 < 0 || loss_down(i) < loss_down(down1)) {
          down2 = down1;
          down1 = i;
        } else if (down2 < 0 || loss_down(i) < loss_down(down2)) {
          down2 = i;
        }
      }
    }
    int up = -1, down = -1;
    double best_gain = 0.0;
    auto consider = [&](int i, int j) {
      if (i < 0 || j < 0 || i == j) return;
      const double delta = gain_up(i) - loss_down(j);
      if (delta > best_gain + 1e-13 * (1.0 + std::abs(gain_up(i)))) {
        best_gain = delta;
        up = i;
        down = j;
      }
    };
    consider(up1, down1);
    consider(up1, down2);
    consider(up2, down1);
    if (up < 0) break;
    ++a[up];
    --a[down];
  }

  std::vector<double> real_a(a.begin(), a.end());
  return {H_prime(real_a, partition, p), a};
}

std::vector<double> occupancy_at(double lambda, const DyadicPartition& partition, double p) {
  std::vector<double> a(partition.c.size());
  for (int i = 0; i <= partition.l; ++i) {
    a[i] = 2.0 * partition.c[i] * std::exp(-0.5 * softplus(level_exponent(i, lambda, partition.alpha, p)));
  }
  return a;
}

double solve_lambda(int n, const DyadicPartition& partition, double p) {
  if (n < 1) throw DomainError("solve_lambda: requires n >= 1");
  if (!(static_cast<double>(n) < partition.total_capacity())) {
    throw InfeasibleError("solve_lambda: n must be below sum 2 c_i");
  }
  const double target = n;
  const double start = -p * std::log(target);
  double step = 1.0;
  double lo = start - step;
  double hi = start + step;
  while (occupancy_sum(lo, partition, p) < target) {
    step *= 2.0;
    lo = start - step;
  }
  step = 1.0;
  while (occupancy_sum(hi, partition, p) > target) {
    step *= 2.0;
    hi = start + step;
  }
  for (int iter = 0; iter < 200 && hi - lo > 0.0; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (occupancy_sum(mid, partition, p) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double r_lo = std::abs(occupancy_sum(lo, partition, p) - target);
  const double r_hi = std::abs(occupancy_sum(hi, partition, p) - target);
  return r_lo <= r_hi ? lo : hi;
}

PipelineResult s4_value(int n, const DyadicPartition& partition, double p, double lambda) {
  PipelineResult r;
  r.lambda = lambda;
  r.D.resize(partition.c.size());
  double xi = 0.0;
  for (int i = 0; i <= partition.l; ++i) {
    const double E = level_exponent(i, lambda, partition.alpha, p);
    if (!std::isfinite(E)) throw std::logic_error("s4_value: D_i - 1 is not a positive finite number");
    r.D[i] = 1.0 + std::exp(E);
    if (partition.c[i] != 0.0) xi += partition.c[i] * log_ratio(E);
  }
  r.xi = xi;
  r.log_s4 = lambda * n + xi;
  r.k4 = n * std::exp(r.log_s4 / (n * p));
  r.residual = occupancy_sum(lambda, partition, p) - n;
  return r;
}

double stirling_exponent(const std::vector<double>& a, const DyadicPartition& partition, double p) {
  require_size(a, partition);
  double g = 0.0;
  for (int i = 0; i <= partition.l; ++i) {
    const double c = partition.c[i];
    require_in_domain(a[i], c);
    if (c == 0.0) continue;
    // (c + a/2) ln(c + a/2) - (c - a/2) ln(c - a/2) written around c so that
    // huge levels with small occupancy do not cancel.
    const double r = a[i] / (2.0 * c);
    double diff = a[i] * std::log(c);
    diff += c * ((1.0 + r) * std::log1p(r) - (r < 1.0 ? (1.0 - r) * std::log1p(-r) : 0.0));
    g += -i * a[i] * p * std::log(partition.alpha) + diff - xlogx(a[i]);
  }
  return g;
}

std::vector<double> stirling_gradient(const std::vector<double>& a, const DyadicPartition& partition, double p) {
  require_size(a, partition);
  std::vector<double> grad(a.size());
  for (int i = 0; i <= partition.l; ++i) {
    const double ratio = partition.c[i] / a[i];
    grad[i] = -i * p * std::log(partition.alpha) + 0.5 * std::log(ratio * ratio - 0.25);
  }
  return grad;
}

double foc_residual(double lambda, const std::vector<double>& a, const DyadicPartition& partition, double p) {
  const auto grad = stirling_gradient(a, partition, p);
  double worst = 0.0;
  for (int i = 0; i <= partition.l; ++i) {
    if (partition.c[i] == 0.0 || a[i] == 0.0) continue;
    const double q = partition.c[i] / a[i];
    const double kappa = q * q / (q * q - 0.25);
    if (!std::isfinite(grad[i]) || !std::isfinite(kappa)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(grad[i] - lambda) / std::max(1.0, kappa));
  }
  return worst;
}

double stirling_gap(const std::vector<double>& a, const DyadicPartition& partition, double p) {
  return H_prime(a, partition, p).log() - stirling_exponent(a, partition, p);
}

double lambda_asymptote(double n, double alpha, double p) {
  return -p * std::log(n) + p * std::log((alpha - 1.0) / std::log(alpha) * J_value(p));
}

XiBounds xi_bounds_check(const PipelineResult& result, int n, double alpha, double p) {
  XiBounds b;
  b.lower = n * (1.0 - std::pow(alpha, -2.0 * p)) / (2.0 * (alpha - 1.0));
  b.xi = result.xi;
  b.upper = n * alpha * (std::pow(alpha, 2.0 * p) - 1.0) / (2.0 * (alpha - 1.0));
  return b;
}

double k4_limit(double alpha, double p) {
  return (alpha - 1.0) / std::log(alpha) * std::numbers::e * J_value(p);
}

}  // namespace valent
