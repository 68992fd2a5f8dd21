#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "valent/harness.hpp"
#include "valent/pipeline.hpp"
#include "valent/special_functions.hpp"

namespace valent::harness {
namespace {

using Seq = std::vector<std::int64_t>;
constexpr std::size_t kMaxListed = 20;

class Suite {
 public:
  explicit Suite(std::string name) { result_.name = std::move(name); }

  void check(bool ok, const std::function<std::string()>& describe) {
    ++result_.checks;
    if (ok) return;
    ++failed_;
    if (result_.failures.size() < kMaxListed) result_.failures.push_back(describe());
  }

  SuiteResult finish() {
    if (failed_ > kMaxListed) result_.failures.push_back("... " + std::to_string(failed_ - kMaxListed) + " more");
    return std::move(result_);
  }

 private:
  SuiteResult result_;
  std::size_t failed_ = 0;
};

template <class... Args>
std::string params(const Args&... args) {
  std::ostringstream os;
  os.precision(17);
  ((os << args), ...);
  return os.str();
}

void for_each_patterned(int len, std::int64_t c, Phase phase, const std::function<void(const Seq&)>& visit) {
  const int offset = phase == Phase::LessEqFirst ? 0 : 1;
  Seq y(static_cast<std::size_t>(len));
  std::function<void(int)> rec = [&](int k) {
    if (k == len) {
      visit(y);
      return;
    }
    std::int64_t lo = 1;
    if (k > 0) lo = relation_after(k + offset) == Relation::LessEq ? y[k - 1] : y[k - 1] + 1;
    for (std::int64_t v = lo; v <= c; ++v) {
      y[k] = v;
      rec(k + 1);
    }
  };
  rec(0);
}

void for_each_composition(int n, int parts, const std::function<void(const Seq&)>& visit) {
  Seq a(static_cast<std::size_t>(parts), 0);
  std::function<void(int, int)> rec = [&](int idx, int left) {
    if (idx == parts - 1) {
      a[idx] = left;
      visit(a);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      a[idx] = v;
      rec(idx + 1, left - v);
    }
  };
  rec(0, n);
}

SuiteResult oracle_suite(std::mt19937_64& rng, std::uint64_t seed) {
  Suite s("oracle_equivalence");
  auto compare = [&](int n, std::int64_t T, double p, Precision precision) {
    const auto spec = ChainSpec::power(n, p, T);
    const double brute = brute_s(spec).log();
    const double dp = dp_s(spec, precision).log();
    const bool ok = brute == dp || std::abs(brute - dp) <= 1e-12;
    s.check(ok, [&] {
      return params("dp_s vs brute_s n=", n, " T=", T, " p=", p, " precision=",
                    precision == Precision::Standard ? "standard" : "extended", " brute=", brute, " dp=", dp);
    });
  };
  for (double p : {1.5, 2.0, 3.0})
    for (int n = 0; n <= 8; ++n)
      for (std::int64_t T = 1; T <= 12; ++T) compare(n, T, p, Precision::Standard);
  std::uniform_real_distribution<double> pd(1.05, 4.0);
  std::uniform_int_distribution<int> nd(1, 8);
  std::uniform_int_distribution<std::int64_t> td(1, 12);
  for (int trial = 0; trial < 60; ++trial) {
    const double p = pd(rng);
    const int n = nd(rng);
    const auto T = td(rng);
    compare(n, T, p, trial % 2 ? Precision::Extended : Precision::Standard);
  }
  // zeta oracle for n = 1
  for (double p : {2.0, 4.0}) {
    const auto r = s_adaptive(1, p, 1e-6);
    const double zeta = p == 2.0 ? std::numbers::pi * std::numbers::pi / 6.0
                                 : std::pow(std::numbers::pi, 4) / 90.0;
    s.check(std::abs(r.log_s.value() - zeta) / zeta <= 1e-5,
            [&] { return params("s_adaptive(1) vs zeta p=", p, " got=", r.log_s.value(), " seed=", seed); });
  }
  return s.finish();
}

SuiteResult bijection_suite(std::mt19937_64& rng, std::uint64_t seed) {
  Suite s("bijection");
  for (Phase phase : {Phase::LessEqFirst, Phase::LessFirst}) {
    const char* name = phase == Phase::LessEqFirst ? "leq_first" : "less_first";
    for (int len = 1; len <= 6; ++len) {
      for (int c = 1; c <= 8; ++c) {
        const std::int64_t top = c + shift_offset(len, phase);
        std::set<Seq> images;
        std::uint64_t count = 0;
        bool ok = true;
        for_each_patterned(len, c, phase, [&](const Seq& y) {
          const auto x = shift_map(y, phase);
          for (std::size_t k = 0; k < x.size(); ++k) {
            ok = ok && x[k] >= 1 && x[k] <= top && (k == 0 || x[k - 1] < x[k]);
          }
          ok = ok && shift_inverse(x, phase) == y;
          images.insert(x);
          ++count;
        });
        ok = ok && images.size() == count && count == chains_in_level(top - shift_offset(len, phase), len, phase);
        s.check(ok, [&] { return params("shift_map phase=", name, " len=", len, " range=", c); });
      }
    }
  }
  std::uniform_int_distribution<int> lend(1, 40);
  std::uniform_int_distribution<std::int64_t> cd(1, 1000);
  for (int trial = 0; trial < 200; ++trial) {
    const Phase phase = trial % 2 ? Phase::LessFirst : Phase::LessEqFirst;
    const int len = lend(rng);
    const std::int64_t top = cd(rng) + len;
    // random strictly increasing x in [1, top], mapped back and forth
    std::set<std::int64_t> picked;
    std::uniform_int_distribution<std::int64_t> xd(1, top);
    while (static_cast<int>(picked.size()) < len) picked.insert(xd(rng));
    const Seq x(picked.begin(), picked.end());
    bool ok = true;
    try {
      ok = shift_map(shift_inverse(x, phase), phase) == x;
    } catch (const std::exception&) {
      ok = false;
    }
    // Only x within the image range are preimages of patterned y.
    const bool in_range = x.front() >= 1 && shift_inverse(x, phase).front() >= 1;
    s.check(ok || !in_range, [&] { return params("round trip len=", len, " top=", top, " seed=", seed); });
  }
  return s.finish();
}

SuiteResult count_suite(std::mt19937_64& rng, std::uint64_t seed) {
  Suite s("count_H");
  std::uniform_int_distribution<std::int64_t> td(1, 20);
  std::uniform_int_distribution<int> nd(1, 7);
  for (int trial = 0; trial < 40; ++trial) {
    const double alpha = trial % 2 ? 1.5 : 2.0;
    const auto T = td(rng);
    const int n = nd(rng);
    const auto part = make_partition_to(alpha, T);
    std::map<Seq, std::uint64_t> counts;
    std::uint64_t total = 0;
    enumerate_chains(n, T, [&](const Seq& xs) {
      Seq occ(part.c.size(), 0);
      for (auto x : xs) ++occ[part.level(x)];
      ++counts[occ];
      ++total;
    });
    std::uint64_t sum = 0;
    for_each_composition(n, part.l + 1, [&](const Seq& a) {
      const auto exact = count_H_exact(a, part);
      sum += exact;
      const auto it = counts.find(a);
      const std::uint64_t want = it == counts.end() ? 0 : it->second;
      s.check(exact == want, [&] {
        std::ostringstream os;
        os << "count_H alpha=" << alpha << " T'=" << T << " n=" << n << " a=(";
        for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
        os << ") got=" << exact << " brute=" << want << " seed=" << seed;
        return os.str();
      });
      const auto log_form = count_H(a, part);
      const bool log_ok = exact == 0 ? log_form.is_zero()
                                     : std::abs(log_form.log() - std::log(static_cast<double>(exact))) <= 1e-10;
      s.check(log_ok, [&] { return params("count_H log form alpha=", alpha, " T'=", T, " n=", n); });
    });
    s.check(sum == total, [&] { return params("count_H total alpha=", alpha, " T'=", T, " n=", n, " seed=", seed); });
  }
  return s.finish();
}

SuiteResult identity_suite(std::mt19937_64& rng, std::uint64_t seed) {
  Suite s("identity");
  // H' reproduces C(c + a/2, a) for even a entering on <=.
  std::uniform_int_distribution<std::int64_t> cd(1, 1000000);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = trial < 40 ? static_cast<std::int64_t>(trial + 1) : cd(rng);
    std::uniform_int_distribution<std::int64_t> ad(0, std::min<std::int64_t>(c, 60));
    const auto a = 2 * ad(rng);
    const auto part = make_partition_levels(static_cast<double>(c + 1), 0);
    if (part.c[0] != static_cast<double>(c)) continue;
    const double hp = H_prime({static_cast<double>(a)}, part, 2.0).log();
    const double binom = count_H({a}, part).log();
    // lgamma of arguments near c carries an absolute error of order eps c ln c
    const double scale = static_cast<double>(c + a) * std::log(static_cast<double>(c + a) + 2.0);
    s.check(std::abs(hp - binom) <= 1e-9 * std::max(1.0, std::abs(binom)) + 64 * 2.2e-16 * scale,
            [&] { return params("H' identity c=", c, " a=", a, " H'=", hp, " binom=", binom, " seed=", seed); });
  }
  // Closed forms of the constants.
  for (double p : {2.5, 3.0, 4.0, 7.0}) {
    const auto q = valent_type_check(p, 1e-8);
    s.check(q.agrees, [&] { return params("valent_type quadrature p=", p, " rel_diff=", q.rel_diff); });
  }
  for (double p : {1.5, 2.0, 3.0, 7.0}) {
    const auto q = J_value_check(p, 1e-9);
    s.check(q.agrees, [&] { return params("J quadrature p=", p, " rel_diff=", q.rel_diff); });
  }
  return s.finish();
}

SuiteResult sandwich_suite(std::mt19937_64& rng, std::uint64_t seed) {
  Suite s("sandwich");
  std::uniform_real_distribution<double> ad(1.05, 3.0);
  std::uniform_real_distribution<double> pd(1.2, 4.0);
  std::uniform_int_distribution<std::int64_t> td(1, 300);
  std::uniform_int_distribution<int> nd(1, 10);
  for (int trial = 0; trial < 60; ++trial) {
    const double alpha = ad(rng);
    const double p = pd(rng);
    const auto T = td(rng);
    const int n = nd(rng);
    const auto part = make_partition_to(alpha, T);
    const double plain = dp_s(ChainSpec::power(n, p, T)).log();
    const double coarse = s_dyadic(n, p, part).log();
    const bool ok = plain == -INFINITY ? coarse == -INFINITY
                                       : plain <= coarse + 1e-12 && coarse <= plain + n * p * std::log(alpha) + 1e-12;
    s.check(ok, [&] {
      return params("dyadic sandwich alpha=", alpha, " p=", p, " T=", T, " n=", n, " plain=", plain,
                    " coarse=", coarse, " seed=", seed);
    });
  }
  for (double p : {3.0, 4.0, 5.0, 10.0}) {
    const auto [lo, hi] = type_bounds(p);
    const double t = valent_type(p);
    s.check(lo <= t && t <= hi, [&] { return params("type bounds p=", p, " lo=", lo, " t=", t, " hi=", hi); });
  }
  return s.finish();
}

SuiteResult gradient_suite(std::mt19937_64& rng, std::uint64_t seed) {
  Suite s("gradient");
  std::uniform_real_distribution<double> unit(0.02, 0.98);
  std::uniform_real_distribution<double> ad(1.05, 2.0);
  std::uniform_int_distribution<int> nd(50, 5000);
  for (int trial = 0; trial < 100; ++trial) {
    const double alpha = ad(rng);
    const int n = nd(rng);
    const auto part = make_partition(n, alpha, 2.0);
    // first-order condition at a(lambda)
    const double lambda = solve_lambda(n, part, 2.0);
    const auto occ = occupancy_at(lambda, part, 2.0);
    const double foc = foc_residual(lambda, occ, part, 2.0);
    s.check(foc <= 1e-9 * std::max(1.0, std::abs(lambda)),
            [&] { return params("FOC alpha=", alpha, " n=", n, " residual=", foc, " seed=", seed); });

    // central differences at a random interior point, one coordinate
    std::vector<double> a(part.c.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = 2.0 * part.c[i] * unit(rng);
    std::uniform_int_distribution<std::size_t> id(0, a.size() - 1);
    std::size_t i = id(rng);
    while (part.c[i] == 0.0) i = (i + 1) % a.size();
    const auto grad = stirling_gradient(a, part, 2.0);
    // per-level terms vanish at a_j = 0; isolate level i
    std::vector<double> plus(a.size(), 0.0), minus(a.size(), 0.0);
    const double h = 1e-4 * a[i];
    plus[i] = a[i] + h;
    minus[i] = a[i] - h;
    const double fd = (stirling_exponent(plus, part, 2.0) - stirling_exponent(minus, part, 2.0)) / (2.0 * h);
    const double err = std::abs(fd - grad[i]);
    s.check(err <= 1e-6 * std::max(1.0, std::abs(grad[i])), [&] {
      return params("finite difference alpha=", alpha, " n=", n, " level=", i, " fd=", fd, " grad=", grad[i],
                    " seed=", seed);
    });
  }
  return s.finish();
}

}  // namespace

Report<SuiteResult> cmd_verify(const VerifyOptions& options) {
  using SuiteFn = SuiteResult (*)(std::mt19937_64&, std::uint64_t);
  const std::vector<SuiteFn> suites{oracle_suite,   bijection_suite, count_suite,
                                    identity_suite, sandwich_suite,  gradient_suite};
  dev::set_corrupt_binomial(options.corrupt_binomial);
  Report<SuiteResult> report;
  report.rows.resize(suites.size());
  try {
    // Each suite owns a generator derived from the seed and its index.
    run_parallel(suites.size(), [&](std::size_t k) {
      std::seed_seq seq{options.seed, static_cast<std::uint64_t>(k)};
      std::mt19937_64 rng(seq);
      report.rows[k] = suites[k](rng, options.seed);
    });
  } catch (...) {
    dev::set_corrupt_binomial(false);
    throw;
  }
  dev::set_corrupt_binomial(false);
  for (const auto& r : report.rows) {
    report.summary.lines.push_back(r.name + ": " + (r.passed() ? "pass" : "FAIL") + " (" + std::to_string(r.checks) +
                                   " checks)");
    report.summary.ok = report.summary.ok && r.passed();
  }
  return report;
}

}  // namespace valent::harness
