#include "valent/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "valent/errors.hpp"
#include "valent/pipeline.hpp"
#include "valent/special_functions.hpp"

namespace valent::harness {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x) {
  if (!std::isfinite(x)) {
    if (std::isnan(x)) return "";
    return x > 0 ? "inf" : "-inf";
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

json num(double x) {
  if (std::isnan(x)) return nullptr;
  if (!std::isfinite(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

std::string note(const std::string& key, double value) { return key + "=" + fmt(value); }

template <class T>
std::vector<T> json_list(const json& j, const char* key) {
  if (!j.is_array()) throw ConfigError(std::string("config: ") + key + " must be an array");
  std::vector<T> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(std::string("config: ") + key + " entries must be numbers");
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(std::string("config: ") + key + " entries must be integers");
    }
    out.push_back(v.get<T>());
  }
  return out;
}

double json_number(const json& j, const char* key) {
  if (!j.is_number()) throw ConfigError(std::string("config: ") + key + " must be a number");
  return j.get<double>();
}

std::string json_string(const json& j, const char* key) {
  if (!j.is_string()) throw ConfigError(std::string("config: ") + key + " must be a string");
  return j.get<std::string>();
}

double default_A(double p) { return 5.0 * p / (p - 1.0); }

template <class Row>
void sort_rows(std::vector<Row>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    const double aa = a.alpha.value_or(-1.0), ba = b.alpha.value_or(-1.0);
    if (a.p != b.p) return a.p < b.p;
    if (aa != ba) return aa < ba;
    return a.n < b.n;
  });
}

}  // namespace

RunConfig RunConfig::defaults(Command command) {
  RunConfig c;
  c.p_list = {2.0};
  c.alpha_list = {1.1};
  switch (command) {
    case Command::Constants:
      c.p_list = {1.5, 2.0, 3.0, 4.0, 7.0};
      c.n_list = {1};
      break;
    case Command::Converge:
      for (int n = 1; n <= 1024; n *= 2) c.n_list.push_back(n);
      break;
    case Command::Pipeline:
      for (int n = 256; n <= 16384; n *= 2) c.n_list.push_back(n);
      break;
    case Command::Verify:
      c.n_list = {1};
      break;
  }
  return c;
}

void RunConfig::merge_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "p_list") {
      p_list = json_list<double>(value, "p_list");
    } else if (key == "n_list") {
      n_list = json_list<int>(value, "n_list");
    } else if (key == "alpha_list") {
      alpha_list = json_list<double>(value, "alpha_list");
    } else if (key == "A") {
      if (value.is_null()) {
        A.reset();
      } else {
        A = json_number(value, "A");
      }
    } else if (key == "rel_tol") {
      rel_tol = json_number(value, "rel_tol");
    } else if (key == "hard_cap_T") {
      if (!value.is_number_integer()) throw ConfigError("config: hard_cap_T must be an integer");
      hard_cap_T = value.get<std::int64_t>();
    } else if (key == "precision_mode") {
      const auto s = json_string(value, "precision_mode");
      if (s == "standard") {
        precision_mode = Precision::Standard;
      } else if (s == "extended") {
        precision_mode = Precision::Extended;
      } else {
        throw ConfigError("config: precision_mode must be standard or extended");
      }
    } else if (key == "output_format") {
      const auto s = json_string(value, "output_format");
      if (s == "csv") {
        output_format = Format::Csv;
      } else if (s == "json") {
        output_format = Format::Json;
      } else {
        throw ConfigError("config: output_format must be csv or json");
      }
    } else if (key == "output_path") {
      output_path = json_string(value, "output_path");
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) throw ConfigError("config: seed must be a nonnegative integer");
      seed = value.get<std::uint64_t>();
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
}

void RunConfig::validate(Command command) const {
  if (p_list.empty() || n_list.empty() || alpha_list.empty()) throw ConfigError("config: lists must be nonempty");
  if (!(rel_tol > 0.0 && rel_tol < 0.5)) throw ConfigError("config: rel_tol must lie in (0, 0.5)");
  if (hard_cap_T < 1024) throw ConfigError("config: hard_cap_T must be at least 1024");
  for (double p : p_list) {
    if (!std::isfinite(p)) throw ConfigError("config: p must be finite");
  }
  for (int n : n_list) {
    if (n < 1) throw ConfigError("config: n must be positive");
  }
  for (double a : alpha_list) {
    if (!std::isfinite(a)) throw ConfigError("config: alpha must be finite");
  }
  if (A && !(*A > 0.0 && std::isfinite(*A))) throw ConfigError("config: A must be positive");
  if (command == Command::Converge || command == Command::Pipeline) {
    for (double p : p_list) {
      if (!(p > 1.0)) throw ConfigError("config: this command requires p > 1");
    }
  }
  if (command == Command::Pipeline) {
    for (double a : alpha_list) {
      if (!(a > 1.0)) throw ConfigError("config: pipeline requires alpha > 1");
    }
  }
}

unsigned worker_count() {
  if (const char* env = std::getenv("VALENT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void run_parallel(std::size_t size, const std::function<void(std::size_t)>& task) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), size));
  if (workers <= 1) {
    for (std::size_t i = 0; i < size; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < size; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

int exit_code(const Summary& summary) {
  if (summary.resource_exhausted) return 3;
  return summary.ok ? 0 : 1;
}

double richardson_log(int n1, double k1, int n2, double k2) {
  const double l1 = std::log(static_cast<double>(n1));
  const double l2 = std::log(static_cast<double>(n2));
  return (k2 * l2 - k1 * l1) / (l2 - l1);
}

Report<ConstantsRow> cmd_constants(const RunConfig& config) {
  Report<ConstantsRow> report;
  report.rows.resize(config.p_list.size());
  run_parallel(config.p_list.size(), [&](std::size_t i) {
    ConstantsRow row;
    row.p = config.p_list[i];
    try {
      const auto c = constants_report(row.p);
      row.limit_L = c.limit_L;
      row.nevanlinna_type = c.nevanlinna_type;
      row.valent_type = c.valent_type;
      row.J = c.J;
      row.bound_lo = c.bound_lo;
      row.bound_hi = c.bound_hi;
      if (row.p > 2.0) {
        row.in_bounds = row.bound_lo <= row.valent_type && row.valent_type <= row.bound_hi;
        if (!*row.in_bounds) row.flags.push_back("valent_type outside bounds");
      } else {
        row.flags.push_back("valent_type undefined (p <= 2)");
      }
    } catch (const DomainError& e) {
      row.limit_L = row.nevanlinna_type = row.valent_type = row.J = row.bound_lo = row.bound_hi = kNaN;
      row.flags.push_back(std::string("domain error: ") + e.what());
    }
    report.rows[i] = row;
  });
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const ConstantsRow& a, const ConstantsRow& b) { return a.p < b.p; });
  for (const auto& row : report.rows) {
    if (row.in_bounds && !*row.in_bounds) report.summary.ok = false;
  }
  return report;
}

Report<ReportRow> cmd_converge(const RunConfig& config) {
  config.validate(Command::Converge);
  struct Job {
    double p;
    int n;
  };
  std::vector<Job> jobs;
  for (double p : config.p_list)
    for (int n : config.n_list) jobs.push_back({p, n});

  Report<ReportRow> report;
  report.rows.resize(jobs.size());
  std::vector<char> exhausted(jobs.size(), 0);
  AdaptiveOptions options{config.hard_cap_T, config.precision_mode};
  // Largest n first so the long rows start early.
  std::vector<std::size_t> order(jobs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return jobs[a].n > jobs[b].n; });

  run_parallel(jobs.size(), [&](std::size_t slot) {
    const std::size_t i = order[slot];
    const auto [p, n] = jobs[i];
    ReportRow row;
    row.p = p;
    row.n = n;
    row.limit_L = limit_value(p);
    row.lambda = row.k4 = row.xi = kNaN;
    ChainSumResult result;
    try {
      result = s_adaptive(n, p, config.rel_tol, options);
    } catch (const ResourceError& e) {
      result = e.best();
      if (result.T_used == 0) {
        exhausted[i] = 1;
        row.flags.push_back("cap reached before any evaluation (hard_cap_T=" + std::to_string(config.hard_cap_T) +
                            ")");
        row.log_s = row.k_n = row.rel_err = kNaN;
        report.rows[i] = row;
        return;
      }
      row.flags.push_back("capped at T=" + std::to_string(result.T_used) + " (hard_cap_T=" +
                          std::to_string(config.hard_cap_T) + ", rel_tol=" + fmt(config.rel_tol) +
                          " not met, last change=" + fmt(result.tail_estimate) + ")");
    }
    row.T_used = result.T_used;
    row.log_s = result.log_s.log();
    row.k_n = result.k;
    row.rel_err = std::abs(row.k_n - row.limit_L) / row.limit_L;
    row.notes.push_back(note("b_n", growth_check(n, p, result)));
    if (n % 2 == 0) row.notes.push_back(note("type_estimate", p / (2.0 * std::numbers::e) * row.k_n));
    report.rows[i] = row;
  });
  sort_rows(report.rows);
  for (char e : exhausted) report.summary.resource_exhausted = report.summary.resource_exhausted || e;

  std::map<double, std::vector<const ReportRow*>> by_p;
  for (const auto& row : report.rows) {
    if (!std::isnan(row.k_n)) by_p[row.p].push_back(&row);
  }
  for (const auto& [p, rows] : by_p) {
    std::ostringstream os;
    os << "p=" << fmt(p) << ": ";
    // Trend across the last three doublings, 1% relative noise band.
    std::vector<const ReportRow*> tail;
    for (auto it = rows.rbegin(); it != rows.rend() && tail.size() < 4; ++it) {
      if (!tail.empty() && tail.back()->n != 2 * (*it)->n) break;
      tail.push_back(*it);
    }
    if (tail.size() == 4) {
      bool improving = true;
      for (std::size_t k = 0; k + 1 < tail.size(); ++k) {
        improving = improving && tail[k]->rel_err <= tail[k + 1]->rel_err * 1.01;
      }
      os << "rel_err trend over last three doublings " << (improving ? "nonincreasing" : "NOT nonincreasing");
      if (!improving) report.summary.ok = false;
    } else {
      os << "trend needs four n values in doubling steps";
    }
    if (rows.size() >= 2) {
      const auto* a = rows[rows.size() - 2];
      const auto* b = rows.back();
      if (a->n > 1) {
        const double K = richardson_log(a->n, a->k_n, b->n, b->k_n);
        os << "; 1/ln n extrapolation " << fmt(K) << " (rel_err " << fmt(std::abs(K - b->limit_L) / b->limit_L)
           << ", limit " << fmt(b->limit_L) << ")";
      }
    }
    report.summary.lines.push_back(os.str());
  }
  return report;
}

Report<ReportRow> cmd_pipeline(const RunConfig& config) {
  config.validate(Command::Pipeline);
  struct Job {
    double p;
    double alpha;
    int n;
  };
  std::vector<Job> jobs;
  for (double p : config.p_list)
    for (double alpha : config.alpha_list)
      for (int n : config.n_list) jobs.push_back({p, alpha, n});

  Report<ReportRow> report;
  report.rows.resize(jobs.size());
  std::vector<char> broken(jobs.size(), 0);

  run_parallel(jobs.size(), [&](std::size_t i) {
    const auto [p, alpha, n] = jobs[i];
    const double A = config.A.value_or(default_A(p));
    ReportRow row;
    row.p = p;
    row.n = n;
    row.alpha = alpha;
    row.limit_L = limit_value(p);
    row.k_n = kNaN;
    const auto part = make_partition(n, alpha, A);
    if (part.T_prime < 9.2e18) row.T_used = static_cast<std::int64_t>(std::floor(part.T_prime));
    row.notes.push_back(note("A", A));
    row.notes.push_back(note("levels", part.l + 1));
    row.notes.push_back(note("T_prime", part.T_prime));
    try {
      const double lambda = solve_lambda(n, part, p);
      const auto res = s4_value(n, part, p, lambda);
      row.lambda = res.lambda;
      row.log_s = res.log_s4;
      row.k4 = res.k4;
      row.xi = res.xi;
      row.rel_err = std::abs(row.k4 - row.limit_L) / row.limit_L;

      const double target = k4_limit(alpha, p);
      row.notes.push_back(note("k4_target", target));
      row.notes.push_back(note("k4_rel_err", std::abs(row.k4 - target) / target));
      row.notes.push_back(note("lambda_gap", res.lambda - lambda_asymptote(n, alpha, p)));
      row.notes.push_back(note("residual", res.residual));
      if (std::abs(res.residual) > 1e-9 * n) {
        row.flags.push_back("residual above 1e-9 n");
        broken[i] = 1;
      }

      const auto b = xi_bounds_check(res, n, alpha, p);
      const double slack = 0.05 * n;
      row.notes.push_back(note("xi_lower", b.lower));
      row.notes.push_back(note("xi_upper", b.upper));
      if (b.xi < b.lower - slack || b.xi > b.upper + slack) {
        row.flags.push_back("xi outside bounds (slack=0.05n, an implementation choice)");
        broken[i] = 1;
      }

      // Per-element gaps between successive stages.
      const auto s2 = s2_max(n, p, part);
      row.notes.push_back(note("gap_s4_s2", (res.log_s4 - s2.value.log()) / n));
      try {
        const double s1 = s1_sum(n, p, part).log();
        row.notes.push_back(note("gap_s1_s2", (s1 - s2.value.log()) / n));
        if (part.T_prime * n <= 5e7) {
          const auto exact_part = make_partition_to(alpha, part.max_index());
          const double dy = s_dyadic(n, p, exact_part).log();
          row.notes.push_back(note("gap_dyadic_s1", (dy - s1) / n));
        }
      } catch (const SizeError&) {
        row.notes.push_back("gap_s1_s2=skipped (more than 1e6 compositions)");
      }
    } catch (const InfeasibleError& e) {
      row.lambda = row.log_s = row.k4 = row.xi = row.rel_err = kNaN;
      row.flags.push_back(std::string("infeasible: ") + e.what());
    }
    report.rows[i] = row;
  });
  sort_rows(report.rows);
  for (char b : broken) report.summary.ok = report.summary.ok && !b;

  // k4 trend at the largest n per (p, alpha).
  std::map<std::pair<double, double>, const ReportRow*> last;
  for (const auto& row : report.rows) {
    if (!std::isnan(row.k4)) last[{row.p, *row.alpha}] = &row;
  }
  std::map<double, std::vector<std::pair<double, double>>> per_p;
  for (const auto& [key, row] : last) {
    const double target = k4_limit(key.second, key.first);
    const double err = std::abs(row->k4 - target) / target;
    std::ostringstream os;
    os << "p=" << fmt(key.first) << " alpha=" << fmt(key.second) << " n=" << row->n << ": k4=" << fmt(row->k4)
       << " target=" << fmt(target) << " rel_err=" << fmt(err);
    if (row->n >= 1024) {
      os << (err <= 0.10 ? " within 10%" : " NOT within 10%");
      if (err > 0.10) report.summary.ok = false;
    } else {
      os << " (n < 1024, not asserted)";
    }
    report.summary.lines.push_back(os.str());
    per_p[key.first].push_back({key.second, row->k4});
  }
  for (const auto& [p, values] : per_p) {
    if (values.size() < 2) continue;
    bool ordered = true;
    for (std::size_t k = 1; k < values.size(); ++k) ordered = ordered && values[k].second > values[k - 1].second;
    report.summary.lines.push_back("p=" + fmt(p) + ": k4 across alpha " +
                                   (ordered ? "ordered like the prefactor" : "not ordered like the prefactor"));
  }
  return report;
}

std::string render(const std::vector<ReportRow>& rows, Format format) {
  if (format == Format::Json) {
    json out = json::array();
    for (const auto& r : rows) {
      json o = json::object();
      o["p"] = num(r.p);
      o["n"] = r.n;
      o["alpha"] = r.alpha ? num(*r.alpha) : json(nullptr);
      o["T_used"] = r.T_used ? json(*r.T_used) : json(nullptr);
      o["log_s"] = num(r.log_s);
      o["k_n"] = num(r.k_n);
      o["limit_L"] = num(r.limit_L);
      o["rel_err"] = num(r.rel_err);
      o["lambda"] = num(r.lambda);
      o["k4"] = num(r.k4);
      o["xi"] = num(r.xi);
      o["flags"] = r.flags;
      o["notes"] = r.notes;
      out.push_back(std::move(o));
    }
    return out.dump(2) + "\n";
  }
  std::string out = "p,n,alpha,T_used,log_s,k_n,limit_L,rel_err,lambda,k4,xi,flags,notes\n";
  for (const auto& r : rows) {
    const std::vector<std::string> cells{fmt(r.p),
                                         std::to_string(r.n),
                                         r.alpha ? fmt(*r.alpha) : "",
                                         r.T_used ? std::to_string(*r.T_used) : "",
                                         fmt(r.log_s),
                                         fmt(r.k_n),
                                         fmt(r.limit_L),
                                         fmt(r.rel_err),
                                         fmt(r.lambda),
                                         fmt(r.k4),
                                         fmt(r.xi),
                                         csv_field(join(r.flags, "; ")),
                                         csv_field(join(r.notes, "; "))};
    out += join(cells, ",") + "\n";
  }
  return out;
}

std::string render(const std::vector<ConstantsRow>& rows, Format format) {
  if (format == Format::Json) {
    json out = json::array();
    for (const auto& r : rows) {
      json o = json::object();
      o["p"] = num(r.p);
      o["limit_L"] = num(r.limit_L);
      o["nevanlinna_type"] = num(r.nevanlinna_type);
      o["valent_type"] = num(r.valent_type);
      o["J"] = num(r.J);
      o["bound_lo"] = num(r.bound_lo);
      o["bound_hi"] = num(r.bound_hi);
      o["in_bounds"] = r.in_bounds ? json(*r.in_bounds) : json(nullptr);
      o["flags"] = r.flags;
      out.push_back(std::move(o));
    }
    return out.dump(2) + "\n";
  }
  std::string out = "p,limit_L,nevanlinna_type,valent_type,J,bound_lo,bound_hi,in_bounds,flags\n";
  for (const auto& r : rows) {
    const std::vector<std::string> cells{fmt(r.p),
                                         fmt(r.limit_L),
                                         fmt(r.nevanlinna_type),
                                         fmt(r.valent_type),
                                         fmt(r.J),
                                         fmt(r.bound_lo),
                                         fmt(r.bound_hi),
                                         r.in_bounds ? (*r.in_bounds ? "true" : "false") : "",
                                         csv_field(join(r.flags, "; "))};
    out += join(cells, ",") + "\n";
  }
  return out;
}

std::string render(const std::vector<SuiteResult>& rows, Format format) {
  if (format == Format::Json) {
    json out = json::array();
    for (const auto& r : rows) {
      out.push_back({{"suite", r.name}, {"checks", r.checks}, {"passed", r.passed()}, {"failures", r.failures}});
    }
    return out.dump(2) + "\n";
  }
  std::string out = "suite,checks,passed,failures\n";
  for (const auto& r : rows) {
    out += r.name + "," + std::to_string(r.checks) + "," + (r.passed() ? "true" : "false") + "," +
           csv_field(join(r.failures, "; ")) + "\n";
  }
  return out;
}

}  // namespace valent::harness
