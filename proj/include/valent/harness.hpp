#pragma once
// Experiment runner behind the `valent` command-line tool.
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "valent/chain_sum.hpp"

namespace valent::harness {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Command { Constants, Converge, Pipeline, Verify };
enum class Format { Csv, Json };

struct RunConfig {
  std::vector<double> p_list;
  std::vector<int> n_list;
  std::vector<double> alpha_list;
  std::optional<double> A;  // pipeline default: 5p/(p-1)
  double rel_tol = 1e-4;
  std::int64_t hard_cap_T = std::int64_t{1} << 26;
  Precision precision_mode = Precision::Standard;
  Format output_format = Format::Csv;
  std::string output_path;  // empty: stdout
  std::uint64_t seed = 1;

  static RunConfig defaults(Command command);
  // Overwrites the fields present in a JSON object whose keys match the
  // field names above. Throws ConfigError on unknown keys or bad types.
  void merge_json(const std::string& text);
  // Throws ConfigError.
  void validate(Command command) const;
};

struct ReportRow {
  double p = 0.0;
  int n = 0;
  std::optional<double> alpha;
  std::optional<std::int64_t> T_used;
  double log_s = 0.0;
  double k_n = 0.0;
  double limit_L = 0.0;
  double rel_err = 0.0;
  double lambda = 0.0;
  double k4 = 0.0;
  double xi = 0.0;
  std::vector<std::string> flags;
  std::vector<std::string> notes;  // diagnostics as key=value
};

struct ConstantsRow {
  double p = 0.0;
  double limit_L = 0.0;
  double nevanlinna_type = 0.0;
  double valent_type = 0.0;
  double J = 0.0;
  double bound_lo = 0.0;
  double bound_hi = 0.0;
  std::optional<bool> in_bounds;
  std::vector<std::string> flags;
};

struct SuiteResult {
  std::string name;
  int checks = 0;
  std::vector<std::string> failures;  // each carries its reproduction parameters
  bool passed() const { return failures.empty(); }
};

// Summary lines and the verdict of the trend assertions.
struct Summary {
  std::vector<std::string> lines;
  bool ok = true;
  bool resource_exhausted = false;  // a row hit the cap with nothing to fall back on
};

template <class Row>
struct Report {
  std::vector<Row> rows;
  Summary summary;
};

Report<ConstantsRow> cmd_constants(const RunConfig& config);
Report<ReportRow> cmd_converge(const RunConfig& config);
Report<ReportRow> cmd_pipeline(const RunConfig& config);

struct VerifyOptions {
  std::uint64_t seed = 1;
  bool corrupt_binomial = false;
};
Report<SuiteResult> cmd_verify(const VerifyOptions& options);

std::string render(const std::vector<ReportRow>& rows, Format format);
std::string render(const std::vector<ConstantsRow>& rows, Format format);
std::string render(const std::vector<SuiteResult>& rows, Format format);

// Two-point fit k = K + b / ln n through the last two rows; returns K.
double richardson_log(int n1, double k1, int n2, double k2);

// Worker count: VALENT_THREADS when set and positive, else hardware concurrency.
unsigned worker_count();
// Runs tasks[0..size) on at most worker_count() threads.
void run_parallel(std::size_t size, const std::function<void(std::size_t)>& task);

// 0 success, 1 invariant failure, 2 config error, 3 resource cap reached.
int exit_code(const Summary& summary);

}  // namespace valent::harness
