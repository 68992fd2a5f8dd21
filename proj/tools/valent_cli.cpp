#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "valent/errors.hpp"
#include "valent/harness.hpp"

namespace h = valent::harness;

namespace {

struct Flags {
  std::vector<double> p;
  std::vector<int> n;
  std::vector<double> alpha;
  double A = 0.0;
  double rel_tol = 0.0;
  std::int64_t cap_T = 0;
  std::string precision;
  std::string format;
  std::string out;
  std::uint64_t seed = 0;
  std::string config;
  bool corrupt_binomial = false;
};

void add_common(CLI::App* cmd, Flags& f, bool sweep) {
  cmd->add_option("--p", f.p, "p values (comma list)")->delimiter(',');
  if (sweep) {
    cmd->add_option("--n", f.n, "chain lengths (comma list)")->delimiter(',');
    cmd->add_option("--alpha", f.alpha, "partition ratios (comma list)")->delimiter(',');
    cmd->add_option("--A", f.A, "truncation exponent, T' = alpha n^A");
    cmd->add_option("--rel-tol", f.rel_tol, "relative tolerance for s_adaptive");
    cmd->add_option("--cap-T", f.cap_T, "hard cap on the truncation T");
    cmd->add_option("--precision", f.precision, "standard or extended")
        ->check(CLI::IsMember({"standard", "extended"}));
  }
  cmd->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", f.out, "output file (default stdout)");
  cmd->add_option("--seed", f.seed, "seed for sampled checks");
  cmd->add_option("--config", f.config, "JSON file with RunConfig fields");
}

h::RunConfig build_config(h::Command command, const CLI::App* cmd, const Flags& f) {
  auto config = h::RunConfig::defaults(command);
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw h::ConfigError("cannot read config file " + f.config);
    std::stringstream buf;
    buf << in.rdbuf();
    config.merge_json(buf.str());
  }
  auto given = [cmd](const char* name) { return cmd->get_option_no_throw(name) && cmd->count(name) > 0; };
  if (given("--p")) config.p_list = f.p;
  if (given("--n")) config.n_list = f.n;
  if (given("--alpha")) config.alpha_list = f.alpha;
  if (given("--A")) config.A = f.A;
  if (given("--rel-tol")) config.rel_tol = f.rel_tol;
  if (given("--cap-T")) config.hard_cap_T = f.cap_T;
  if (given("--precision"))
    config.precision_mode = f.precision == "extended" ? valent::Precision::Extended : valent::Precision::Standard;
  if (given("--format")) config.output_format = f.format == "json" ? h::Format::Json : h::Format::Csv;
  if (given("--out")) config.output_path = f.out;
  if (given("--seed")) config.seed = f.seed;
  config.validate(command);
  return config;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw h::ConfigError("cannot write " + path);
  out << text;
}

void print_summary(const h::Summary& summary) {
  for (const auto& line : summary.lines) std::cerr << line << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chain-sum experiments: constants, convergence sweeps, pipeline sweeps, invariant checks"};
  app.require_subcommand(1);
  Flags f;
  auto* constants = app.add_subcommand("constants", "limit, types and bounds per p");
  auto* converge = app.add_subcommand("converge", "k_n against its limit over n");
  auto* pipeline = app.add_subcommand("pipeline", "Lagrange reduction over (p, alpha, n)");
  auto* verify = app.add_subcommand("verify", "run the invariant suites");
  add_common(constants, f, false);
  add_common(converge, f, true);
  add_common(pipeline, f, true);
  add_common(verify, f, false);
  verify->add_flag("--dev-corrupt-binomial", f.corrupt_binomial, "mutation test: count_H suite must fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (constants->parsed()) {
      const auto config = build_config(h::Command::Constants, constants, f);
      const auto report = h::cmd_constants(config);
      emit(h::render(report.rows, config.output_format), config.output_path);
      print_summary(report.summary);
      return h::exit_code(report.summary);
    }
    if (converge->parsed()) {
      const auto config = build_config(h::Command::Converge, converge, f);
      const auto report = h::cmd_converge(config);
      emit(h::render(report.rows, config.output_format), config.output_path);
      print_summary(report.summary);
      return h::exit_code(report.summary);
    }
    if (pipeline->parsed()) {
      const auto config = build_config(h::Command::Pipeline, pipeline, f);
      const auto report = h::cmd_pipeline(config);
      emit(h::render(report.rows, config.output_format), config.output_path);
      print_summary(report.summary);
      return h::exit_code(report.summary);
    }
    const auto config = build_config(h::Command::Verify, verify, f);
    const auto report = h::cmd_verify({config.seed, f.corrupt_binomial});
    emit(h::render(report.rows, config.output_format), config.output_path);
    print_summary(report.summary);
    return h::exit_code(report.summary);
  } catch (const h::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const valent::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
