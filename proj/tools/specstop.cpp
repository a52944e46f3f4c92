// specstop command line: Monte Carlo runs, rate tables, problem export and
// the quick invariant self-check.

#include "specstop/errors.hpp"
#include "specstop/experiment.hpp"
#include "specstop/operator_model.hpp"
#include "specstop/rate_theory.hpp"
#include "specstop/selfcheck.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <cmath>

#ifndef SPECSTOP_VERSION
#define SPECSTOP_VERSION "0.0.0"
#endif

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct RunArgs {
  std::string config;
  std::string out;
  unsigned threads = 1;
};

struct RatesArgs {
  std::vector<double> q{2.0}, p{2.0}, nu{1.0}, rho{1.0}, n{100.0};
};

struct ProblemArgs {
  std::string kind = "deriv2";
  long long m = 1000;
  int example_case = 1;
  bool no_symmetrize = false;
  double q = 2.0;
  double scale = 1.0;
  std::string source = "flat:10";
  double nu = 1.0;
  double rho = 1.0;
  std::string export_path;
};

int cmd_run(const RunArgs& args) {
  auto config = specstop::load_config(args.config);
  const std::filesystem::path out_dir(args.out);
  std::filesystem::create_directories(out_dir);
  config.output = out_dir / "risk_table.csv";
  const auto table = specstop::run_experiment(config, args.threads);
  specstop::emit_csv(table, config.output);
  std::cerr << "wrote " << config.output.string() << " and " << specstop::raw_path_for(config.output).string() << "\n";
  return kOk;
}

int cmd_rates(const RatesArgs& args) {
  std::printf("n,q,p,nu,rho,branch,rate\n");
  for (double n : args.n)
    for (double q : args.q)
      for (double p : args.p)
        for (double nu : args.nu)
          for (double rho : args.rho) {
            if (n != std::floor(n) || n < 2) throw specstop::InvalidArgument("rates: n must be an integer >= 2");
            specstop::RateParams params;
            params.q = q;
            params.p = p;
            params.nu = nu;
            params.rho = rho;
            const auto count = static_cast<specstop::Index>(n);
            const double rate = specstop::minimax_rate(static_cast<double>(count), params);
            std::printf("%lld,%.6g,%.6g,%.6g,%.6g,%s,%.6g\n", static_cast<long long>(count), q, p, nu, rho,
                        std::string(specstop::to_string(specstop::minimax_branch(params))).c_str(), rate);
          }
  return kOk;
}

int cmd_problem(const ProblemArgs& args) {
  specstop::ProblemSpec spec;
  if (args.kind == "deriv2") spec.kind = specstop::ProblemSpec::Kind::deriv2;
  else if (args.kind == "diagonal") spec.kind = specstop::ProblemSpec::Kind::diagonal;
  else throw specstop::InvalidArgument("problem: --kind must be deriv2 or diagonal");
  spec.m = args.m;
  spec.example_case = args.example_case;
  spec.symmetrize = !args.no_symmetrize;
  spec.q = args.q;
  spec.scale = args.scale;
  spec.source = args.source;
  spec.nu = args.nu;
  spec.rho = args.rho;
  const auto problem = specstop::build_problem(spec);
  specstop::write_problem_csv(problem, args.export_path);
  std::cerr << "wrote " << problem.m() << " components to " << args.export_path << "\n";
  return kOk;
}

int cmd_selfcheck() {
  bool all = true;
  for (const auto& r : specstop::run_selfcheck()) {
    std::printf("[%s] %s (%s)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    all = all && r.passed;
  }
  return all ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral cut-off with discrepancy-type stopping rules for repeated measurements", "specstop"};
  app.set_version_flag("--version", std::string("specstop ") + SPECSTOP_VERSION + " (" + __DATE__ + ")");
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run a Monte Carlo experiment from a config file");
  run->add_option("--config", run_args.config, "Experiment config (key = value)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_args.out, "Output directory")->required();
  run->add_option("--threads", run_args.threads, "Worker threads")->check(CLI::Range(1u, 1024u));

  RatesArgs rates_args;
  auto* rates = app.add_subcommand("rates", "Print minimax rates over a parameter grid as CSV");
  rates->add_option("--q", rates_args.q, "Singular value decay exponent(s)")->delimiter(',');
  rates->add_option("--p", rates_args.p, "Variance decay exponent(s)")->delimiter(',');
  rates->add_option("--nu", rates_args.nu, "Smoothness")->delimiter(',');
  rates->add_option("--rho", rates_args.rho, "Source radius")->delimiter(',');
  rates->add_option("--n", rates_args.n, "Sample size(s)")->delimiter(',');

  ProblemArgs problem_args;
  auto* problem = app.add_subcommand("problem", "Build a forward problem and export it as CSV");
  problem->add_option("--kind", problem_args.kind, "deriv2 or diagonal")->check(CLI::IsMember({"deriv2", "diagonal"}));
  problem->add_option("--m", problem_args.m, "Number of components")->check(CLI::PositiveNumber);
  problem->add_option("--case", problem_args.example_case, "deriv2 example (1, 2, 3)")->check(CLI::Range(1, 3));
  problem->add_flag("--no-symmetrize", problem_args.no_symmetrize, "deriv2: keep A instead of A^T A");
  problem->add_option("--q", problem_args.q, "diagonal: decay exponent");
  problem->add_option("--scale", problem_args.scale, "diagonal: sigma_1");
  problem->add_option("--source", problem_args.source, "diagonal: flat:J, single:j0 or geometric:r");
  problem->add_option("--nu", problem_args.nu, "diagonal: smoothness");
  problem->add_option("--rho", problem_args.rho, "diagonal: source radius");
  problem->add_option("--export", problem_args.export_path, "Output CSV")->required();

  auto* selfcheck = app.add_subcommand("selfcheck", "Run the fast invariant suite");

  if (argc <= 1) {
    std::cerr << app.help();
    return kUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*rates) return cmd_rates(rates_args);
    if (*problem) return cmd_problem(problem_args);
    if (*selfcheck) return cmd_selfcheck();
  } catch (const specstop::ConfigurationError& e) {
    std::cerr << "specstop: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "specstop: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
