#pragma once

#include "specstop/noise_lab.hpp"
#include "specstop/operator_model.hpp"
#include "specstop/rate_theory.hpp"
#include "specstop/stopping_rules.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace specstop {

struct ProblemSpec {
  enum class Kind { diagonal, deriv2 };

  Kind kind = Kind::diagonal;
  Index m = 200;
  // diagonal
  double q = 2.0;
  double scale = 1.0;
  std::string source = "flat:10";
  double nu = 1.0;
  double rho = 1.0;
  // deriv2
  int example_case = 1;
  bool symmetrize = true;
};

SpectralProblem build_problem(const ProblemSpec& spec);

/// One named stopping rule and its parameters. A rule of kind `oracle`
/// produces two table rows, `<label>_exact` and `<label>_empirical`.
struct RuleSpec {
  std::string label;
  Rule rule = Rule::plain;
  double eps1 = 0.5;
  double eps2 = 0.1;
  double tau = 1.0;
  double p_known = 2.0;
  double eps_known = 0.1;
  // a-priori choice
  double nu = 1.0;
  double rho = 1.0;
  double q = 2.0;
  double p = 2.0;
};

struct ExperimentConfig {
  ProblemSpec problem;
  NoiseModel noise;
  std::vector<Index> n_list;
  Index replications = 100;
  std::vector<RuleSpec> rules;
  std::uint64_t master_seed = 1;
  std::filesystem::path output;

  /// Throws ConfigurationError if an invariant is violated.
  void validate() const;
};

/// Flat `key = value` text; `#` starts a comment. Unknown or repeated keys are
/// errors. See README for the schema.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Table rows emitted per replication cell.
enum class CellKind { rule, oracle_exact, oracle_empirical };

struct Cell {
  std::string label;  ///< row label in the table
  CellKind kind = CellKind::rule;
  RuleSpec spec;
};

/// Expands rule specs into table cells (oracle rules become two cells).
std::vector<Cell> expand_cells(const std::vector<RuleSpec>& rules);

/// Stream seed of a replication: depends on the cell label, so adding a rule
/// never perturbs the draws of the others.
std::uint64_t replication_seed(std::uint64_t master_seed, Index n, const std::string& label, Index rep);

struct ReplicationResult {
  double rel_err = 0.0;
  Index k = 0;
};

/// Immutable state shared by all replications of an experiment.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  const SpectralProblem& problem() const { return problem_; }
  const Vector& variances() const { return variances_; }
  const std::vector<Cell>& cells() const { return cells_; }

  /// Pure function of its arguments.
  ReplicationResult run_replication(Index n, const Cell& cell, Index rep) const;

 private:
  ExperimentConfig config_;
  SpectralProblem problem_;
  Vector variances_;
  std::vector<Cell> cells_;
};

struct RiskRow {
  std::string rule;
  Index n = 0;
  Index replications = 0;
  double median_err = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double min = 0.0;
  double max = 0.0;
  double mean_k = 0.0;
  std::uint64_t seed = 0;
};

struct RawRow {
  std::string rule;
  Index n = 0;
  Index rep = 0;
  double rel_err = 0.0;
  Index k = 0;
};

struct RiskTable {
  std::vector<RiskRow> rows;  ///< sorted by (rule, n)
  std::vector<RawRow> raw;    ///< sorted by (rule, n, rep)

  const RiskRow* find(const std::string& rule, Index n) const;
};

/// Nearest-rank quantile of sorted data: element ceil(prob * R) (1-based),
/// so prob = 0.5 is the lower median.
double nearest_rank(const std::vector<double>& sorted, double prob);

/// Aggregates per-replication results into table rows.
RiskTable aggregate(std::vector<RawRow> raw, std::uint64_t seed);

/// Runs every (cell, n, rep) on `threads` workers. The table does not depend
/// on the worker count. On any failure a partial dump is written next to
/// config.output (when set) and the error is rethrown.
RiskTable run_experiment(const ExperimentConfig& config, unsigned threads = 1);

/// Writes the table (header rule,n,R,median_err,q25,q75,min,max,mean_k,seed)
/// and a companion <stem>_raw.csv with one line per replication.
void emit_csv(const RiskTable& table, const std::filesystem::path& path);

std::filesystem::path raw_path_for(const std::filesystem::path& path);

}  // namespace specstop
