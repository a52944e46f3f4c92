#include "specstop/experiment.hpp"

#include "specstop/errors.hpp"
#include "specstop/estimator.hpp"
#include "specstop/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace specstop {

// ---------------------------------------------------------------------------
// problem construction

SpectralProblem build_problem(const ProblemSpec& spec) {
  switch (spec.kind) {
    case ProblemSpec::Kind::diagonal: {
      const Vector sigma = power_law_spectrum(spec.m, spec.q, spec.scale);
      const Vector xhat = make_source_element(sigma, parse_source(spec.source, spec.nu, spec.rho));
      return make_diagonal_problem(spec.m, spec.q, spec.scale, xhat);
    }
    case ProblemSpec::Kind::deriv2:
      return make_deriv2_problem(spec.m, spec.example_case, spec.symmetrize);
  }
  throw ConfigurationError("unknown problem kind");
}

// ---------------------------------------------------------------------------
// config parsing

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigurationError("config: '" + key + "' expects a number, got '" + value + "'");
  }
}

Index to_count(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15)
    throw ConfigurationError("config: '" + key + "' expects a nonnegative integer, got '" + value + "'");
  return static_cast<Index>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigurationError("config: '" + key + "' expects true/false, got '" + value + "'");
}

struct RuleDefaults {
  double eps1 = 0.5;
  double eps2 = 0.1;
  double tau = 1.0;
  double p_known = 2.0;
  double eps_known = 0.1;
  std::optional<double> nu, rho, q, p;
};

const std::set<std::string> kRuleParams = {"eps1", "eps2", "tau", "p_known", "eps_known", "nu", "rho", "q", "p"};

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  std::map<std::string, std::string> values;
  std::vector<std::string> rule_labels;
  std::map<std::string, std::map<std::string, std::string>> rule_params;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigurationError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty()) throw ConfigurationError("config line " + std::to_string(line_no) + ": empty key");

    if (key.rfind("rule.", 0) == 0) {
      const std::string rest = key.substr(5);
      const auto dot = rest.find('.');
      const std::string label = rest.substr(0, dot);
      if (label.empty()) throw ConfigurationError("config line " + std::to_string(line_no) + ": empty rule label");
      auto& params = rule_params[label];
      const std::string param = dot == std::string::npos ? "kind" : rest.substr(dot + 1);
      if (param != "kind" && !kRuleParams.count(param))
        throw ConfigurationError("config line " + std::to_string(line_no) + ": unknown rule parameter '" + param + "'");
      if (!params.emplace(param, value).second)
        throw ConfigurationError("config line " + std::to_string(line_no) + ": repeated key '" + key + "'");
      if (param == "kind") rule_labels.push_back(label);
      continue;
    }
    if (!values.emplace(key, value).second)
      throw ConfigurationError("config line " + std::to_string(line_no) + ": repeated key '" + key + "'");
  }

  ExperimentConfig config;
  RuleDefaults defaults;
  std::vector<std::string> shorthand_rules;
  bool gpd_scale_given = false;

  for (const auto& [key, value] : values) {
    if (key == "problem") {
      if (value == "diagonal") config.problem.kind = ProblemSpec::Kind::diagonal;
      else if (value == "deriv2") config.problem.kind = ProblemSpec::Kind::deriv2;
      else throw ConfigurationError("config: problem must be diagonal or deriv2");
    } else if (key == "m") config.problem.m = to_count(key, value);
    else if (key == "case") config.problem.example_case = static_cast<int>(to_count(key, value));
    else if (key == "symmetrize") config.problem.symmetrize = to_bool(key, value);
    else if (key == "q") config.problem.q = to_double(key, value);
    else if (key == "scale") config.problem.scale = to_double(key, value);
    else if (key == "source") config.problem.source = value;
    else if (key == "nu") config.problem.nu = to_double(key, value);
    else if (key == "rho") config.problem.rho = to_double(key, value);
    else if (key == "noise") {
      try {
        config.noise.kind = parse_noise_kind(value);
      } catch (const InvalidArgument& e) {
        throw ConfigurationError(std::string("config: ") + e.what());
      }
    } else if (key == "noise_p") config.noise.p = to_double(key, value);
    else if (key == "noise_c") config.noise.c = to_double(key, value);
    else if (key == "gpd_shape") config.noise.gpd_shape = to_double(key, value);
    else if (key == "gpd_scale") {
      config.noise.gpd_scale = to_double(key, value);
      gpd_scale_given = true;
    } else if (key == "n_list") {
      for (const auto& item : split_list(value)) config.n_list.push_back(to_count(key, item));
    } else if (key == "replications") config.replications = to_count(key, value);
    else if (key == "master_seed") {
      try {
        config.master_seed = std::stoull(value);
      } catch (const std::logic_error&) {
        throw ConfigurationError("config: master_seed expects an unsigned 64-bit integer");
      }
    } else if (key == "output") config.output = value;
    else if (key == "rule") shorthand_rules = split_list(value);
    else if (key == "eps1") defaults.eps1 = to_double(key, value);
    else if (key == "eps2") defaults.eps2 = to_double(key, value);
    else if (key == "tau") defaults.tau = to_double(key, value);
    else if (key == "p_known") defaults.p_known = to_double(key, value);
    else if (key == "eps_known") defaults.eps_known = to_double(key, value);
    else if (key == "apriori_nu") defaults.nu = to_double(key, value);
    else if (key == "apriori_rho") defaults.rho = to_double(key, value);
    else if (key == "apriori_q") defaults.q = to_double(key, value);
    else if (key == "apriori_p") defaults.p = to_double(key, value);
    else throw ConfigurationError("config: unknown key '" + key + "'");
  }
  if (!gpd_scale_given) config.noise.gpd_scale = gpd_unit_scale(config.noise.gpd_shape);

  // A-priori parameters fall back to what the problem and noise model imply.
  const double default_q = config.problem.kind == ProblemSpec::Kind::diagonal
                               ? config.problem.q
                               : (config.problem.symmetrize ? 8.0 : 4.0);
  const double default_p = config.noise.kind == NoiseKind::gpd_rhs ? default_q / 2.0 : config.noise.p;

  auto make_rule = [&](const std::string& label, const std::string& kind) {
    RuleSpec spec;
    spec.label = label;
    try {
      spec.rule = parse_rule(kind);
    } catch (const InvalidArgument& e) {
      throw ConfigurationError(std::string("config: ") + e.what());
    }
    spec.eps1 = defaults.eps1;
    spec.eps2 = defaults.eps2;
    spec.tau = defaults.tau;
    spec.p_known = defaults.p_known;
    spec.eps_known = defaults.eps_known;
    spec.nu = defaults.nu.value_or(config.problem.nu);
    spec.rho = defaults.rho.value_or(config.problem.rho);
    spec.q = defaults.q.value_or(default_q);
    spec.p = defaults.p.value_or(default_p);
    return spec;
  };

  for (const auto& kind : shorthand_rules) config.rules.push_back(make_rule(kind, kind));
  for (const auto& label : rule_labels) {
    const auto& params = rule_params.at(label);
    RuleSpec spec = make_rule(label, params.at("kind"));
    for (const auto& [param, value] : params) {
      const std::string key = "rule." + label + "." + param;
      if (param == "kind") continue;
      double* field = param == "eps1" ? &spec.eps1
                      : param == "eps2" ? &spec.eps2
                      : param == "tau" ? &spec.tau
                      : param == "p_known" ? &spec.p_known
                      : param == "eps_known" ? &spec.eps_known
                      : param == "nu" ? &spec.nu
                      : param == "rho" ? &spec.rho
                      : param == "q" ? &spec.q
                                     : &spec.p;
      *field = to_double(key, value);
    }
    config.rules.push_back(spec);
  }
  for (const auto& [label, params] : rule_params)
    if (!params.count("kind")) throw ConfigurationError("config: rule '" + label + "' has parameters but no kind");

  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in);
}

void ExperimentConfig::validate() const {
  if (replications < 1) throw ConfigurationError("config: replications must be at least 1");
  if (n_list.empty()) throw ConfigurationError("config: n_list must not be empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 2) throw ConfigurationError("config: every n must be at least 2");
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw ConfigurationError("config: n_list must be strictly increasing");
  }
  if (rules.empty()) throw ConfigurationError("config: no rules selected");
  if (problem.m < 1 || (problem.kind == ProblemSpec::Kind::deriv2 && problem.m < 2))
    throw ConfigurationError("config: m too small for the problem kind");
  if (noise.kind == NoiseKind::gpd_rhs && problem.kind != ProblemSpec::Kind::deriv2)
    throw ConfigurationError("config: gpd_rhs noise needs the deriv2 problem");
  try {
    noise.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigurationError(std::string("config: ") + e.what());
  }

  std::set<std::string> labels;
  for (const auto& cell : expand_cells(rules))
    if (!labels.insert(cell.label).second) throw ConfigurationError("config: duplicate rule label '" + cell.label + "'");

  for (const auto& r : rules) {
    const std::string who = "config: rule '" + r.label + "': ";
    if (!(r.tau > 0.0)) throw ConfigurationError(who + "tau must be positive");
    switch (r.rule) {
      case Rule::algorithm1:
        if (!(r.eps1 > 0.0 && r.eps1 < 1.0)) throw ConfigurationError(who + "eps1 must lie in (0, 1)");
        if (!(r.eps2 > 0.0 && r.eps2 < 1.0)) throw ConfigurationError(who + "eps2 must lie in (0, 1)");
        break;
      case Rule::known_p:
        if (!(r.eps_known > 0.0 && r.p_known > 1.0 + r.eps_known))
          throw ConfigurationError(who + "requires eps_known > 0 and p_known > 1 + eps_known");
        break;
      case Rule::a_priori:
        if (!(r.nu > 0.0 && r.rho > 0.0 && r.q > 0.0 && r.p >= 1.0))
          throw ConfigurationError(who + "a-priori choice needs nu, rho, q > 0 and p >= 1");
        break;
      case Rule::plain:
      case Rule::oracle:
        break;
    }
  }
}

// ---------------------------------------------------------------------------
// replications

std::vector<Cell> expand_cells(const std::vector<RuleSpec>& rules) {
  std::vector<Cell> cells;
  for (const auto& spec : rules) {
    if (spec.rule == Rule::oracle) {
      cells.push_back({spec.label + "_exact", CellKind::oracle_exact, spec});
      cells.push_back({spec.label + "_empirical", CellKind::oracle_empirical, spec});
    } else {
      cells.push_back({spec.label, CellKind::rule, spec});
    }
  }
  return cells;
}

std::uint64_t replication_seed(std::uint64_t master_seed, Index n, const std::string& label, Index rep) {
  std::uint64_t seed = hash_combine(master_seed, static_cast<std::uint64_t>(n));
  seed = hash_combine(seed, label_hash(label));
  return derive_stream(seed, static_cast<std::uint64_t>(rep));
}

Experiment::Experiment(ExperimentConfig config)
    : config_(std::move(config)),
      problem_(build_problem(config_.problem)),
      variances_(true_component_variances(problem_, config_.noise)),
      cells_(expand_cells(config_.rules)) {
  config_.validate();
}

ReplicationResult Experiment::run_replication(Index n, const Cell& cell, Index rep) const {
  const Index m = problem_.m();
  if (cell.kind == CellKind::oracle_exact) {
    const OracleChoice choice = oracle_k(problem_, variances_, n, m);
    return {std::sqrt(choice.risk) / problem_.xhat.norm(), choice.k};
  }

  const std::uint64_t seed = replication_seed(config_.master_seed, n, cell.label, rep);
  const BatchSummary summary = sample_summary(problem_, config_.noise, n, seed);

  Index k = 0;
  if (cell.kind == CellKind::oracle_empirical) {
    // Realised squared error for every truncation; smallest minimiser wins.
    Vector bias(m + 1);
    bias[m] = 0.0;
    for (Index j = m - 1; j >= 0; --j) bias[j] = bias[j + 1] + problem_.xhat[j] * problem_.xhat[j];
    double fitted = 0.0;
    double best = bias[0];
    for (Index j = 1; j <= m; ++j) {
      const double diff = summary.mean[j - 1] / problem_.sigma[j - 1] - problem_.xhat[j - 1];
      fitted += diff * diff;
      if (fitted + bias[j] < best) {
        best = fitted + bias[j];
        k = j;
      }
    }
  } else {
    const RuleSpec& spec = cell.spec;
    switch (spec.rule) {
      case Rule::plain:
        k = run_plain(summary, spec.tau).k;
        break;
      case Rule::known_p:
        k = run_known_p(summary, spec.p_known, spec.eps_known, spec.tau).k;
        break;
      case Rule::algorithm1:
        k = run_algorithm1(summary, problem_.sigma, spec.eps1, spec.eps2, spec.tau).k;
        break;
      case Rule::a_priori:
        k = std::min(a_priori_k(n, spec.rho, spec.nu, spec.q, spec.p), m);
        break;
      case Rule::oracle:
        throw Error("oracle rules are expanded into exact and empirical cells");
    }
  }
  return {relative_error(cutoff_estimate(summary.mean, problem_.sigma, k), problem_.xhat), k};
}

// ---------------------------------------------------------------------------
// aggregation and output

const RiskRow* RiskTable::find(const std::string& rule, Index n) const {
  for (const auto& row : rows)
    if (row.rule == rule && row.n == n) return &row;
  return nullptr;
}

double nearest_rank(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw InvalidArgument("nearest_rank: empty sample");
  const auto count = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(prob * count));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

RiskTable aggregate(std::vector<RawRow> raw, std::uint64_t seed) {
  std::sort(raw.begin(), raw.end(), [](const RawRow& a, const RawRow& b) {
    return std::tie(a.rule, a.n, a.rep) < std::tie(b.rule, b.n, b.rep);
  });
  RiskTable table;
  for (std::size_t begin = 0; begin < raw.size();) {
    std::size_t end = begin;
    while (end < raw.size() && raw[end].rule == raw[begin].rule && raw[end].n == raw[begin].n) ++end;

    std::vector<double> errors;
    double k_sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      errors.push_back(raw[i].rel_err);
      k_sum += static_cast<double>(raw[i].k);
    }
    std::sort(errors.begin(), errors.end());
    RiskRow row;
    row.rule = raw[begin].rule;
    row.n = raw[begin].n;
    row.replications = static_cast<Index>(errors.size());
    row.median_err = nearest_rank(errors, 0.5);
    row.q25 = nearest_rank(errors, 0.25);
    row.q75 = nearest_rank(errors, 0.75);
    row.min = errors.front();
    row.max = errors.back();
    row.mean_k = k_sum / static_cast<double>(errors.size());
    row.seed = seed;
    table.rows.push_back(row);
    begin = end;
  }
  table.raw = std::move(raw);
  return table;
}

std::filesystem::path raw_path_for(const std::filesystem::path& path) {
  auto raw = path;
  raw.replace_filename(path.stem().string() + "_raw" + path.extension().string());
  return raw;
}

namespace {

void write_raw(const std::vector<RawRow>& raw, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "rule,n,rep,rel_err,k\n";
  char line[256];
  for (const auto& r : raw) {
    std::snprintf(line, sizeof line, "%s,%lld,%lld,%.6g,%lld\n", r.rule.c_str(), static_cast<long long>(r.n),
                  static_cast<long long>(r.rep), r.rel_err, static_cast<long long>(r.k));
    out << line;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void emit_csv(const RiskTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "rule,n,R,median_err,q25,q75,min,max,mean_k,seed\n";
  char line[512];
  for (const auto& r : table.rows) {
    std::snprintf(line, sizeof line, "%s,%lld,%lld,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%llu\n", r.rule.c_str(),
                  static_cast<long long>(r.n), static_cast<long long>(r.replications), r.median_err, r.q25, r.q75,
                  r.min, r.max, r.mean_k, static_cast<unsigned long long>(r.seed));
    out << line;
  }
  if (!out) throw IoError("write failed: " + path.string());
  out.close();
  write_raw(table.raw, raw_path_for(path));
}

RiskTable run_experiment(const ExperimentConfig& config, unsigned threads) {
  const Experiment experiment(config);
  const auto& cells = experiment.cells();
  const auto& ns = config.n_list;
  const Index reps = config.replications;
  const std::size_t total = cells.size() * ns.size() * static_cast<std::size_t>(reps);

  std::vector<RawRow> results(total);
  std::vector<std::string> failures(total);
  std::vector<char> done(total, 0);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      if (failed.load()) return;
      const std::size_t rep = task % static_cast<std::size_t>(reps);
      const std::size_t n_index = (task / static_cast<std::size_t>(reps)) % ns.size();
      const Cell& cell = cells[task / (static_cast<std::size_t>(reps) * ns.size())];
      const Index n = ns[n_index];
      try {
        const auto r = experiment.run_replication(n, cell, static_cast<Index>(rep));
        results[task] = {cell.label, n, static_cast<Index>(rep), r.rel_err, r.k};
        done[task] = 1;
      } catch (const std::exception& e) {
        failures[task] = cell.label + " n=" + std::to_string(n) + " rep=" + std::to_string(rep) + ": " + e.what();
        failed = true;
      }
    }
  };

  const unsigned workers = std::max(1u, threads);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  }

  if (failed) {
    std::string first;
    std::vector<RawRow> partial;
    for (std::size_t i = 0; i < total; ++i) {
      if (done[i]) partial.push_back(results[i]);
      if (first.empty() && !failures[i].empty()) first = failures[i];
    }
    if (!config.output.empty()) {
      auto dump = config.output;
      dump.replace_filename(config.output.stem().string() + "_partial.csv");
      write_raw(partial, dump);
    }
    throw Error("replication failed: " + first);
  }
  return aggregate(std::move(results), config.master_seed);
}

}  // namespace specstop
