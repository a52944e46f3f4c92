#include "specstop/stopping_rules.hpp"

#include "specstop/errors.hpp"
#include "specstop/rate_theory.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace specstop {

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::plain:
      return "plain";
    case Rule::known_p:
      return "known_p";
    case Rule::algorithm1:
      return "algorithm1";
    case Rule::a_priori:
      return "a_priori";
    case Rule::oracle:
      return "oracle";
  }
  return "unknown";
}

Rule parse_rule(std::string_view name) {
  for (Rule r : {Rule::plain, Rule::known_p, Rule::algorithm1, Rule::a_priori, Rule::oracle})
    if (to_string(r) == name) return r;
  throw InvalidArgument("unknown rule '" + std::string(name) + "'");
}

namespace {

void check_m_eff(Index m_eff, Index m, const char* who) {
  if (m_eff < 0 || m_eff > m) throw InvalidArgument(std::string(who) + ": m_eff must lie in [0, m]");
}

StoppingOutcome first_crossing(Vector tails, double threshold, Rule rule, double delta, Index m_eff) {
  StoppingOutcome out;
  out.rule = rule;
  out.delta_used = delta;
  out.m_eff = m_eff;
  out.k = m_eff;
  for (Index k = 0; k <= m_eff; ++k)
    if (tails[k] <= threshold) {
      out.k = k;
      break;
    }
  out.residuals = std::move(tails);
  return out;
}

}  // namespace

StoppingOutcome plain_discrepancy(const Eigen::Ref<const Vector>& mean, double delta, Index m_eff, double tau) {
  if (!(delta >= 0.0)) throw InvalidArgument("plain_discrepancy: delta must be nonnegative");
  if (!(tau > 0.0)) throw InvalidArgument("plain_discrepancy: tau must be positive");
  check_m_eff(m_eff, mean.size(), "plain_discrepancy");
  return first_crossing(tail_norms(mean.head(m_eff)), tau * delta, Rule::plain, delta, m_eff);
}

WeightSequence known_p_weights(double p, double eps, Index m_eff) {
  if (!(eps > 0.0)) throw InvalidArgument("known_p_weights: eps must be positive");
  if (!(p > 1.0 + eps)) throw InvalidArgument("known_p_weights: requires p > 1 + eps");
  if (m_eff < 0) throw InvalidArgument("known_p_weights: m_eff must be nonnegative");
  WeightSequence w;
  w.eps2 = eps;
  w.d.resize(m_eff);
  for (Index j = 0; j < m_eff; ++j) w.d[j] = std::pow(static_cast<double>(j + 1), (p - 1.0 - eps) / 2.0);
  w.branches.assign(static_cast<std::size_t>(m_eff), WeightBranch::variance);
  return w;
}

WeightSequence algorithm1_weights(const Eigen::Ref<const Vector>& s2, const Eigen::Ref<const Vector>& sigma,
                                  double eps2, Index m_eff) {
  if (!(eps2 > 0.0 && eps2 < 1.0)) throw InvalidArgument("algorithm1_weights: eps2 must lie in (0, 1)");
  if (m_eff < 1) throw InvalidArgument("algorithm1_weights: m_eff must be at least 1");
  if (m_eff > s2.size() || m_eff > sigma.size())
    throw InvalidArgument("algorithm1_weights: m_eff exceeds the available components");

  const double total = s2.head(m_eff).sum();
  if (!(total > 0.0)) throw DegenerateNoise("algorithm1_weights: all estimated variances vanish");

  constexpr double inf = std::numeric_limits<double>::infinity();
  auto variance_branch = [&](Index j) {
    if (s2[j] <= 0.0) return inf;
    return std::pow(static_cast<double>(j + 1), -(1.0 + eps2)) * total / s2[j];
  };

  WeightSequence w;
  w.eps2 = eps2;
  w.d.resize(m_eff);
  w.branches.resize(static_cast<std::size_t>(m_eff));

  double prev_sq = 0.0;
  for (Index j = 0; j < m_eff; ++j) {
    const double first = variance_branch(j);
    const double cap = j == 0 ? 1.0 / (sigma[0] * sigma[0]) : (sigma[j - 1] * sigma[j - 1]) / (sigma[j] * sigma[j]) * prev_sq;
    const bool capped = !(first < cap);
    const double d_sq = capped ? cap : first;
    w.branches[static_cast<std::size_t>(j)] = capped ? WeightBranch::cap : WeightBranch::variance;
    w.d[j] = std::sqrt(d_sq);
    prev_sq = d_sq;
  }
  return w;
}

double modified_noise_level(const WeightSequence& weights, const Eigen::Ref<const Vector>& s2, Index n) {
  if (n < 2) throw InsufficientSamples("modified_noise_level: n must be at least 2");
  const Index m_eff = weights.d.size();
  if (s2.size() < m_eff) throw InvalidArgument("modified_noise_level: s2 shorter than the weights");
  return std::sqrt(weights.d.cwiseAbs2().dot(s2.head(m_eff)) / static_cast<double>(n));
}

StoppingOutcome algorithm1_stop(const WeightSequence& weights, const Eigen::Ref<const Vector>& mean,
                                double delta_prime, Index m_eff, double tau) {
  if (!(delta_prime >= 0.0)) throw InvalidArgument("algorithm1_stop: delta_prime must be nonnegative");
  if (!(tau > 0.0)) throw InvalidArgument("algorithm1_stop: tau must be positive");
  if (m_eff < 0 || m_eff > weights.d.size() || m_eff > mean.size())
    throw InvalidArgument("algorithm1_stop: arrays must cover m_eff components");
  const Vector rescaled = weights.d.head(m_eff).cwiseProduct(mean.head(m_eff));
  return first_crossing(tail_norms(rescaled), tau * delta_prime, Rule::algorithm1, delta_prime, m_eff);
}

Index effective_components(Index n, double eps1, Index m) {
  if (!(eps1 > 0.0 && eps1 < 1.0)) throw InvalidArgument("eps1 must lie in (0, 1)");
  if (n < 1) throw InvalidArgument("n must be at least 1");
  // Guard against pow landing just below an exact integer (e.g. 100^0.5).
  const double raw = std::pow(static_cast<double>(n), 1.0 - eps1);
  auto floored = static_cast<Index>(std::floor(raw * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())));
  return std::min(std::max<Index>(floored, 0), m);
}

StoppingOutcome run_algorithm1(const BatchSummary& summary, const Eigen::Ref<const Vector>& sigma, double eps1,
                               double eps2, double tau) {
  if (summary.n < 2) throw InsufficientSamples("run_algorithm1: n must be at least 2");
  if (sigma.size() != summary.mean.size()) throw InvalidArgument("run_algorithm1: sigma length differs from m");
  const Index m_n = effective_components(summary.n, eps1, summary.mean.size());
  if (m_n < 1) throw InvalidArgument("run_algorithm1: no components retained");

  // Zero noise and zero data: nothing to reconstruct, stop immediately.
  if (summary.s2.head(m_n).sum() == 0.0 && summary.mean.head(m_n).isZero(0.0)) {
    StoppingOutcome out;
    out.rule = Rule::algorithm1;
    out.m_eff = m_n;
    out.residuals = Vector::Zero(m_n + 1);
    return out;
  }

  const WeightSequence weights = algorithm1_weights(summary.s2, sigma, eps2, m_n);
  const double delta_prime = modified_noise_level(weights, summary.s2, summary.n);
  return algorithm1_stop(weights, summary.mean, delta_prime, m_n, tau);
}

StoppingOutcome run_algorithm1(const MeasurementBatch& batch, const Eigen::Ref<const Vector>& sigma, double eps1,
                               double eps2, double tau) {
  return run_algorithm1(summarize(batch), sigma, eps1, eps2, tau);
}

StoppingOutcome run_plain(const BatchSummary& summary, double tau) {
  return plain_discrepancy(summary.mean, noise_level_sample(summary), summary.mean.size(), tau);
}

StoppingOutcome run_known_p(const BatchSummary& summary, double p, double eps, double tau) {
  const Index m = summary.mean.size();
  const WeightSequence weights = known_p_weights(p, eps, m);
  const double delta_prime = modified_noise_level(weights, summary.s2, summary.n);
  StoppingOutcome out = algorithm1_stop(weights, summary.mean, delta_prime, m, tau);
  out.rule = Rule::known_p;
  return out;
}

Index a_priori_k(Index n, double rho, double nu, double q, double p) {
  if (n < 1) throw InvalidArgument("a_priori_k: n must be at least 1");
  if (!(rho > 0.0) || !(nu > 0.0) || !(q > 0.0) || !(p >= 1.0))
    throw InvalidArgument("a_priori_k: requires rho, nu, q > 0 and p >= 1");
  const double base = rho * static_cast<double>(n);
  const double exponent = (q - p <= -1.0) ? 1.0 / (nu * q) : 1.0 / ((1.0 + nu) * q + 1.0 - p);
  const double k = std::round(std::pow(base, exponent));
  if (!(k < static_cast<double>(std::numeric_limits<Index>::max())))
    throw InvalidArgument("a_priori_k: truncation level overflows");
  return std::max<Index>(1, static_cast<Index>(k));
}

OracleChoice oracle_k(const SpectralProblem& problem, const Eigen::Ref<const Vector>& var, Index n, Index m_eff) {
  if (n < 1) throw InvalidArgument("oracle_k: n must be at least 1");
  check_m_eff(m_eff, problem.m(), "oracle_k");
  if (var.size() != problem.m()) throw InvalidArgument("oracle_k: var must have m entries");

  const Vector risks = risk_profile(problem, var, n);
  OracleChoice best{0, risks[0]};
  for (Index k = 1; k <= m_eff; ++k)
    if (risks[k] < best.risk) best = {k, risks[k]};
  return best;
}

}  // namespace specstop
