#pragma once

#include "specstop/estimator.hpp"
#include "specstop/operator_model.hpp"

#include <string_view>
#include <vector>

namespace specstop {

enum class Rule { plain, known_p, algorithm1, a_priori, oracle };

std::string_view to_string(Rule rule);
Rule parse_rule(std::string_view name);

/// Which argument of the min() produced d_j.
enum class WeightBranch { variance, cap };

struct WeightSequence {
  Vector d;
  double eps2 = 0.0;
  std::vector<WeightBranch> branches;
};

struct StoppingOutcome {
  Index k = 0;
  Rule rule = Rule::plain;
  double delta_used = 0.0;
  Index m_eff = 0;
  Vector residuals;  ///< (weighted) tail norm for every truncation 0..m_eff
};

/// Smallest k in [0, m_eff] with sqrt(sum_{j=k+1}^{m_eff} mean_j^2) <= tau * delta.
StoppingOutcome plain_discrepancy(const Eigen::Ref<const Vector>& mean, double delta, Index m_eff, double tau = 1.0);

/// d_j = j^((p-1-eps)/2); requires p > 1 + eps, eps > 0.
WeightSequence known_p_weights(double p, double eps, Index m_eff);

/// Weights of the modified discrepancy principle from estimated variances:
///   d_1^2 = min(T / s2_1, 1 / sigma_1^2)
///   d_j^2 = min(j^-(1+eps2) T / s2_j, (sigma_{j-1} / sigma_j)^2 d_{j-1}^2)
/// with T = sum_{j <= m_eff} s2_j. A zero s2_j forces the cap branch.
WeightSequence algorithm1_weights(const Eigen::Ref<const Vector>& s2, const Eigen::Ref<const Vector>& sigma,
                                  double eps2, Index m_eff);

/// sqrt(sum_{j <= m_eff} d_j^2 s2_j / n), m_eff = weights.d.size().
double modified_noise_level(const WeightSequence& weights, const Eigen::Ref<const Vector>& s2, Index n);

/// Discrepancy principle on rescaled data: smallest k with
/// sqrt(sum_{j=k+1}^{m_eff} d_j^2 mean_j^2) <= tau * delta_prime.
StoppingOutcome algorithm1_stop(const WeightSequence& weights, const Eigen::Ref<const Vector>& mean,
                                double delta_prime, Index m_eff, double tau = 1.0);

/// m_n = min(floor(n^(1-eps1)), m).
Index effective_components(Index n, double eps1, Index m);

StoppingOutcome run_algorithm1(const BatchSummary& summary, const Eigen::Ref<const Vector>& sigma, double eps1,
                               double eps2, double tau = 1.0);
StoppingOutcome run_algorithm1(const MeasurementBatch& batch, const Eigen::Ref<const Vector>& sigma, double eps1,
                               double eps2, double tau = 1.0);

/// Plain discrepancy over all m components with the sample noise level.
StoppingOutcome run_plain(const BatchSummary& summary, double tau = 1.0);

/// Weighted discrepancy with d_j = j^((p-1-eps)/2) over all m components and
/// the sample-based rescaled noise level.
StoppingOutcome run_known_p(const BatchSummary& summary, double p, double eps, double tau = 1.0);

/// k = max(1, round((rho n)^(1/(nu q)))) if q - p <= -1,
///     max(1, round((rho n)^(1/((1+nu) q + 1 - p)))) otherwise.
Index a_priori_k(Index n, double rho, double nu, double q, double p);

struct OracleChoice {
  Index k = 0;
  double risk = 0.0;
};

/// argmin over k in [0, m_eff] of (1/n) sum_{j<=k} var_j / sigma_j^2 + sum_{j>k} xhat_j^2.
OracleChoice oracle_k(const SpectralProblem& problem, const Eigen::Ref<const Vector>& var, Index n, Index m_eff);

}  // namespace specstop
