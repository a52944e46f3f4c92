#pragma once

#include "specstop/operator_model.hpp"
#include "specstop/stopping_rules.hpp"

#include <string_view>

namespace specstop {

/// Source condition x = (K^T K)^(nu/2) xi with |xi| = rho; the profile fixes
/// the direction of xi.
struct SourceSpec {
  enum class Profile { single_index, flat, geometric };

  double nu = 1.0;
  double rho = 1.0;
  Profile profile = Profile::flat;
  Index index = 1;     ///< j0 for single_index, J for flat
  double ratio = 0.5;  ///< r for geometric

  static SourceSpec single(double nu, double rho, Index j0) { return {nu, rho, Profile::single_index, j0}; }
  static SourceSpec flat(double nu, double rho, Index J) { return {nu, rho, Profile::flat, J}; }
  static SourceSpec geometric(double nu, double rho, double r) { return {nu, rho, Profile::geometric, 1, r}; }
};

/// Parses "flat:10", "single:3" or "geometric:0.5".
SourceSpec parse_source(std::string_view text, double nu, double rho);

/// xhat_j = sigma_j^nu xi_j.
Vector make_source_element(const Eigen::Ref<const Vector>& sigma, const SourceSpec& spec);

struct RateParams {
  double q = 2.0;
  double p = 2.0;
  double nu = 1.0;
  double rho = 1.0;
  double eps1 = 0.5;
  double eps2 = 0.1;
  double L = 1.0;
};

enum class RateBranch { well_posed, logarithmic, polynomial };
std::string_view to_string(RateBranch branch);

/// Branch of the minimax risk: q - p < -1, == -1 (exactly), > -1.
RateBranch minimax_branch(const RateParams& params);

/// Order of inf_k sup_x E|X_k - x|^2 (risk scale, proportionality constant 1):
///   1/n,  log(n rho)/n,  rho^((q+1-p)/((nu+1)q+1-p)) n^(-nu/(nu+1-(p-1)/q)).
double minimax_rate(double n, const RateParams& params);

/// High-probability error bound of the modified discrepancy principle on the
/// error scale: L max(approximation term, discretisation term), the latter
/// evaluated as rho (1/sqrt n)^((1-eps1) q nu).
double theorem3_bound(double n, const RateParams& params);

/// n -> infinity limit of the data-driven weights, with the estimated
/// variances replaced by the true ones and E|Y - y|^2 by sum_j var_j.
WeightSequence limit_weights(const Eigen::Ref<const Vector>& var, const Eigen::Ref<const Vector>& sigma, double eps2);

/// Risk (1/n) sum_{j<=k} var_j / sigma_j^2 + sum_{j>k} xhat_j^2 for every k = 0..m.
Vector risk_profile(const SpectralProblem& problem, const Eigen::Ref<const Vector>& var, Index n);

double exact_risk(const SpectralProblem& problem, const Eigen::Ref<const Vector>& var, Index n, Index k);

}  // namespace specstop
