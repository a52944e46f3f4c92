#include "specstop/rate_theory.hpp"

#include "specstop/errors.hpp"

#include <charconv>
#include <cmath>
#include <string>

namespace specstop {

SourceSpec parse_source(std::string_view text, double nu, double rho) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw InvalidArgument("source must look like kind:value, got '" + std::string(text) + "'");
  const auto kind = text.substr(0, colon);
  const std::string value(text.substr(colon + 1));
  try {
    if (kind == "flat") return SourceSpec::flat(nu, rho, std::stoll(value));
    if (kind == "single") return SourceSpec::single(nu, rho, std::stoll(value));
    if (kind == "geometric") return SourceSpec::geometric(nu, rho, std::stod(value));
  } catch (const std::logic_error&) {
    throw InvalidArgument("bad source parameter '" + value + "'");
  }
  throw InvalidArgument("unknown source profile '" + std::string(kind) + "'");
}

Vector make_source_element(const Eigen::Ref<const Vector>& sigma, const SourceSpec& spec) {
  const Index m = sigma.size();
  if (!(spec.nu > 0.0)) throw InvalidArgument("source element: nu must be positive");
  if (!(spec.rho >= 0.0)) throw InvalidArgument("source element: rho must be nonnegative");

  Vector xi = Vector::Zero(m);
  switch (spec.profile) {
    case SourceSpec::Profile::single_index:
      if (spec.index < 1 || spec.index > m) throw InvalidArgument("source element: j0 out of range");
      xi[spec.index - 1] = spec.rho;
      break;
    case SourceSpec::Profile::flat:
      if (spec.index < 1 || spec.index > m) throw InvalidArgument("source element: J out of range");
      xi.head(spec.index).setConstant(spec.rho / std::sqrt(static_cast<double>(spec.index)));
      break;
    case SourceSpec::Profile::geometric: {
      if (!(spec.ratio > 0.0 && spec.ratio <= 1.0)) throw InvalidArgument("source element: ratio must lie in (0, 1]");
      double power = 1.0;
      for (Index j = 0; j < m; ++j) {
        power *= spec.ratio;
        xi[j] = power;
      }
      const double norm = xi.norm();
      if (!(norm > 0.0)) throw InvalidArgument("source element: geometric profile underflows");
      xi *= spec.rho / norm;
      break;
    }
  }
  return sigma.array().pow(spec.nu).matrix().cwiseProduct(xi);
}

std::string_view to_string(RateBranch branch) {
  switch (branch) {
    case RateBranch::well_posed:
      return "well_posed";
    case RateBranch::logarithmic:
      return "logarithmic";
    case RateBranch::polynomial:
      return "polynomial";
  }
  return "unknown";
}

namespace {

void check_rate_params(const RateParams& params) {
  if (!(params.q > 0.0)) throw InvalidArgument("rate: q must be positive");
  if (!(params.p > 1.0)) throw InvalidArgument("rate: p must exceed 1");
  if (!(params.nu > 0.0)) throw InvalidArgument("rate: nu must be positive");
}

}  // namespace

RateBranch minimax_branch(const RateParams& params) {
  check_rate_params(params);
  const double gap = params.q - params.p;
  if (gap < -1.0) return RateBranch::well_posed;
  if (gap == -1.0) return RateBranch::logarithmic;
  return RateBranch::polynomial;
}

double minimax_rate(double n, const RateParams& params) {
  if (!(n >= 2.0)) throw InvalidArgument("minimax_rate: n must be at least 2");
  if (!(params.rho > 0.0)) throw InvalidArgument("minimax_rate: rho must be positive");
  const double nn = n;
  const auto& [q, p, nu, rho, eps1, eps2, L] = params;
  switch (minimax_branch(params)) {
    case RateBranch::well_posed:
      return 1.0 / nn;
    case RateBranch::logarithmic:
      return std::log(nn * rho) / nn;
    case RateBranch::polynomial:
      return std::pow(rho, (q + 1.0 - p) / ((nu + 1.0) * q + 1.0 - p)) * std::pow(1.0 / nn, nu / (nu + 1.0 - (p - 1.0) / q));
  }
  return NAN;
}

double theorem3_bound(double n, const RateParams& params) {
  check_rate_params(params);
  const auto& [q, p, nu, rho, eps1, eps2, L] = params;
  if (!(n >= 1.0)) throw InvalidArgument("theorem3_bound: n must be at least 1");
  if (!(q > p - 1.0 && p - 1.0 > eps2 && eps2 > 0.0))
    throw InvalidArgument("theorem3_bound: requires q > p - 1 > eps2 > 0");
  if (!(eps1 > 0.0 && eps1 < 1.0)) throw InvalidArgument("theorem3_bound: eps1 must lie in (0, 1)");
  if (!(rho >= 0.0)) throw InvalidArgument("theorem3_bound: rho must be nonnegative");
  if (!(L > 0.0)) throw InvalidArgument("theorem3_bound: L must be positive");

  const double level = 1.0 / std::sqrt(n);
  const double approximation = std::pow(rho, (q + 1.0 + eps2 - p) / ((nu + 1.0) * q + 1.0 + eps2 - p)) *
                               std::pow(level, nu / (nu + 1.0 - (p - 1.0 - eps2) / q));
  const double discretisation = rho * std::pow(level, (1.0 - eps1) * q * nu);
  return L * std::max(approximation, discretisation);
}

WeightSequence limit_weights(const Eigen::Ref<const Vector>& var, const Eigen::Ref<const Vector>& sigma, double eps2) {
  if (var.size() != sigma.size()) throw InvalidArgument("limit_weights: var and sigma lengths differ");
  if ((var.array() < 0.0).any()) throw InvalidArgument("limit_weights: variances must be nonnegative");
  return algorithm1_weights(var, sigma, eps2, var.size());
}

Vector risk_profile(const SpectralProblem& problem, const Eigen::Ref<const Vector>& var, Index n) {
  if (n < 1) throw InvalidArgument("risk: n must be at least 1");
  const Index m = problem.m();
  if (var.size() != m) throw InvalidArgument("risk: var must have m entries");

  Vector bias(m + 1);
  bias[m] = 0.0;
  for (Index k = m - 1; k >= 0; --k) bias[k] = bias[k + 1] + problem.xhat[k] * problem.xhat[k];

  Vector risk(m + 1);
  double variance = 0.0;
  risk[0] = bias[0];
  for (Index k = 1; k <= m; ++k) {
    variance += var[k - 1] / (problem.sigma[k - 1] * problem.sigma[k - 1]);
    risk[k] = variance / static_cast<double>(n) + bias[k];
  }
  return risk;
}

double exact_risk(const SpectralProblem& problem, const Eigen::Ref<const Vector>& var, Index n, Index k) {
  if (k < 0 || k > problem.m()) throw InvalidArgument("exact_risk: k must lie in [0, m]");
  return risk_profile(problem, var, n)[k];
}

}  // namespace specstop
