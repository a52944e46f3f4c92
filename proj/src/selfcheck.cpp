#include "specstop/selfcheck.hpp"

#include "specstop/estimator.hpp"
#include "specstop/noise_lab.hpp"
#include "specstop/rate_theory.hpp"
#include "specstop/rng.hpp"
#include "specstop/stopping_rules.hpp"

#include <cmath>
#include <cstdio>

namespace specstop {

namespace {

std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

CheckResult limit_weight_properties(CounterRng& rng) {
  int worst_tuple = -1;
  double worst_excess = 0.0;
  for (int t = 0; t < 20; ++t) {
    const double p = 1.2 + 2.8 * rng.uniform_open();
    const double q = (p - 1.0) + 0.1 + 3.0 * rng.uniform_open();
    const double eps2 = (p - 1.0) * (0.05 + 0.9 * rng.uniform_open());
    const auto m = static_cast<Index>(50 + (rng() % 451));
    const Vector sigma = power_law_spectrum(m, q, 1.0);
    Vector var(m);
    for (Index j = 0; j < m; ++j) var[j] = std::pow(static_cast<double>(j + 1), -p);
    const WeightSequence w = limit_weights(var, sigma, std::min(eps2, 0.99));
    for (Index j = 0; j < m; ++j) {
      const double excess = w.d[j] * sigma[j] - 1.0;
      const double drop = j > 0 ? w.d[j] * sigma[j] - w.d[j - 1] * sigma[j - 1] : -1.0;
      const double floor_gap = w.d[0] * (1.0 - 1e-12) - w.d[j];
      const double bad = std::max({excess, drop, floor_gap});
      if (bad > 1e-12 && bad > worst_excess) {
        worst_excess = bad;
        worst_tuple = t;
      }
    }
  }
  return {"limit weights: d_j sigma_j <= 1, nonincreasing, bounded below", worst_tuple < 0,
          worst_tuple < 0 ? "20 tuples" : format("tuple %.0f violates by %.3g", worst_tuple, worst_excess)};
}

CheckResult sample_weight_monotonicity(CounterRng& rng) {
  bool ok = true;
  for (int t = 0; t < 20 && ok; ++t) {
    const Index m = 40;
    const Vector sigma = power_law_spectrum(m, 1.0 + 3.0 * rng.uniform_open(), 1.0);
    Vector s2(m);
    for (Index j = 0; j < m; ++j) s2[j] = rng.uniform_open() * std::pow(static_cast<double>(j + 1), -2.0);
    const WeightSequence w = algorithm1_weights(s2, sigma, 0.1 + 0.8 * rng.uniform_open(), m);
    for (Index j = 1; j < m; ++j)
      if (w.d[j] * sigma[j] > w.d[j - 1] * sigma[j - 1] * (1.0 + 1e-12)) ok = false;
  }
  return {"sample weights: d_j sigma_j nonincreasing", ok, "20 random variance profiles"};
}

CheckResult bias_variance_identity(std::uint64_t seed) {
  const Index m = 50;
  const Index n = 1000;
  const Index k = 5;
  const int reps = 200;
  const Vector sigma = power_law_spectrum(m, 2.0, 1.0);
  const auto problem = make_diagonal_problem(m, 2.0, 1.0, make_source_element(sigma, SourceSpec::flat(1.0, 1.0, 10)));
  const auto noise = NoiseModel::gaussian(2.0, 1.0);
  const double expected = exact_risk(problem, true_component_variances(problem, noise), n, k);

  double sum = 0.0;
  double sum_sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto summary = sample_summary(problem, noise, n, derive_stream(seed, static_cast<std::uint64_t>(r)));
    const double err = (cutoff_estimate(summary.mean, problem.sigma, k) - problem.xhat).squaredNorm();
    sum += err;
    sum_sq += err * err;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum_sq / reps - mean * mean) / (reps - 1));
  const bool ok = std::abs(mean - expected) <= 3.0 * se;
  return {"bias-variance identity at n = 1000, k = 5", ok,
          format("MC %.6g vs exact %.6g (se %.3g)", mean, expected, se)};
}

}  // namespace

std::vector<CheckResult> run_selfcheck(unsigned long long seed) {
  CounterRng rng(seed);
  std::vector<CheckResult> results;
  results.push_back(limit_weight_properties(rng));
  results.push_back(sample_weight_monotonicity(rng));
  results.push_back(bias_variance_identity(rng()));
  return results;
}

}  // namespace specstop
