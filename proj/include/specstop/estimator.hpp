#pragma once

#include "specstop/noise_lab.hpp"
#include "specstop/operator_model.hpp"

namespace specstop {

/// Component-wise sample mean (Ybar_n, u_j) and unbiased sample variance s2_{j,n}.
struct BatchSummary {
  Vector mean;
  Vector s2;
  Index n = 0;
};

/// Streaming summary over row blocks. Within a block the mean and the squared
/// deviations use compensated sums; blocks are merged with the pairwise
/// update of Chan, Golub and LeVeque. A single block reproduces the textbook
/// two-pass formulas.
class SummaryAccumulator {
 public:
  explicit SummaryAccumulator(Index m) : mean_(Vector::Zero(m)), m2_(Vector::Zero(m)) {}

  void add_block(const Eigen::Ref<const Matrix>& block);

  Index count() const { return count_; }
  const Vector& mean() const { return mean_; }

  /// Throws InsufficientSamples for fewer than two rows.
  BatchSummary finish() const;

 private:
  Vector mean_;
  Vector m2_;
  Index count_ = 0;
};

BatchSummary summarize(const MeasurementBatch& batch);

/// Streams n fresh rows from the noise model straight into a summary
/// without materialising the batch.
BatchSummary sample_summary(const SpectralProblem& problem, const NoiseModel& model, Index n, std::uint64_t seed);

/// Spectral cut-off coefficients in the v-basis: mean_j / sigma_j for j <= k, zero beyond.
Vector cutoff_estimate(const Eigen::Ref<const Vector>& mean, const Eigen::Ref<const Vector>& sigma, Index k);

double relative_error(const Eigen::Ref<const Vector>& x_est, const Eigen::Ref<const Vector>& xhat);

/// 1/sqrt(n).
double noise_level_simple(Index n);

/// sqrt(sum_j s2_j / n), the sample estimate of |Ybar_n - yhat|.
double noise_level_sample(const BatchSummary& summary);
double noise_level_sample(const MeasurementBatch& batch);

/// sqrt(sum_{j>k} mean_j^2) for k = 0..m; entry k is the residual after truncating at k.
Vector tail_norms(const Eigen::Ref<const Vector>& mean);

}  // namespace specstop
