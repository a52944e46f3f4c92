#include "specstop/estimator.hpp"

#include "specstop/errors.hpp"

#include <cmath>

namespace specstop {

namespace {

struct Kahan {
  double sum = 0.0;
  double carry = 0.0;

  void add(double value) {
    const double y = value - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

void SummaryAccumulator::add_block(const Eigen::Ref<const Matrix>& block) {
  if (block.cols() != mean_.size()) throw InvalidArgument("summary: block width does not match m");
  const Index rows = block.rows();
  if (rows == 0) return;
  if (!block.allFinite()) throw InvalidArgument("summary: non-finite measurement");

  const double nb = static_cast<double>(rows);
  const double na = static_cast<double>(count_);
  const double total = na + nb;
  for (Index j = 0; j < mean_.size(); ++j) {
    Kahan s;
    for (Index i = 0; i < rows; ++i) s.add(block(i, j));
    const double block_mean = s.sum / nb;
    Kahan dev;
    for (Index i = 0; i < rows; ++i) {
      const double d = block(i, j) - block_mean;
      dev.add(d * d);
    }
    if (count_ == 0) {
      mean_[j] = block_mean;
      m2_[j] = dev.sum;
    } else {
      const double delta = block_mean - mean_[j];
      mean_[j] += delta * (nb / total);
      m2_[j] += dev.sum + delta * delta * (na * nb / total);
    }
  }
  count_ += rows;
}

BatchSummary SummaryAccumulator::finish() const {
  if (count_ < 2) throw InsufficientSamples("sample variances need at least two measurements");
  return {mean_, m2_ / static_cast<double>(count_ - 1), count_};
}

BatchSummary summarize(const MeasurementBatch& batch) {
  SummaryAccumulator acc(batch.m());
  for (Index row = 0; row < batch.n(); row += BatchStream::kBlockRows) {
    const Index rows = std::min(BatchStream::kBlockRows, batch.n() - row);
    acc.add_block(batch.coeffs.middleRows(row, rows));
  }
  return acc.finish();
}

BatchSummary sample_summary(const SpectralProblem& problem, const NoiseModel& model, Index n, std::uint64_t seed) {
  BatchStream stream(problem, model, n, seed);
  SummaryAccumulator acc(problem.m());
  while (stream.remaining() > 0) acc.add_block(stream.next_block());
  return acc.finish();
}

Vector cutoff_estimate(const Eigen::Ref<const Vector>& mean, const Eigen::Ref<const Vector>& sigma, Index k) {
  if (mean.size() != sigma.size()) throw InvalidArgument("cutoff_estimate: mean and sigma lengths differ");
  if (k < 0 || k > mean.size()) throw InvalidArgument("cutoff_estimate: k must lie in [0, m]");
  Vector x = Vector::Zero(mean.size());
  x.head(k) = mean.head(k).cwiseQuotient(sigma.head(k));
  return x;
}

double relative_error(const Eigen::Ref<const Vector>& x_est, const Eigen::Ref<const Vector>& xhat) {
  if (x_est.size() != xhat.size()) throw InvalidArgument("relative_error: length mismatch");
  const double reference = xhat.norm();
  if (!(reference > 0.0)) throw UndefinedRelativeError("relative error against a zero ground truth");
  return (x_est - xhat).norm() / reference;
}

double noise_level_simple(Index n) {
  if (n < 1) throw InvalidArgument("noise level: n must be at least 1");
  return 1.0 / std::sqrt(static_cast<double>(n));
}

double noise_level_sample(const BatchSummary& summary) {
  if (summary.n < 2) throw InsufficientSamples("sample noise level needs at least two measurements");
  return std::sqrt(summary.s2.sum() / static_cast<double>(summary.n));
}

double noise_level_sample(const MeasurementBatch& batch) { return noise_level_sample(summarize(batch)); }

Vector tail_norms(const Eigen::Ref<const Vector>& mean) {
  const Index m = mean.size();
  Vector tails(m + 1);
  double acc = 0.0;
  tails[m] = 0.0;
  for (Index k = m - 1; k >= 0; --k) {
    acc += mean[k] * mean[k];
    tails[k] = std::sqrt(acc);
  }
  return tails;
}

}  // namespace specstop
