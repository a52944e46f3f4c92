#include "specstop/noise_lab.hpp"

#include "specstop/errors.hpp"

#include <cmath>
#include <fstream>

namespace specstop {

double CounterRng::standard_normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::gaussian_profile:
      return "gaussian_profile";
    case NoiseKind::rademacher_profile:
      return "rademacher_profile";
    case NoiseKind::gpd_rhs:
      return "gpd_rhs";
  }
  return "unknown";
}

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "gaussian_profile") return NoiseKind::gaussian_profile;
  if (name == "rademacher_profile") return NoiseKind::rademacher_profile;
  if (name == "gpd_rhs") return NoiseKind::gpd_rhs;
  throw InvalidArgument("unknown noise kind '" + std::string(name) + "'");
}

double gpd_unit_scale(double shape) { return std::sqrt((1.0 - shape) * (1.0 - shape) * (1.0 - 2.0 * shape)); }

namespace {

void check_gpd_shape(double shape) {
  if (!(shape > 0.0 && shape < 0.25))
    throw InvalidArgument("gpd shape must lie in (0, 0.25) for a finite fourth moment");
}

double gpd_centred_variance(double shape, double scale) {
  return scale * scale / ((1.0 - shape) * (1.0 - shape) * (1.0 - 2.0 * shape));
}

}  // namespace

void NoiseModel::validate() const {
  switch (kind) {
    case NoiseKind::gaussian_profile:
    case NoiseKind::rademacher_profile:
      if (!(p > 1.0) || !std::isfinite(p)) throw InvalidArgument("noise profile exponent p must exceed 1");
      if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidArgument("noise profile scale c must be nonnegative");
      break;
    case NoiseKind::gpd_rhs:
      check_gpd_shape(gpd_shape);
      if (!(gpd_scale > 0.0) || !std::isfinite(gpd_scale)) throw InvalidArgument("gpd scale must be positive");
      break;
  }
}

double gpd_inverse_cdf(double u, double shape, double scale) {
  return scale * (std::pow(u, -shape) - 1.0) / shape;
}

Vector sample_gpd(double shape, double scale, Index count, CounterRng& rng) {
  check_gpd_shape(shape);
  if (!(scale > 0.0)) throw InvalidArgument("gpd scale must be positive");
  if (count < 1) throw InvalidArgument("sample_gpd: count must be at least 1");
  const double mean = scale / (1.0 - shape);
  Vector out(count);
  for (Index i = 0; i < count; ++i) out[i] = gpd_inverse_cdf(rng.uniform_open(), shape, scale) - mean;
  return out;
}

BatchStream::BatchStream(const SpectralProblem& problem, const NoiseModel& model, Index n, std::uint64_t seed)
    : problem_(problem), model_(model), n_(n), rng_(seed) {
  if (n < 1) throw InvalidArgument("sample_batch: n must be at least 1");
  model.validate();
  if (model.kind == NoiseKind::gpd_rhs) {
    if (!problem.factor) throw ConfigurationError("gpd_rhs noise needs a problem built from a dense factor");
    const auto& b = problem.factor->b;
    rhs_scale_ = b.norm() / std::sqrt(static_cast<double>(b.size()));
  } else {
    profile_sd_.resize(problem.m());
    for (Index j = 0; j < problem.m(); ++j)
      profile_sd_[j] = model.c * std::pow(static_cast<double>(j + 1), -model.p / 2.0);
  }
}

Matrix BatchStream::next_block() {
  const Index rows = std::min(kBlockRows, remaining());
  const Index m = problem_.m();
  if (rows == 0) return Matrix(0, m);

  Matrix block(rows, m);
  switch (model_.kind) {
    case NoiseKind::gaussian_profile:
      for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < m; ++j) block(i, j) = problem_.yhat[j] + profile_sd_[j] * rng_.standard_normal();
      break;
    case NoiseKind::rademacher_profile:
      for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < m; ++j) block(i, j) = problem_.yhat[j] + profile_sd_[j] * rng_.rademacher();
      break;
    case NoiseKind::gpd_rhs: {
      const auto& factor = *problem_.factor;
      const Index len = factor.b.size();
      const double mean = model_.gpd_scale / (1.0 - model_.gpd_shape);
      Matrix z(rows, len);
      for (Index i = 0; i < rows; ++i)
        for (Index l = 0; l < len; ++l)
          z(i, l) = factor.b[l] +
                    rhs_scale_ * (gpd_inverse_cdf(rng_.uniform_open(), model_.gpd_shape, model_.gpd_scale) - mean);
      block.noalias() = z * factor.projector;
      break;
    }
  }
  produced_ += rows;
  return block;
}

MeasurementBatch sample_batch(const SpectralProblem& problem, const NoiseModel& model, Index n, std::uint64_t seed) {
  BatchStream stream(problem, model, n, seed);
  MeasurementBatch batch{Matrix(n, problem.m()), seed, model};
  Index row = 0;
  while (stream.remaining() > 0) {
    Matrix block = stream.next_block();
    batch.coeffs.middleRows(row, block.rows()) = block;
    row += block.rows();
  }
  return batch;
}

Vector true_component_variances(const SpectralProblem& problem, const NoiseModel& model) {
  model.validate();
  const Index m = problem.m();
  Vector var(m);
  if (model.kind == NoiseKind::gpd_rhs) {
    if (!problem.factor) throw ConfigurationError("gpd_rhs noise needs a problem built from a dense factor");
    const auto& b = problem.factor->b;
    const double level = b.squaredNorm() / static_cast<double>(b.size()) *
                         gpd_centred_variance(model.gpd_shape, model.gpd_scale);
    if (problem.factor->symmetrized)
      var = problem.factor->svd.sigma.cwiseAbs2() * level;
    else
      var.setConstant(level);
  } else {
    for (Index j = 0; j < m; ++j) var[j] = model.c * model.c * std::pow(static_cast<double>(j + 1), -model.p);
  }
  return var;
}

void write_batch_csv(const MeasurementBatch& batch, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "i,j,coeff\n";
  char line[96];
  for (Index i = 0; i < batch.n(); ++i)
    for (Index j = 0; j < batch.m(); ++j) {
      std::snprintf(line, sizeof line, "%lld,%lld,%.17g\n", static_cast<long long>(i + 1),
                    static_cast<long long>(j + 1), batch.coeffs(i, j));
      out << line;
    }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace specstop
