#pragma once

#include "specstop/operator_model.hpp"
#include "specstop/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace specstop {

enum class NoiseKind { gaussian_profile, rademacher_profile, gpd_rhs };

std::string_view to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view name);

/// Centred generalized-Pareto scale giving unit variance for the given shape.
double gpd_unit_scale(double shape);

struct NoiseModel {
  NoiseKind kind = NoiseKind::gaussian_profile;
  double p = 2.0;  ///< profile exponent, Var_j = c^2 j^-p
  double c = 1.0;  ///< profile scale
  double gpd_shape = 0.2;
  double gpd_scale = gpd_unit_scale(0.2);

  static NoiseModel gaussian(double p, double c) { return {NoiseKind::gaussian_profile, p, c}; }
  static NoiseModel rademacher(double p, double c) { return {NoiseKind::rademacher_profile, p, c}; }
  static NoiseModel gpd(double shape = 0.2) {
    NoiseModel model;
    model.kind = NoiseKind::gpd_rhs;
    model.gpd_shape = shape;
    model.gpd_scale = gpd_unit_scale(shape);
    return model;
  }

  /// Throws InvalidArgument when the parameters leave the admissible domain.
  void validate() const;
};

/// n x m projection coefficients (Y_i, u_j).
struct MeasurementBatch {
  Matrix coeffs;
  std::uint64_t seed = 0;
  NoiseModel model;

  Index n() const { return coeffs.rows(); }
  Index m() const { return coeffs.cols(); }
};

/// Quantile of the generalized Pareto law with location 0:
/// scale (u^-shape - 1) / shape, the inverse CDF evaluated at 1 - u.
double gpd_inverse_cdf(double u, double shape, double scale);

/// Centred GPD draws (analytic mean scale/(1-shape) removed).
/// Requires shape in (0, 0.25) so the fourth moment is finite.
Vector sample_gpd(double shape, double scale, Index count, CounterRng& rng);

/// Produces measurement rows block by block. Rows are identical no matter how
/// the consumer slices the stream, so a summary built from streamed blocks
/// equals one built from the materialised batch.
class BatchStream {
 public:
  static constexpr Index kBlockRows = 4096;

  BatchStream(const SpectralProblem& problem, const NoiseModel& model, Index n, std::uint64_t seed);

  /// Next block of at most kBlockRows rows; empty once n rows were produced.
  Matrix next_block();
  Index remaining() const { return n_ - produced_; }

 private:
  const SpectralProblem& problem_;
  NoiseModel model_;
  Index n_;
  Index produced_ = 0;
  CounterRng rng_;
  Vector profile_sd_;
  double rhs_scale_ = 0.0;
};

/// coeffs[i][j] = yhat[j] + c j^(-p/2) xi_ij for profile kinds; for gpd_rhs,
/// z_i = b + (|b|/sqrt(m)) delta_i mapped through the dense factor.
MeasurementBatch sample_batch(const SpectralProblem& problem, const NoiseModel& model, Index n, std::uint64_t seed);

/// Var (Y_1 - yhat, u_j) for each component.
Vector true_component_variances(const SpectralProblem& problem, const NoiseModel& model);

/// Debug dump with header i,j,coeff (1-based indices).
void write_batch_csv(const MeasurementBatch& batch, const std::filesystem::path& path);

}  // namespace specstop
