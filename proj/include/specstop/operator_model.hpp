#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <memory>
#include <optional>

namespace specstop {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Dense discretisation of an integral operator in an orthonormal box basis.
struct DenseOperator {
  Matrix entries;
  double h = 0.0;  ///< grid width of the basis, 1/m

  Index rows() const { return entries.rows(); }
  Index cols() const { return entries.cols(); }
};

/// Singular system A v_j = sigma_j u_j, sigma nonincreasing, first nonzero
/// entry of every v_j positive.
struct SingularSystem {
  Vector sigma;
  Matrix u;
  Matrix v;
};

/// Dense factor A behind a symmetrised problem K = A^T A. Kept so raw
/// right-hand side measurements z can be mapped to (A^T z, v_j(A)).
struct DenseFactor {
  DenseOperator a;
  Vector x_true;
  Vector b;
  SingularSystem svd;
  bool symmetrized = true;
  Matrix projector;  ///< U(A) diag(sigma(A)) when symmetrised, U(A) otherwise

  /// Row-wise projection coefficients of the rows of z: sigma_j(A) (z_i, u_j(A))
  /// for the symmetrised problem, (z_i, u_j(A)) for A itself.
  Matrix project(const Eigen::Ref<const Matrix>& z) const;
};

/// Forward problem in diagonal form: coefficients of x and y in the singular
/// bases, K v_j = sigma_j u_j. Invariant: yhat = sigma .* xhat as stored.
struct SpectralProblem {
  Vector sigma;
  Vector xhat;
  Vector yhat;
  std::optional<double> decay_q;
  std::shared_ptr<const DenseFactor> factor;

  Index m() const { return sigma.size(); }
};

/// sigma_j = scale * j^(-q/2).
SpectralProblem make_diagonal_problem(Index m, double q, double scale, const Eigen::Ref<const Vector>& xhat);

/// Same spectrum with xhat left at zero; callers fill it with a source element.
Vector power_law_spectrum(Index m, double q, double scale);

struct Deriv2 {
  DenseOperator a;
  Vector x_true;
  Vector b;
};

/// Galerkin discretisation of the second-derivative Green's function kernel
///   k(s,t) = s(t-1) for s <= t,  t(s-1) for s > t
/// on [0,1] with m normalised box functions. Cases choose the exact solution:
///   1: x(t) = t,    y(s) = (s^3 - s)/6
///   2: x(t) = e^t,  y(s) = e^s + (1-e)s - 1
///   3: x(t) = t on [0,1/2), 1-t on [1/2,1]
Deriv2 make_deriv2(Index m, int example_case = 1);

/// Thin SVD of a dense matrix with the library's sign convention.
SingularSystem svd(const Eigen::Ref<const Matrix>& a);

/// K = A^T A with sigma_j(K) = sigma_j(A)^2 and xhat = V(A)^T x_true.
SpectralProblem symmetrize(const DenseOperator& a, const Eigen::Ref<const Vector>& x_true,
                           const Eigen::Ref<const Vector>& b, std::optional<double> decay_q = std::nullopt);

/// The unsymmetrised problem A x = z in its own singular bases.
SpectralProblem diagonalize(const DenseOperator& a, const Eigen::Ref<const Vector>& x_true,
                            const Eigen::Ref<const Vector>& b, std::optional<double> decay_q = std::nullopt);

/// make_deriv2 followed by symmetrize (decay_q = 8) or diagonalize (decay_q = 4).
SpectralProblem make_deriv2_problem(Index m, int example_case = 1, bool symmetrized = true);

/// CSV with header j,sigma,xhat,yhat at 17 significant digits.
void write_problem_csv(const SpectralProblem& problem, const std::filesystem::path& path);
SpectralProblem read_problem_csv(const std::filesystem::path& path);

}  // namespace specstop
