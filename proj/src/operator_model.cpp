#include "specstop/operator_model.hpp"

#include "specstop/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace specstop {

namespace {

// b^k - a^k without cancellation for nearby a, b.
double power_diff(double a, double b, int k) {
  double sum = 0.0;
  for (int i = 0; i < k; ++i) sum += std::pow(a, i) * std::pow(b, k - 1 - i);
  return (b - a) * sum;
}

// Integral over [lo, hi] of a cubic c0 + c1 s + c2 s^2 + c3 s^3.
double cubic_integral(double lo, double hi, double c0, double c1, double c2, double c3) {
  return c0 * (hi - lo) + c1 * power_diff(lo, hi, 2) / 2.0 + c2 * power_diff(lo, hi, 3) / 3.0 +
         c3 * power_diff(lo, hi, 4) / 4.0;
}

struct CellIntegrals {
  double x;
  double y;
};

CellIntegrals integrate_cell(int example_case, double lo, double hi) {
  switch (example_case) {
    case 1:
      return {cubic_integral(lo, hi, 0, 1, 0, 0), cubic_integral(lo, hi, 0, -1.0 / 6.0, 0, 1.0 / 6.0)};
    case 2: {
      const double ex = std::exp(lo) * std::expm1(hi - lo);
      return {ex, ex + cubic_integral(lo, hi, -1.0, 1.0 - std::exp(1.0), 0, 0)};
    }
    case 3: {
      auto piece = [](double a, double b, bool upper) -> CellIntegrals {
        if (!upper) return {cubic_integral(a, b, 0, 1, 0, 0), cubic_integral(a, b, 0, -3.0 / 24, 0, 4.0 / 24)};
        return {cubic_integral(a, b, 1, -1, 0, 0),
                cubic_integral(a, b, 1.0 / 24, -9.0 / 24, 12.0 / 24, -4.0 / 24)};
      };
      if (hi <= 0.5) return piece(lo, hi, false);
      if (lo >= 0.5) return piece(lo, hi, true);
      const auto left = piece(lo, 0.5, false);
      const auto right = piece(0.5, hi, true);
      return {left.x + right.x, left.y + right.y};
    }
    default:
      throw InvalidArgument("deriv2: case must be 1, 2 or 3");
  }
}

void require_finite(const Eigen::Ref<const Matrix>& a, const char* what) {
  if (!a.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite entries");
}

}  // namespace

Matrix DenseFactor::project(const Eigen::Ref<const Matrix>& z) const {
  if (z.cols() != projector.rows())
    throw InvalidArgument("project: measurement length does not match the operator");
  return z * projector;
}

Vector power_law_spectrum(Index m, double q, double scale) {
  if (m < 1) throw InvalidArgument("diagonal problem: m must be positive");
  if (!(q > 0.0)) throw InvalidArgument("diagonal problem: q must be positive");
  if (!(scale > 0.0)) throw InvalidArgument("diagonal problem: scale must be positive");
  Vector sigma(m);
  for (Index j = 0; j < m; ++j) sigma[j] = scale * std::pow(static_cast<double>(j + 1), -q / 2.0);
  return sigma;
}

SpectralProblem make_diagonal_problem(Index m, double q, double scale, const Eigen::Ref<const Vector>& xhat) {
  SpectralProblem problem;
  problem.sigma = power_law_spectrum(m, q, scale);
  if (xhat.size() != m) throw InvalidArgument("diagonal problem: xhat must have m entries");
  problem.xhat = xhat;
  problem.yhat = problem.sigma.cwiseProduct(problem.xhat);
  problem.decay_q = q;
  return problem;
}

Deriv2 make_deriv2(Index m, int example_case) {
  if (m < 2) throw InvalidArgument("deriv2: m must be at least 2");
  if (example_case < 1 || example_case > 3) throw InvalidArgument("deriv2: case must be 1, 2 or 3");

  const double h = 1.0 / static_cast<double>(m);
  const double h2 = h * h;
  Deriv2 out;
  out.a.h = h;
  out.a.entries.resize(m, m);
  for (Index r = 0; r < m; ++r) {
    const double i = static_cast<double>(r + 1);
    out.a.entries(r, r) = h2 * ((i * i - i + 0.25) * h - (i - 2.0 / 3.0));
    for (Index c = 0; c < r; ++c) {
      const double j = static_cast<double>(c + 1);
      const double value = h2 * (j - 0.5) * ((i - 0.5) * h - 1.0);
      out.a.entries(r, c) = value;
      out.a.entries(c, r) = value;
    }
  }

  const double inv_sqrt_h = 1.0 / std::sqrt(h);
  out.x_true.resize(m);
  out.b.resize(m);
  for (Index r = 0; r < m; ++r) {
    const auto cell = integrate_cell(example_case, static_cast<double>(r) * h, static_cast<double>(r + 1) * h);
    out.x_true[r] = inv_sqrt_h * cell.x;
    out.b[r] = inv_sqrt_h * cell.y;
  }
  return out;
}

SingularSystem svd(const Eigen::Ref<const Matrix>& a) {
  require_finite(a, "svd");
  if (a.rows() == 0 || a.cols() == 0) throw InvalidArgument("svd: empty matrix");

  Eigen::BDCSVD<Matrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) throw NumericalFailure("svd: decomposition did not converge", NAN);

  SingularSystem out{solver.singularValues(), solver.matrixU(), solver.matrixV()};

  for (Index j = 0; j < out.v.cols(); ++j) {
    const double scale = out.v.col(j).cwiseAbs().maxCoeff();
    for (Index i = 0; i < out.v.rows(); ++i) {
      const double entry = out.v(i, j);
      if (std::abs(entry) > 1e-12 * scale) {
        if (entry < 0.0) {
          out.v.col(j) *= -1.0;
          out.u.col(j) *= -1.0;
        }
        break;
      }
    }
  }

  const double sigma_max = out.sigma.size() > 0 ? out.sigma[0] : 0.0;
  double residual = 0.0;
  const Matrix av = a * out.v;
  for (Index j = 0; j < out.sigma.size(); ++j)
    residual = std::max(residual, (av.col(j) - out.sigma[j] * out.u.col(j)).norm());
  const Index r = out.sigma.size();
  const double gram = std::max((out.u.transpose() * out.u - Matrix::Identity(r, r)).cwiseAbs().maxCoeff(),
                               (out.v.transpose() * out.v - Matrix::Identity(r, r)).cwiseAbs().maxCoeff());
  if (residual > 1e-9 * std::max(sigma_max, 1e-300) || gram > 1e-9)
    throw NumericalFailure("svd: accuracy check failed", std::max(residual, gram));
  return out;
}

namespace {

SpectralProblem from_factor(const DenseOperator& a, const Eigen::Ref<const Vector>& x_true,
                            const Eigen::Ref<const Vector>& b, std::optional<double> decay_q, bool symmetrized) {
  const char* who = symmetrized ? "symmetrize" : "diagonalize";
  if (x_true.size() != a.cols()) throw InvalidArgument(std::string(who) + ": x_true must have one entry per column");
  if (b.size() != a.rows()) throw InvalidArgument(std::string(who) + ": b must have one entry per row");
  if (a.rows() < a.cols()) throw DegenerateOperator(std::string(who) + ": operator cannot have full column rank");

  auto factor = std::make_shared<DenseFactor>();
  factor->a = a;
  factor->x_true = x_true;
  factor->b = b;
  factor->svd = svd(a.entries);
  factor->symmetrized = symmetrized;

  const Vector& sa = factor->svd.sigma;
  if (!(sa[sa.size() - 1] >= 1e-14 * sa[0]))
    throw DegenerateOperator(std::string(who) + ": smallest singular value below 1e-14 * largest");

  SpectralProblem problem;
  if (symmetrized) {
    factor->projector = factor->svd.u * sa.asDiagonal();
    problem.sigma = sa.cwiseAbs2();
  } else {
    factor->projector = factor->svd.u;
    problem.sigma = sa;
  }
  problem.xhat = factor->svd.v.transpose() * x_true;
  problem.yhat = problem.sigma.cwiseProduct(problem.xhat);
  problem.decay_q = decay_q;
  problem.factor = std::move(factor);
  return problem;
}

}  // namespace

SpectralProblem symmetrize(const DenseOperator& a, const Eigen::Ref<const Vector>& x_true,
                           const Eigen::Ref<const Vector>& b, std::optional<double> decay_q) {
  return from_factor(a, x_true, b, decay_q, true);
}

SpectralProblem diagonalize(const DenseOperator& a, const Eigen::Ref<const Vector>& x_true,
                            const Eigen::Ref<const Vector>& b, std::optional<double> decay_q) {
  return from_factor(a, x_true, b, decay_q, false);
}

SpectralProblem make_deriv2_problem(Index m, int example_case, bool symmetrized) {
  auto d2 = make_deriv2(m, example_case);
  if (symmetrized) return symmetrize(d2.a, d2.x_true, d2.b, 8.0);
  return diagonalize(d2.a, d2.x_true, d2.b, 4.0);
}

void write_problem_csv(const SpectralProblem& problem, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "j,sigma,xhat,yhat\n";
  char line[128];
  for (Index j = 0; j < problem.m(); ++j) {
    std::snprintf(line, sizeof line, "%lld,%.17g,%.17g,%.17g\n", static_cast<long long>(j + 1), problem.sigma[j],
                  problem.xhat[j], problem.yhat[j]);
    out << line;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

SpectralProblem read_problem_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "j,sigma,xhat,yhat")
    throw IoError(path.string() + ": expected header j,sigma,xhat,yhat");

  std::vector<double> sigma, xhat, yhat;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field[4];
    for (auto& f : field)
      if (!std::getline(row, f, ',')) throw IoError(path.string() + ": short row '" + line + "'");
    if (std::stoll(field[0]) != static_cast<long long>(sigma.size() + 1))
      throw IoError(path.string() + ": rows must be numbered 1..m in order");
    sigma.push_back(std::stod(field[1]));
    xhat.push_back(std::stod(field[2]));
    yhat.push_back(std::stod(field[3]));
  }
  if (sigma.empty()) throw IoError(path.string() + ": no components");

  SpectralProblem problem;
  problem.sigma = Eigen::Map<Vector>(sigma.data(), static_cast<Index>(sigma.size()));
  problem.xhat = Eigen::Map<Vector>(xhat.data(), static_cast<Index>(xhat.size()));
  problem.yhat = Eigen::Map<Vector>(yhat.data(), static_cast<Index>(yhat.size()));
  for (Index j = 0; j < problem.m(); ++j) {
    if (!(problem.sigma[j] > 0.0) || (j > 0 && problem.sigma[j] > problem.sigma[j - 1]))
      throw InvalidArgument(path.string() + ": sigma must be positive and nonincreasing");
    const double expected = problem.sigma[j] * problem.xhat[j];
    if (std::abs(problem.yhat[j] - expected) > 1e-12 * std::max(std::abs(expected), 1e-300))
      throw InvalidArgument(path.string() + ": yhat != sigma * xhat at j = " + std::to_string(j + 1));
  }
  return problem;
}

}  // namespace specstop
