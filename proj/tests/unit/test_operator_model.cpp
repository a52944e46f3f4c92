#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "specstop/errors.hpp"
#include "specstop/operator_model.hpp"

#include <filesystem>
#include <fstream>

using namespace specstop;

namespace {

DenseOperator dense(const Matrix& entries) { return {entries, 1.0 / static_cast<double>(entries.cols())}; }

double kernel(double s, double t) { return s <= t ? s * (t - 1.0) : t * (s - 1.0); }

// Galerkin entry by quadrature, splitting the diagonal cell along s = t so
// each piece is a polynomial integrated exactly.
double entry_by_quadrature(Index i, Index j, double h) {
  const double a = static_cast<double>(i) * h, b = a + h;
  const double c = static_cast<double>(j) * h, d = c + h;
  double value = 0.0;
  if (i != j) {
    value = oracle::gauss_legendre([&](double s) { return oracle::gauss_legendre([&](double t) { return kernel(s, t); }, c, d); }, a, b);
  } else {
    value = oracle::gauss_legendre(
        [&](double s) {
          return oracle::gauss_legendre([&](double t) { return kernel(s, t); }, a, s) +
                 oracle::gauss_legendre([&](double t) { return kernel(s, t); }, s, b);
        },
        a, b);
  }
  return value / h;
}

}  // namespace

TEST_CASE("diagonal problem: power-law spectrum and consistent data") {
  SUBCASE("m=3, q=2") {
    const auto p = make_diagonal_problem(3, 2.0, 1.0, Vector::Ones(3));
    CHECK(p.sigma[0] == doctest::Approx(1.0));
    CHECK(p.sigma[1] == doctest::Approx(0.5));
    CHECK(p.sigma[2] == doctest::Approx(1.0 / 3.0));
    CHECK(p.yhat[2] == doctest::Approx(1.0 / 3.0));
    REQUIRE(p.decay_q.has_value());
    CHECK(*p.decay_q == 2.0);
  }
  SUBCASE("m=1, q=7") {
    Vector x(1);
    x << 2.0;
    const auto p = make_diagonal_problem(1, 7.0, 1.0, x);
    CHECK(p.sigma[0] == 1.0);
    CHECK(p.yhat[0] == 2.0);
  }
  SUBCASE("m=2, q=4, scale=2") {
    Vector x(2);
    x << 0.0, 1.0;
    const auto p = make_diagonal_problem(2, 4.0, 2.0, x);
    CHECK(p.sigma[0] == doctest::Approx(2.0));
    CHECK(p.sigma[1] == doctest::Approx(0.5));
    CHECK(p.yhat[0] == 0.0);
    CHECK(p.yhat[1] == doctest::Approx(0.5));
  }
  SUBCASE("normalised spectrum is one and yhat is exact") {
    const Index m = 500;
    const auto p = make_diagonal_problem(m, 2.7, 3.0, Vector::LinSpaced(m, 1.0, -1.0));
    for (Index j = 0; j < m; ++j) {
      CHECK(p.sigma[j] * std::pow(static_cast<double>(j + 1), 1.35) / 3.0 == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(p.yhat[j] == p.sigma[j] * p.xhat[j]);
    }
  }
  SUBCASE("invalid arguments") {
    CHECK_THROWS_AS(make_diagonal_problem(0, 2.0, 1.0, Vector()), InvalidArgument);
    CHECK_THROWS_AS(make_diagonal_problem(2, 0.0, 1.0, Vector::Ones(2)), InvalidArgument);
    CHECK_THROWS_AS(make_diagonal_problem(2, 2.0, -1.0, Vector::Ones(2)), InvalidArgument);
  }
}

TEST_CASE("deriv2: symmetric Galerkin matrix matching quadrature") {
  const Index m = 12;
  const auto d2 = make_deriv2(m, 1);
  const double h = 1.0 / static_cast<double>(m);
  CHECK(d2.a.h == doctest::Approx(h));
  CHECK((d2.a.entries - d2.a.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) CHECK(d2.a.entries(i, j) == doctest::Approx(entry_by_quadrature(i, j, h)).epsilon(1e-11));
  CHECK_THROWS_AS(make_deriv2(1, 1), InvalidArgument);
  CHECK_THROWS_AS(make_deriv2(10, 4), InvalidArgument);
}

TEST_CASE("deriv2: right-hand sides agree with quadrature projections") {
  const Index m = 8;
  const double h = 1.0 / static_cast<double>(m);
  const double e = std::exp(1.0);
  auto y1 = [](double s) { return (s * s * s - s) / 6.0; };
  auto y2 = [e](double s) { return std::exp(s) + (1.0 - e) * s - 1.0; };
  auto y3 = [](double s) {
    return s < 0.5 ? (4.0 * s * s * s - 3.0 * s) / 24.0 : (-4.0 * s * s * s + 12.0 * s * s - 9.0 * s + 1.0) / 24.0;
  };
  for (int example = 1; example <= 3; ++example) {
    const auto d2 = make_deriv2(m, example);
    for (Index i = 0; i < m; ++i) {
      const double a = static_cast<double>(i) * h, b = a + h;
      double expected = 0.0;
      if (example == 1) expected = oracle::gauss_legendre(y1, a, b);
      if (example == 2) expected = oracle::gauss_legendre(y2, a, b);
      if (example == 3) expected = oracle::gauss_legendre(y3, a, b);
      CHECK(d2.b[i] == doctest::Approx(expected / std::sqrt(h)).epsilon(1e-8));
    }
  }
}

TEST_CASE("deriv2: discrete system reproduces the exact right-hand side") {
  // Only case 1 is exactly consistent: x(t) = t lies in the Galerkin space's
  // span up to projection, and A applied to its projection gives b.
  const auto d2 = make_deriv2(40, 1);
  CHECK((d2.a.entries * d2.x_true - d2.b).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("deriv2: spectrum") {
  const auto d2 = make_deriv2(100, 1);
  const auto s = svd(d2.a.entries);
  const double pi2 = 1.0 / (M_PI * M_PI);
  CHECK(std::abs(s.sigma[0] - pi2) <= 0.01 * pi2);
  std::vector<double> js, sig;
  for (Index j = 5; j <= 50; ++j) {
    js.push_back(static_cast<double>(j));
    sig.push_back(s.sigma[j - 1]);
  }
  const double slope = oracle::loglog_slope(js, sig);
  CHECK(slope >= -2.2);
  CHECK(slope <= -1.8);
}

TEST_CASE("svd: examples and accuracy") {
  SUBCASE("diag(3, 1)") {
    Matrix a(2, 2);
    a << 3.0, 0.0, 0.0, 1.0;
    const auto s = svd(a);
    CHECK(s.sigma[0] == doctest::Approx(3.0));
    CHECK(s.sigma[1] == doctest::Approx(1.0));
    CHECK((s.v.cwiseAbs() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((s.u.cwiseAbs() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("permuted diag(1, 2)") {
    Matrix a(2, 2);
    a << 0.0, 2.0, 1.0, 0.0;
    const auto s = svd(a);
    CHECK(s.sigma[0] == doctest::Approx(2.0));
    CHECK(s.sigma[1] == doctest::Approx(1.0));
  }
  SUBCASE("deriv2 m=50 reconstruction, orthonormality and sign convention") {
    const auto d2 = make_deriv2(50, 1);
    const auto s = svd(d2.a.entries);
    const Matrix rebuilt = s.u * s.sigma.asDiagonal() * s.v.transpose();
    CHECK((rebuilt - d2.a.entries).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((s.u.transpose() * s.u - Matrix::Identity(50, 50)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((s.v.transpose() * s.v - Matrix::Identity(50, 50)).cwiseAbs().maxCoeff() <= 1e-9);
    for (Index j = 0; j < 50; ++j) {
      if (j > 0) CHECK(s.sigma[j] <= s.sigma[j - 1]);
      CHECK((d2.a.entries * s.v.col(j) - s.sigma[j] * s.u.col(j)).norm() <= 1e-9 * s.sigma[0]);
      Index first = 0;
      while (std::abs(s.v(first, j)) == 0.0) ++first;
      CHECK(s.v(first, j) > 0.0);
    }
  }
}

TEST_CASE("symmetrize: squared spectrum and projections") {
  SUBCASE("diagonal factor") {
    Matrix a(2, 2);
    a << 1.0, 0.0, 0.0, 0.5;
    const Vector x = Vector::Ones(2);
    const Vector b = a * x;
    const auto p = symmetrize(dense(a), x, b);
    CHECK(p.sigma[0] == doctest::Approx(1.0));
    CHECK(p.sigma[1] == doctest::Approx(0.25));
    CHECK(p.yhat[0] == doctest::Approx(1.0));
    CHECK(p.yhat[1] == doctest::Approx(0.25));
  }
  SUBCASE("rank deficient factor") {
    Matrix a(2, 2);
    a << 1.0, 0.0, 0.0, 0.0;
    CHECK_THROWS_AS(symmetrize(dense(a), Vector::Ones(2), Vector::Ones(2)), DegenerateOperator);
  }
  SUBCASE("deriv2 m=100") {
    const auto p = make_deriv2_problem(100, 1, true);
    REQUIRE(p.factor);
    CHECK(*p.decay_q == 8.0);
    std::vector<double> js, sig;
    for (Index j = 5; j <= 50; ++j) {
      js.push_back(static_cast<double>(j));
      sig.push_back(p.sigma[j - 1]);
    }
    CHECK(oracle::loglog_slope(js, sig) == doctest::Approx(-4.0).epsilon(0.05));
    for (Index j = 0; j < p.m(); ++j) CHECK(p.yhat[j] == p.sigma[j] * p.xhat[j]);

    const Matrix projected = p.factor->project(p.factor->b.transpose());
    CHECK((projected.row(0).transpose() - p.yhat).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("unsymmetrised deriv2 keeps the factor's spectrum") {
    const auto p = make_deriv2_problem(60, 1, false);
    CHECK(*p.decay_q == 4.0);
    const auto s = svd(make_deriv2(60, 1).a.entries);
    CHECK((p.sigma - s.sigma).cwiseAbs().maxCoeff() <= 1e-15);
    const Matrix projected = p.factor->project(p.factor->b.transpose());
    CHECK((projected.row(0).transpose() - p.yhat).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("problem CSV round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "specstop_operator_model_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "problem.csv";
  const auto p = make_deriv2_problem(30, 1, true);
  write_problem_csv(p, path);
  {
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "j,sigma,xhat,yhat");
  }
  const auto back = read_problem_csv(path);
  CHECK(back.m() == 30);
  CHECK((back.sigma - p.sigma).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.xhat - p.xhat).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.yhat - p.yhat).cwiseAbs().maxCoeff() == 0.0);

  const auto bad = dir / "bad.csv";
  {
    std::ofstream out(bad);
    out << "j,sigma,xhat,yhat\n1,0.5,1,0.5\n2,0.9,1,0.9\n";
  }
  CHECK_THROWS(read_problem_csv(bad));
  CHECK_THROWS_AS(read_problem_csv(dir / "missing.csv"), IoError);
  std::filesystem::remove_all(dir);
}
