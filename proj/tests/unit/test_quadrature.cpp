#include "hoslab/basis_cache.hpp"
#include "hoslab/error.hpp"
#include "hoslab/field.hpp"
#include "hoslab/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace hoslab;

namespace {

// Closed-form Hermite functions from the physicists' polynomials.
double h_closed(int n, double x)
{
  double hm = 1.0, h = 2.0 * x;
  if (n == 0)
    h = 1.0;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * h - 2.0 * k * hm;
    hm = h;
    h = next;
  }
  const double norm = std::sqrt(std::pow(2.0, n) * std::tgamma(n + 1.0) * std::sqrt(std::numbers::pi));
  return h * std::exp(-0.5 * x * x) / norm;
}

}  // namespace

TEST_CASE("hermite functions match the closed form")
{
  for (double x : {-3.5, -1.0, 0.0, 0.3, 2.2, 6.0}) {
    const auto h = hermite_functions(12, x);
    for (int n = 0; n <= 12; ++n)
      CHECK(h[n] == doctest::Approx(h_closed(n, x)).epsilon(1e-12).scale(1.0));
  }
  CHECK(hermite_functions(0, 0.0)[0] == doctest::Approx(std::pow(std::numbers::pi, -0.25)));
}

TEST_CASE("hermite recurrence survives far tails")
{
  const auto h = hermite_functions(400, 30.0);
  for (double v : h)
    CHECK(std::isfinite(v));
  CHECK(std::abs(h[400]) > 0.0);
  for (int n = 0; n <= 200; ++n)
    for (double x : {0.0, 0.7, 1.9, 5.0, 12.0, 20.0})
      CHECK(std::abs(hermite_functions(n, x)[n]) <= 0.76);
}

TEST_CASE("Gauss-Hermite integrates Gaussian moments exactly")
{
  for (int count : {1, 2, 5, 17, 64, 256}) {
    const Quadrature q = gauss_hermite(count);
    for (int k = 0; k < count && k <= 30; ++k) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < q.size(); ++j) {
        const double x = q.points(0, j);
        s += q.weights[j] * std::pow(x, 2 * k) * std::exp(-x * x);
      }
      CHECK(s == doctest::Approx(std::tgamma(k + 0.5)).epsilon(1e-11));
    }
  }
}

TEST_CASE("Gauss-Hermite nodes at large counts stay finite and symmetric")
{
  const Quadrature q = gauss_hermite(1024);
  CHECK(q.weights.allFinite());
  CHECK(q.points.allFinite());
  CHECK(q.points(0, 0) == -q.points(0, 1023));
  CHECK((q.weights.array() > 0).all());
}

TEST_CASE("radial power rule reproduces Gamma integrals")
{
  for (double a : {-0.4, 0.0, 0.5, 1.0, 2.7}) {
    const Quadrature q = radial_power_rule(a, 20);
    for (int k = 0; k < 10; ++k) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < q.size(); ++j) {
        const double x = q.points(0, j);
        s += q.weights[j] * std::pow(x, 2 * k) * std::exp(-x * x);
      }
      // int |x|^{a+2k} e^{-x^2} dx = Gamma((a + 2k + 1)/2)
      CHECK(s == doctest::Approx(std::tgamma((a + 2 * k + 1) / 2.0)).epsilon(1e-11));
    }
  }
  const Quadrature q = radial_power_rule(1.0, 4);
  double s = 0.0;
  for (Eigen::Index j = 0; j < q.size(); ++j)
    s += q.weights[j] * std::pow(hermite_functions(0, q.points(0, j))[0], 2);
  CHECK(s == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-13));
  CHECK_THROWS_AS(radial_power_rule(-1.0, 4), InvalidArgument);
}

TEST_CASE("multi-index enumeration")
{
  CHECK(total_degree_count(2, 3) == 10);
  const auto idx = enumerate_total_degree(2, 3);
  REQUIRE(idx.size() == 10);
  CHECK(idx[0].components() == std::vector<int>{0, 0});
  CHECK(idx[1].components() == std::vector<int>{0, 1});
  CHECK(idx[2].components() == std::vector<int>{1, 0});
  CHECK(idx[9].components() == std::vector<int>{3, 0});
  CHECK(total_degree_count(3, 10) == 286);
  CHECK(eigenvalue(MultiIndex({1, 2}), 2) == 8.0);
}

TEST_CASE("basis orthonormality on the stored quadrature")
{
  CHECK(make_basis(1, 32, 128)->gram_deviation() <= 1e-10);
  CHECK(make_basis(1, 64, 256)->gram_deviation() <= 1e-10);
  CHECK(make_basis(2, 12, 40)->gram_deviation() <= 1e-10);
  CHECK_THROWS_AS(BasisGrid::build(1, 10, 20), InvalidArgument);
  CHECK_THROWS_AS(BasisGrid::build(4, 2, 6), InvalidArgument);
  CHECK_THROWS_AS(BasisGrid::build(3, 200, 402), InvalidArgument);
}

TEST_CASE("analyze inverts synthesize")
{
  auto basis = make_basis(1, 20);
  Eigen::VectorXcd c(basis->size());
  for (Eigen::Index k = 0; k < c.size(); ++k)
    c[k] = Complex(std::cos(k), 1.0 / (1 + k));
  const SpectralField u(basis, c);
  const SpectralField back = analyze(synthesize(u), basis);
  CHECK((back.coeffs() - c).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(out_of_span_energy(synthesize(u), *basis) < 1e-12);

  // Gaussian e^{-x^2/2} = pi^{1/4} h_0.
  Eigen::VectorXcd g(basis->quadrature().size());
  for (Eigen::Index j = 0; j < g.size(); ++j)
    g[j] = std::exp(-0.5 * std::pow(basis->quadrature().points(0, j), 2));
  const SpectralField gh = analyze(g, basis);
  CHECK(std::abs(gh[0] - std::pow(std::numbers::pi, 0.25)) < 1e-13);
  CHECK(gh.coeffs().tail(basis->size() - 1).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("derivative and position ladders")
{
  auto basis = make_basis(1, 30);
  const SpectralField d0 = derivative_coefficients(SpectralField::unit(basis, 0));
  CHECK(std::abs(d0[1] - Complex(-1.0 / std::sqrt(2.0))) < 1e-15);
  for (int n : {0, 3, 17, 30}) {
    const SpectralField d = derivative_coefficients(SpectralField::unit(basis, n));
    CHECK(d.l2_norm() * d.l2_norm() == doctest::Approx((2.0 * n + 1) / 2.0));
    // Rayleigh quotient <H h_n, h_n> = ||h_n'||^2 + ||x h_n||^2 = 2n + 1.
    const SpectralField x = multiply_by_x(SpectralField::unit(basis, n));
    const double rq = d.l2_norm() * d.l2_norm() + x.l2_norm() * x.l2_norm();
    CHECK(std::abs(rq - (2.0 * n + 1)) < 1e-6);
  }
  auto other = make_basis(1, 29);
  CHECK_THROWS_AS(SpectralField::unit(basis, 0) + SpectralField::unit(other, 0), BasisMismatch);
}

TEST_CASE("basis cache reloads bit-identically")
{
  const auto dir = std::filesystem::temp_directory_path() / "hoslab_cache_test";
  std::filesystem::remove_all(dir);
  auto built = load_or_build_basis(dir, 2, 8, 0);
  auto loaded = load_or_build_basis(dir, 2, 8, 0);
  auto fresh = make_basis(2, 8);
  CHECK(bitwise_equal(*built, *loaded));
  CHECK(bitwise_equal(*fresh, *loaded));
  std::filesystem::remove_all(dir);
}
