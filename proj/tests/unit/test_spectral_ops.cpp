#include "hoslab/error.hpp"
#include "hoslab/spectral_ops.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace hoslab;

namespace {

SpectralField random_field(const BasisPtr& basis, unsigned seed, double decay = 1.0)
{
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  SpectralField u(basis);
  for (std::size_t k = 0; k < u.size(); ++k)
    u.coeffs()[static_cast<Eigen::Index>(k)] = Complex(z(gen), z(gen)) / std::pow(1.0 + k, decay);
  return u;
}

// Independent oracle for ||<x>^s h_0||^2 = pi^{-1/2} int (1+x^2)^s e^{-x^2}
// by a fine trapezoid rule on [-12, 12].
double bracket_moment_h0(double power)
{
  const int n = 200000;
  const double a = -12.0, h = 24.0 / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = a + i * h;
    const double f = std::pow(1.0 + x * x, power) * std::exp(-x * x);
    s += (i == 0 || i == n) ? 0.5 * f : f;
  }
  return s * h / std::sqrt(std::numbers::pi);
}

}  // namespace

TEST_CASE("harmonic Sobolev norm examples")
{
  auto b = make_basis(1, 10);
  CHECK(harmonic_sobolev_norm(SpectralField::unit(b, 0), 2.0) == doctest::Approx(1.0));
  CHECK(harmonic_sobolev_norm(SpectralField::unit(b, 5), 1.0) == doctest::Approx(std::sqrt(11.0)));
  const SpectralField u = random_field(b, 1);
  CHECK(harmonic_sobolev_norm(u, 0.0) == doctest::Approx(u.l2_norm()));
  CHECK_THROWS_AS(harmonic_sobolev_norm(u, -1.0), InvalidArgument);
}

TEST_CASE("linear propagator")
{
  auto b = make_basis(1, 40);
  const SpectralField u = random_field(b, 2);
  CHECK((propagate_linear(u, 0.0).coeffs() - u.coeffs()).norm() == 0.0);
  CHECK((propagate_linear(u, 2.0 * std::numbers::pi).coeffs() - u.coeffs()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(harmonic_sobolev_norm(propagate_linear(u, 0.37), 1.5) == doctest::Approx(harmonic_sobolev_norm(u, 1.5)));
  CHECK(propagate_linear(u, 0.37).l2_norm() == doctest::Approx(u.l2_norm()).epsilon(1e-15));
}

TEST_CASE("Fourier transform on Hermite functions")
{
  auto b = make_basis(2, 6);
  const SpectralField u = random_field(b, 3);
  SpectralField f = u;
  for (int i = 0; i < 4; ++i)
    f = fourier_transform(f);
  CHECK((f.coeffs() - u.coeffs()).norm() == 0.0);
  auto b1 = make_basis(1, 4);
  CHECK(fourier_transform(SpectralField::unit(b1, 0))[0] == Complex(1.0, 0.0));
  CHECK(fourier_transform(SpectralField::unit(b1, 1))[1] == Complex(0.0, -1.0));
  CHECK((inverse_fourier_transform(fourier_transform(u)).coeffs() - u.coeffs()).norm() == 0.0);

  // Check against direct quadrature of int h_1(x) e^{-ix xi} dx / sqrt(2 pi).
  const Quadrature q = gauss_hermite(60);
  const double xi = 0.8;
  Complex direct = 0.0;
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    const double x = q.points(0, j);
    direct += q.weights[j] * hermite_functions(1, x)[1] * std::polar(1.0, -x * xi);
  }
  direct /= std::sqrt(2.0 * std::numbers::pi);
  CHECK(std::abs(direct - Complex(0.0, -1.0) * hermite_functions(1, xi)[1]) < 1e-12);
}

TEST_CASE("weighted x norm")
{
  auto b = make_basis(1, 20);
  const SpectralField h0 = SpectralField::unit(b, 0);
  CHECK(weighted_x_L2_norm(h0, 0.0) == doctest::Approx(1.0));
  CHECK(weighted_x_L2_norm(h0, 1.0) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-12));
  CHECK(weighted_x_L2_norm(h0, 0.5) == doctest::Approx(std::sqrt(bracket_moment_h0(0.5))).epsilon(1e-9));
  CHECK(weighted_x_L2_norm(h0, 1.7) == doctest::Approx(std::sqrt(bracket_moment_h0(1.7))).epsilon(1e-9));
  const SpectralField u = random_field(b, 4);
  double prev = 0.0;
  for (double s : {0.0, 0.25, 0.5, 1.0, 1.5, 2.0}) {
    const double v = weighted_x_L2_norm(u, s);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("fractional Laplacian norm")
{
  auto b = make_basis(1, 100);
  for (int n = 0; n <= 100; ++n) {
    const SpectralField h = SpectralField::unit(b, n);
    CHECK(fractional_laplacian_L2_norm(h, 1.0) == doctest::Approx(std::sqrt((2.0 * n + 1) / 2.0)).epsilon(1e-10));
    for (double s : {0.5, 1.5}) {
      const double ratio = fractional_laplacian_L2_norm(h, s) / std::pow(2.0 * n + 1, 0.5 * s);
      CHECK(ratio >= 0.5);
      CHECK(ratio <= 1.5);
    }
  }
  CHECK(fractional_laplacian_L2_norm(SpectralField::unit(b, 0), 2.0) == doctest::Approx(std::sqrt(3.0) / 2.0));
  // d = 2, s = 1: ||grad h_n||^2 = (2|n| + 2)/2.
  auto b2 = make_basis(2, 8);
  for (std::size_t k = 0; k < b2->size(); ++k) {
    const double expected = std::sqrt((2.0 * b2->index(k).order() + 2.0) / 2.0);
    CHECK(fractional_laplacian_L2_norm(SpectralField::unit(b2, k), 1.0) == doctest::Approx(expected));
  }
  // d = 2, s = 2 via the oversampled tensor rule: || |xi|^2 h_0 ||^2 = E|xi|^4 = 2.
  CHECK(fractional_laplacian_L2_norm(SpectralField::unit(b2, 0), 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
}

TEST_CASE("classical Sobolev norm and norm comparison bracket")
{
  auto b = make_basis(1, 100);
  CHECK(classical_sobolev_norm(SpectralField::unit(b, 0), 0.0) == doctest::Approx(std::sqrt(2.0)));
  const SpectralField u = random_field(b, 5);
  CHECK(classical_sobolev_norm(2.0 * u, 0.7) == doctest::Approx(2.0 * classical_sobolev_norm(u, 0.7)));
  for (int n = 0; n <= 100; n += 7) {
    const SpectralField h = SpectralField::unit(b, n);
    for (double s : {0.5, 1.0}) {
      const double ratio = (fractional_laplacian_L2_norm(h, s) + weighted_x_L2_norm(h, s)) / harmonic_sobolev_norm(h, s);
      CHECK(ratio >= 0.5);
      CHECK(ratio <= 3.0);
    }
    const double lhs = classical_sobolev_norm(h, 0.5);
    CHECK(lhs <= std::sqrt(2.0) * weighted_x_L2_norm(h, 0.5) + fractional_laplacian_L2_norm(h, 0.5));
  }
}

TEST_CASE("audit-grid norms and space-time norms")
{
  auto b = make_basis(1, 32);
  const SpectralField h0 = SpectralField::unit(b, 0);
  const AuditSampler sampler(b);
  CHECK(sampler.sup(h0) == doctest::Approx(std::pow(std::numbers::pi, -0.25)));
  CHECK(sampler.lebesgue(h0, 2.0) == doctest::Approx(1.0).epsilon(1e-10));
  // ||h_0||_{L^4}^4 = pi^{-1} sqrt(pi/2)
  CHECK(sampler.lebesgue(h0, 4.0) == doctest::Approx(std::pow(std::sqrt(std::numbers::pi / 2.0) / std::numbers::pi, 0.25)));

  const NormSpec l2{NormKind::harmonic_sobolev, 0.0, 2.0};
  CHECK(spacetime_norm(h0, 2.0, l2, 1.0, 33) == doctest::Approx(std::sqrt(2.0)));
  const SpectralField u = random_field(b, 6);
  CHECK(spacetime_norm(u, kInfinity, l2, 3.0, 16) == doctest::Approx(u.l2_norm()));
  CHECK_THROWS_AS(spacetime_norm(u, 2.0, l2, 1.0, 15), InvalidArgument);

  const NormSpec sup{NormKind::harmonic_sobolev_sup, 1.0 / 7.0, kInfinity};
  const double coarse = spacetime_norm(u, 10.0, sup, 2.0 * std::numbers::pi, 1025);
  const double fine = spacetime_norm(u, 10.0, sup, 2.0 * std::numbers::pi, 2049);
  CHECK(std::abs(coarse - fine) <= 0.01 * fine);
}

TEST_CASE("smoothing functional")
{
  auto b = make_basis(1, 32);
  const SpectralField h0 = SpectralField::unit(b, 0);
  const double expected = std::sqrt(4.0 * std::numbers::pi) * std::sqrt(bracket_moment_h0(-0.25));
  CHECK(smoothing_functional(h0, 0.25, SmoothingVariant::sqrtH) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(smoothing_functional(h0, 0.25, SmoothingVariant::sqrtH, 64) == doctest::Approx(expected).epsilon(1e-9));

  const SpectralField u = random_field(b, 7);
  for (auto v : {SmoothingVariant::sqrtH, SmoothingVariant::fractional_grad}) {
    const SmoothingEvaluator eval(b, 0.25, v);
    const double exact = eval(u);
    CHECK(eval(2.0 * u) == doctest::Approx(exact).epsilon(1e-13));
    // Trapezoid over whole periods is exact once it resolves the highest
    // frequency 4N of |e^{itH}u|^2.
    CHECK(eval(u, 4 * 4 * 32 + 1) == doctest::Approx(exact).epsilon(1e-10));
  }
  CHECK_THROWS_AS(smoothing_functional(SpectralField::zero(b), 0.25, SmoothingVariant::sqrtH), InvalidArgument);
  CHECK_THROWS_AS(SmoothingEvaluator(b, 0.5, SmoothingVariant::sqrtH), InvalidArgument);
}

TEST_CASE("norm CSV export")
{
  std::ostringstream os;
  write_norm_csv(os, {NormRecord{NormSpec{NormKind::weighted_x, 1.0, 2.0}, kInfinity, 1.0, 32, 1.5}});
  CHECK(os.str().rfind("norm_kind,s,r,q,T,N,value\nweighted_x,1,2,inf,1,32,1.5", 0) == 0);
  CHECK(norm_kind_from_string("sup_norm") == NormKind::sup_norm);
  CHECK_THROWS_AS(norm_kind_from_string("bogus"), InvalidArgument);
}
