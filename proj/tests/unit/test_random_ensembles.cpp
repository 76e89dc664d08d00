#include "hoslab/error.hpp"
#include "hoslab/parallel.hpp"
#include "hoslab/random_ensembles.hpp"
#include "hoslab/spectral_ops.hpp"
#include "hoslab/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

using namespace hoslab;

TEST_CASE("Philox4x32-10 known-answer vectors")
{
  using B = Philox4x32::Block;
  CHECK(Philox4x32::generate(B{0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniforms stay in the open interval")
{
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const auto u = open_uniforms({7, i, 3, 0});
    CHECK(u[0] > 0.0);
    CHECK(u[0] < 1.0);
    CHECK(u[1] > 0.0);
    CHECK(u[1] < 1.0);
  }
}

TEST_CASE("ensemble specs and certificates")
{
  const auto g = EnsembleSpec::make(Family::gaussian, 1);
  CHECK(g.satisfies_HE1);
  CHECK(g.satisfies_HE2);
  const auto r = EnsembleSpec::make(Family::rademacher, 1);
  CHECK_FALSE(r.satisfies_H01);
  const auto t = EnsembleSpec::make(Family::centered_two_point, 1);
  CHECK_FALSE(t.satisfies_HE1);
  CHECK(t.satisfies_HE2);
  CHECK(t.moment(1) == 0.0);
  CHECK(t.moment(3) == doctest::Approx(1.5));
  CHECK_THROWS_AS(EnsembleSpec::make(Family::symmetric_weibull, 1, 2.5), InvalidArgument);
  CHECK_THROWS_AS(EnsembleSpec::make(Family::gaussian, 1, 1.0), InvalidArgument);
  auto bad = g;
  bad.satisfies_HE1 = false;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK_THROWS_AS(family_from_string("cauchy"), InvalidArgument);

  const auto w = EnsembleSpec::make(Family::symmetric_weibull, 3, 1.5);
  CHECK(ensemble_from_json(to_json(w)).gamma == 1.5);
  CHECK(ensemble_from_json(to_json(w)).seed == 3);
}

TEST_CASE("concentration exponent table")
{
  CHECK(concentration_exponent(1.0, true) == doctest::Approx(2.0 / 3.0));
  CHECK(concentration_exponent(1.0, false) == doctest::Approx(3.0 / 5.0));
  CHECK(concentration_exponent(0.5, false) == doctest::Approx(1.5 / 4.0));
  CHECK(concentration_exponent(1.5, false) == 1.5);
  CHECK(concentration_exponent(1.5, true) == 1.5);
  CHECK(concentration_exponent(2.0, false) == 2.0);
  CHECK(concentration_exponent(3.0, false) == 2.0);
}

TEST_CASE("marginal moments")
{
  const long n = 1000000;
  const auto g = EnsembleSpec::make(Family::gaussian, 11);
  const auto m2 = empirical_moment(g, 2, n);
  CHECK(std::abs(m2.value - 1.0) < 0.01);
  const auto m4 = empirical_moment(g, 4, n);
  CHECK(std::abs(m4.value - 3.0) < 0.05);
  CHECK(m2.value * m2.value <= m4.value);

  const auto r = EnsembleSpec::make(Family::rademacher, 11);
  for (int k : {1, 2, 5, 9})
    CHECK(empirical_moment(r, k, 1000).value == 1.0);
  for (std::uint64_t i = 0; i < 1000; ++i)
    CHECK(std::abs(sample(r, i, 4)) == 1.0);

  const auto t = EnsembleSpec::make(Family::centered_two_point, 11);
  double s1 = 0.0, s3 = 0.0;
  for (long i = 0; i < n; ++i) {
    const double x = sample(t, i, 0);
    s1 += x;
    s3 += x * x * x;
  }
  CHECK(std::abs(s1 / n) < 0.005);
  CHECK(std::abs(s3 / n - 1.5) < 0.05);

  const auto u = EnsembleSpec::make(Family::uniform_symmetric, 11);
  CHECK(std::abs(empirical_moment(u, 2, n).value - 1.0) < 0.01);
  const auto w = EnsembleSpec::make(Family::symmetric_weibull, 11, 1.0);
  const auto w2 = empirical_moment(w, 2, n);
  CHECK(std::abs(w2.value - 2.0) < 5 * w2.std_error);
}

TEST_CASE("streams are reproducible and uncorrelated")
{
  const auto g = EnsembleSpec::make(Family::gaussian, 99);
  CHECK(sample(g, 17, 5) == sample(g, 17, 5));
  const long n = 200000;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (long i = 0; i < n; ++i) {
    const double x = sample(g, i, 0), y = sample(g, i, 1);
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  CHECK(std::abs(sxy / std::sqrt(sxx * syy)) <= 3.0 / std::sqrt(double(n)));

  // Worker count does not change results.
  std::vector<double> a(5000), b(5000);
  parallel_for(a.size(), 1, [&](std::size_t i) { a[i] = sample(g, i, 2); });
  parallel_for(b.size(), 4, [&](std::size_t i) { b[i] = sample(g, i, 2); });
  CHECK(a == b);
}

TEST_CASE("tail verification")
{
  std::vector<double> grid;
  for (double x = 1.0; x <= 4.0 + 1e-9; x += 0.25)
    grid.push_back(x);
  const Report gr = verify_tail(EnsembleSpec::make(Family::gaussian, 5), 1000000, grid);
  CHECK(gr.passed());
  CHECK(std::abs(gr.stats()["gamma_hat"].get<double>() - 2.0) <= 0.15);

  std::vector<double> wgrid;
  for (double x = 1.0; x <= 9.0 + 1e-9; x += 0.5)
    wgrid.push_back(x);
  const Report wr = verify_tail(EnsembleSpec::make(Family::symmetric_weibull, 5, 1.0), 1000000, wgrid);
  CHECK(wr.passed());
  CHECK(std::abs(wr.stats()["gamma_hat"].get<double>() - 1.0) <= 0.15);

  const Report rr = verify_tail(EnsembleSpec::make(Family::rademacher, 5), 100000, grid);
  CHECK(rr.passed());
  CHECK(rr.stats()["bounded_support_detected"].get<bool>());
  CHECK_THROWS_AS(verify_tail(EnsembleSpec::make(Family::gaussian, 5), 1000, grid), InvalidArgument);
  CHECK_THROWS_AS(verify_tail(EnsembleSpec::make(Family::gaussian, 5), 100000, {1.0, 1.0, 2.0, 3.0}), InvalidArgument);
}

TEST_CASE("randomized fields")
{
  auto b = make_basis(1, 30);
  SpectralField base(b);
  for (std::size_t k = 0; k < base.size(); ++k)
    base.coeffs()[static_cast<Eigen::Index>(k)] = Complex(1.0 / (1.0 + k), 0.5 / (2.0 + k));

  const auto r = EnsembleSpec::make(Family::rademacher, 3);
  const RandomFieldDraw rd = randomize(base, r, 42);
  CHECK(harmonic_sobolev_norm(rd.draw, 0.5) == doctest::Approx(harmonic_sobolev_norm(base, 0.5)).epsilon(1e-15));
  for (std::size_t k = 0; k < base.size(); ++k) {
    const Complex ratio = rd.draw[k] / base[k];
    CHECK(ratio.imag() == 0.0);
  }

  const auto g = EnsembleSpec::make(Family::gaussian, 3);
  const RandomFieldDraw a1 = randomize(base, g, 7), a2 = randomize(base, g, 7);
  CHECK((a1.draw.coeffs() - a2.draw.coeffs()).norm() == 0.0);
  double acc = 0.0;
  const int draws = 10000;
  for (int w = 0; w < draws; ++w)
    acc += std::pow(randomize(base, g, w).draw.l2_norm() / base.l2_norm(), 2);
  CHECK(std::abs(acc / draws - 1.0) < 0.05);
  CHECK_THROWS_AS(randomize(SpectralField::zero(b), g, 0), InvalidArgument);
}

TEST_CASE("statistics helpers")
{
  const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 6, 8, 10.5};
  const auto f = stats::linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(2.1).epsilon(0.05));
  CHECK(f.r_squared > 0.99);
  CHECK(stats::spearman(x, y) == doctest::Approx(1.0));
  const std::vector<double> down{5, 4, 4, 2, 1};
  CHECK(stats::spearman(x, down) < -0.9);
  const auto w = stats::wilson_interval(5, 10000);
  CHECK(w.low > 0.0);
  CHECK(w.high < 0.01);
  CHECK(stats::wilson_interval(0, 100).low == 0.0);
}
