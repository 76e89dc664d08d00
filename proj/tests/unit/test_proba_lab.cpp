#include "hoslab/error.hpp"
#include "hoslab/proba_lab.hpp"
#include "hoslab/spectral_ops.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hoslab;

namespace {

// Gaussian |Z| moments: E|Z|^q = 2^{q/2} Gamma((q+1)/2) / sqrt(pi).
double normal_lq(int q)
{
  return std::pow(std::pow(2.0, 0.5 * q) * std::tgamma(0.5 * (q + 1)) / std::sqrt(std::numbers::pi), 1.0 / q);
}

SpectralField flat_base(int modes)
{
  SpectralField u(cached_basis(1, modes - 1));
  for (int k = 0; k < modes; ++k)
    u.coeffs()[k] = 1.0 / std::sqrt(double(modes));
  return u;
}

// Count by cycle-type brute force through the exponential formula:
// sum over a, b of n! / (a! 2^a b! 3^b) computed in doubles.
double b2p_oracle(int p)
{
  const int n = 2 * p;
  double total = 0.0;
  for (int b = 0; 3 * b <= n; ++b) {
    if ((n - 3 * b) % 2)
      continue;
    const int a = (n - 3 * b) / 2;
    total += std::exp(std::lgamma(n + 1.0) - std::lgamma(a + 1.0) - a * std::log(2.0) - std::lgamma(b + 1.0) -
                      b * std::log(3.0));
  }
  return total;
}

}  // namespace

TEST_CASE("B_2p counts")
{
  CHECK(b2p_brute_force(1) == 1);
  CHECK(b2p_brute_force(2) == 3);
  CHECK(b2p_brute_force(3) == 55);
  CHECK(b2p_brute_force(4) == 1225);
  for (int p = 1; p <= 5; ++p)
    CHECK(b2p_closed_form(p) == b2p_brute_force(p));
  for (int p = 6; p <= 30; ++p)
    CHECK(b2p_closed_form(p).convert_to<double>() == doctest::Approx(b2p_oracle(p)).epsilon(1e-10));
  CHECK_THROWS_AS(b2p_brute_force(6), InvalidArgument);
  CHECK_THROWS_AS(b2p_closed_form(31), InvalidArgument);

  const Report r = enumerate_b2p(12);
  CHECK(r.passed());
  CHECK(r.stats()["table"][2]["closed_form"] == "55");
  CHECK(r.stats()["fitted_C"].get<double>() >= 1.0);
}

TEST_CASE("Khinchin growth")
{
  const std::vector<int> q = default_khinchin_q_grid();
  SUBCASE("gaussian sum is exactly normal")
  {
    const std::vector<double> c(8, 1.0 / std::sqrt(8.0));
    const Report r = khinchin_growth(EnsembleSpec::make(Family::gaussian, 11), c, q, 200000);
    CHECK(r.passed());
    const Curve& curve = r.curves().front();
    CHECK(curve.rows[1][1] == doctest::Approx(std::pow(3.0, 0.25)).epsilon(0.02));
    for (const auto& row : curve.rows)
      CHECK(std::abs(row[1] - normal_lq(int(row[0]))) <= 4.0 * row[2] + 1e-3);
    CHECK(std::abs(r.stats()["beta_hat"].get<double>() - 0.5) <= 0.1);
  }
  SUBCASE("single rademacher coefficient has flat norms")
  {
    const Report r = khinchin_growth(EnsembleSpec::make(Family::rademacher, 2), {1.0}, q, 1000);
    CHECK(r.stats()["beta_hat"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("weibull gamma = 1 stays under the HE1 exponent")
  {
    const std::vector<double> c(32, 1.0 / std::sqrt(32.0));
    const Report r = khinchin_growth(EnsembleSpec::make(Family::symmetric_weibull, 3, 1.0), c, {2, 4, 6, 8}, 100000);
    CHECK(r.passed());
    CHECK(r.stats()["exponent_bound"].get<double>() == doctest::Approx(1.5));
  }
  CHECK_THROWS_AS(khinchin_growth(EnsembleSpec::make(Family::gaussian, 1), {0.5}, q, 1000), InvalidArgument);
  CHECK_THROWS_AS(khinchin_growth(EnsembleSpec::make(Family::gaussian, 1), {1.0}, {2, 3}, 1000), InvalidArgument);
  CHECK_THROWS_AS(khinchin_growth(EnsembleSpec::make(Family::symmetric_weibull, 1, 0.3), {1.0}, {2, 24}, 1000),
                  UnstableEstimate);
}

TEST_CASE("odd moment witnesses")
{
  const Report distinct = odd_moment_witness(EnsembleSpec::make(Family::gaussian, 1), {1, 2, 3}, 100000);
  CHECK(distinct.passed());
  CHECK(distinct.stats()["exact"].get<double>() == 0.0);

  const Report pairs = odd_moment_witness(EnsembleSpec::make(Family::rademacher, 1), {1, 1, 2, 2}, 1000);
  CHECK(pairs.stats()["estimate"].get<double>() == 1.0);
  CHECK(pairs.passed());

  const Report triple = odd_moment_witness(EnsembleSpec::make(Family::centered_two_point, 1), {1, 1, 1}, 200000);
  CHECK(triple.stats()["exact"].get<double>() == doctest::Approx(1.5));
  CHECK(triple.passed());
  bool detected = false;
  for (const Check& c : triple.checks())
    detected = detected || (c.name == "odd_moment_detected" && c.pass);
  CHECK(detected);
}

TEST_CASE("norm tails")
{
  SUBCASE("one gaussian mode: survival 2 Phi-bar(t)")
  {
    const SpectralField base = SpectralField::unit(cached_basis(1, 0), 0);
    std::vector<double> t;
    for (double x = 0.2; x <= 3.5; x += 0.1)
      t.push_back(x);
    const Report r = norm_tail(base, EnsembleSpec::make(Family::gaussian, 5), t, 100000);
    for (const auto& row : r.curves().front().rows)
      CHECK(std::abs(row[1] - std::erfc(row[0] / std::sqrt(2.0))) <= 4.0 * row[2] + 1e-12);
    // log survival ~ -t^2/2 in the window.
    CHECK(r.stats()["rate_hat"].get<double>() == doctest::Approx(0.5).epsilon(0.25));
  }
  SUBCASE("rademacher norm is deterministic")
  {
    const Report r = norm_tail(flat_base(8), EnsembleSpec::make(Family::rademacher, 5), {0.5, 1.5}, 10000);
    CHECK(r.passed());
    CHECK(r.stats()["deterministic_norm"].get<double>() == doctest::Approx(1.0));
  }
  SUBCASE("32 gaussian modes fit t^2 in the window")
  {
    std::vector<double> t;
    for (double x = 0.5; x <= 2.5; x += 0.02)
      t.push_back(x);
    CHECK(norm_tail(flat_base(32), EnsembleSpec::make(Family::gaussian, 2), t, 50000).passed());
  }
}

TEST_CASE("Omega_t probability")
{
  TailExperiment e;
  e.base = SpectralField(cached_basis(1, 4));
  for (int k = 0; k < 5; ++k)
    e.base.coeffs()[k] = 1.0 / (1 + k);
  e.ensemble = EnsembleSpec::make(Family::gaussian, 9);
  e.thresholds = {0.75, 1.5, 3.0, 50.0};
  e.n_samples = 2000;
  e.time_nodes = 129;
  const Report r = omega_t_probability(e, 5);
  CHECK(r.passed());
  const auto& rows = r.curves().front().rows;
  CHECK(rows.back()[1] == 1.0);
  CHECK(rows.front()[2] > 0.0);

  // Worker count does not change the samples.
  const auto a = omega_norms(e, 5, 1);
  const auto b = omega_norms(e, 5, 3);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i].strichartz == b[i].strichartz);

  // Conditioning on a small norm shrinks the complement probability.
  const Report small = small_data_conditional(e, 5, 1.5, {0.25, 0.5, 1.0, 100.0});
  const auto& cond = small.curves().front().rows;
  CHECK(cond.back()[1] == double(e.n_samples));
  CHECK(cond.back()[2] == doctest::Approx(1.0 - rows[1][1]));
  CHECK(cond[1][2] <= cond.back()[2]);
  CHECK_THROWS_AS(small_data_conditional(e, 5, 1.5, {1.0, 0.5}), InvalidArgument);

  e.thresholds = {1.0, 0.5};
  CHECK_THROWS_AS(omega_t_probability(e, 5), InvalidArgument);
}

TEST_CASE("smoothstep cutoff")
{
  CHECK(CutoffSpec::chi(0.0) == 1.0);
  CHECK(CutoffSpec::chi(1.0) == 1.0);
  CHECK(CutoffSpec::chi(2.0) == 0.0);
  CHECK(CutoffSpec::chi(-3.0) == 0.0);
  CHECK(CutoffSpec::chi(1.5) == doctest::Approx(0.5));
  double prev = 1.0;
  for (double x = 1.0; x <= 2.0; x += 0.01) {
    const double v = CutoffSpec::chi(x);
    CHECK(v <= prev + 1e-15);
    CHECK(v >= 0.0);
    prev = v;
  }
}

TEST_CASE("Paley-Zygmund")
{
  SUBCASE("single rademacher mode")
  {
    const Report r = paley_zygmund_check(SpectralField::unit(cached_basis(1, 4), 0),
                                         EnsembleSpec::make(Family::rademacher, 1), {4.0, 0.0}, 2000);
    CHECK(r.passed());
    CHECK(r.stats()["p_hat"].get<double>() == 1.0);
    CHECK(r.stats()["lower_bound"].get<double>() == doctest::Approx(0.25));
  }
  SUBCASE("16 gaussian modes: chi-square moments")
  {
    // S^2 is proportional to a chi-square with k = 16: E^2/(4 E S^4) = k^2 / (4 (k^2 + 2k)).
    const Report r = paley_zygmund_check(flat_base(16), EnsembleSpec::make(Family::gaussian, 4), {100.0, 0.0}, 100000);
    CHECK(r.passed());
    const double exact = 256.0 / (4.0 * (256.0 + 32.0));
    CHECK(std::abs(r.stats()["lower_bound"].get<double>() - exact) <= 3.0 * r.stats()["sigma_hat"].get<double>());
  }
  SUBCASE("sigma_N grows with N for a base outside Hbar^s")
  {
    SpectralField base(cached_basis(1, 256));
    for (int k = 0; k <= 256; ++k)
      base.coeffs()[k] = std::pow(1.0 + k, -0.75);
    double prev = 0.0;
    for (double N : {4.0, 8.0, 16.0}) {
      const Report r = paley_zygmund_check(base, EnsembleSpec::make(Family::gaussian, 5), {N, 0.5}, 3000);
      CHECK(r.passed());
      const double sigma = r.stats()["sigma_N2"].get<double>();
      CHECK(sigma > prev);
      prev = sigma;
    }
  }
  CHECK_THROWS_AS(paley_zygmund_check(SpectralField::unit(cached_basis(1, 40), 40),
                                      EnsembleSpec::make(Family::gaussian, 1), {2.0, 0.0}, 1000),
                  InvalidArgument);
}

TEST_CASE("eigenfunction L^p decay")
{
  CHECK(hermite_lp_norm(0, 4.0) == doctest::Approx(std::pow(std::sqrt(std::numbers::pi / 2) / std::numbers::pi, 0.25)).epsilon(1e-12));
  CHECK(hermite_lp_norm(0, kInfinity) == doctest::Approx(std::pow(std::numbers::pi, -0.25)).epsilon(1e-12));
  // L^2 norms are 1 (the trapezoid rule is spectrally accurate here).
  for (int n : {5, 50, 200})
    CHECK(hermite_lp_norm(n, 2.0) == doctest::Approx(1.0).epsilon(1e-10));
  const Report r = eigenfunction_lp_decay(kInfinity, 120);
  CHECK(r.passed());
  CHECK(eigenfunction_lp_decay(4.0, 60, 2).passed());
  CHECK_THROWS_AS(eigenfunction_lp_decay(2.0, 60), InvalidArgument);
}

TEST_CASE("Chernoff-type bounds")
{
  std::vector<double> rho;
  for (double x = 0.5; x <= 6.0; x += 0.25)
    rho.push_back(x);
  const std::vector<double> c(16, 0.25);
  // The free-exponent estimate is noisy per seed; its average is the
  // quantity held to 2 +- 0.15.
  double gamma_sum = 0.0;
  for (std::uint64_t seed : {3, 4, 5, 6}) {
    const Report g = chernoff_tail(EnsembleSpec::make(Family::gaussian, seed), c, rho, 300000);
    CHECK(g.passed());
    CHECK(g.stats()["mgf_c_hat"].get<double>() == doctest::Approx(0.5).epsilon(0.1));
    // sum of 16 standard normals / ||c|| is standard normal: log S ~ -u^2/2
    CHECK(g.stats()["tail_rate_hat"].get<double>() == doctest::Approx(0.5).epsilon(0.2));
    gamma_sum += g.stats()["tail_gamma_hat"].get<double>();
  }
  CHECK(std::abs(gamma_sum / 4.0 - 2.0) <= 0.15);
  CHECK_THROWS_AS(chernoff_tail(EnsembleSpec::make(Family::symmetric_weibull, 3, 1.0), c, rho, 10000),
                  InvalidArgument);
}
