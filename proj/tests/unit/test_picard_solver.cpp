#include "hoslab/error.hpp"
#include "hoslab/picard_solver.hpp"
#include "hoslab/spectral_ops.hpp"
#include "hoslab/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace hoslab;

namespace {

SolverConfig reference_config()
{
  SolverConfig c;
  c.N = 32;
  c.time_nodes = 65;
  return c;
}

SpectralField scaled_ground_state(double amplitude, int N = 32)
{
  return amplitude * SpectralField::unit(cached_basis(1, N), 0);
}

}  // namespace

TEST_CASE("config validation")
{
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.nonlinearity_p = 4;
  CHECK_THROWS_WITH_AS(c.validate(), "nonlinearity_p must be odd ≥ 5", InvalidArgument);
  c = SolverConfig{};
  c.T = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = SolverConfig{};
  c.time_nodes = 64;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = SolverConfig{};
  c.K = 2;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  CHECK(SolverConfig{}.cosine_exponent() == 0);
  SolverConfig d3;
  d3.dim = 3;
  CHECK(d3.cosine_exponent() == 4);
  CHECK(SolverConfig{}.reporting_s() == doctest::Approx(0.25));

  const json j = to_json(reference_config());
  CHECK(solver_config_from_json(j).N == 32);
  CHECK_THROWS_AS(solver_config_from_json(json{{"K", "plus"}}), InvalidArgument);
}

TEST_CASE("cumulative integration is exact for cubics and fourth order beyond")
{
  for (int m : {7, 9, 33}) {
    const double h = 0.1;
    std::vector<double> f(static_cast<std::size_t>(m));
    const int c = m / 2;
    for (int k = 0; k < m; ++k) {
      const double t = (k - c) * h;
      f[static_cast<std::size_t>(k)] = 1 - 2 * t + 3 * t * t - 4 * t * t * t;
    }
    const auto I = cumulative_from_center(f, h);
    for (int k = 0; k < m; ++k) {
      const double t = (k - c) * h;
      CHECK(I[static_cast<std::size_t>(k)] == doctest::Approx(t - t * t + t * t * t - t * t * t * t).epsilon(1e-13));
    }
  }
  // Error on cos over [0, 1] should drop ~16x per halving.
  double prev = 0.0;
  for (int m : {33, 65, 129}) {
    const double h = 2.0 / (m - 1);
    std::vector<double> f(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k)
      f[static_cast<std::size_t>(k)] = std::cos(3.0 * (k - m / 2) * h);
    const auto I = cumulative_from_center(f, h);
    double err = 0.0;
    for (int k = 0; k < m; ++k)
      err = std::max(err, std::abs(I[static_cast<std::size_t>(k)] - std::sin(3.0 * (k - m / 2) * h) / 3.0));
    if (prev > 0.0)
      CHECK(prev / err > 12.0);
    prev = err;
  }
}

TEST_CASE("zero data converges in one iteration")
{
  const Trajectory t = picard_solve(scaled_ground_state(0.0), reference_config());
  CHECK(t.converged);
  CHECK(t.iterations == 1);
  for (const auto& d : t.duhamel)
    CHECK(d.l2_norm() == 0.0);
  const ScatteringPair sp = scattering_extract(t);
  CHECK(sp.L_plus.l2_norm() == 0.0);
  CHECK(sp.L_minus.l2_norm() == 0.0);
}

TEST_CASE("first Picard iterate is quintic in the amplitude")
{
  const SolverConfig c = reference_config();
  std::vector<double> times(static_cast<std::size_t>(c.time_nodes));
  for (int k = 0; k < c.time_nodes; ++k)
    times[static_cast<std::size_t>(k)] = (k - c.time_nodes / 2) * c.step();
  double ratios[2];
  int i = 0;
  for (double eps : {1e-2, 5e-3}) {
    const SpectralField u0 = scaled_ground_state(eps);
    const std::vector<SpectralField> zero(times.size(), SpectralField::zero(u0.basis_ptr()));
    const auto D = duhamel_apply(zero, u0, c, times);
    // L(0)(T) in the Schrodinger picture has the same L2 norm as D(T).
    ratios[i++] = D.back().l2_norm() / std::pow(eps, 5);
  }
  CHECK(ratios[0] > 0.0);
  CHECK(std::abs(ratios[0] / ratios[1] - 1.0) < 0.05);
}

TEST_CASE("reference small-data run")
{
  const SolverConfig c = reference_config();
  const Trajectory t = picard_solve(scaled_ground_state(0.1), c);
  CHECK(t.converged);
  CHECK(t.iterations <= 20);
  CHECK(t.contraction_factor < 0.5);
  CHECK(t.contraction_history.back() <= 1e-10);
  CHECK(residual(t) <= 1e-6);
  CHECK(mass_drift(t) <= 1e-8);
  CHECK(mass_curve(t).size() == t.size());
  // u(0) = u0 exactly: D vanishes at the centre node.
  CHECK(t.duhamel[t.middle()].l2_norm() == 0.0);
}

TEST_CASE("residual converges at fourth order in the time step")
{
  std::vector<double> logm, logr;
  for (int m : {65, 129, 257}) {
    SolverConfig c = reference_config();
    c.time_nodes = m;
    const Trajectory t = picard_solve(scaled_ground_state(0.1), c);
    logm.push_back(std::log(double(m - 1)));
    logr.push_back(std::log(residual(t)));
  }
  CHECK(-stats::linear_fit(logm, logr).slope >= 3.5);
}

TEST_CASE("sign of the nonlinearity matters, mass does not drift")
{
  SolverConfig c = reference_config();
  const Trajectory plus = picard_solve(scaled_ground_state(0.1), c);
  c.K = -1;
  const Trajectory minus = picard_solve(scaled_ground_state(0.1), c);
  CHECK((plus.duhamel.back() - minus.duhamel.back()).l2_norm() > 0.0);
  CHECK(mass_drift(minus) <= 1e-8);
}

TEST_CASE("linear run is exact")
{
  SolverConfig c = reference_config();
  c.nonlinear = false;
  c.time_nodes = 129;
  const Trajectory t = picard_solve(scaled_ground_state(0.7), c);
  CHECK(residual(t) <= 1e-8);
  CHECK(mass_drift(t) == 0.0);
}

TEST_CASE("divergence guard and iteration cap")
{
  SolverConfig c = reference_config();
  c.K = -1;
  try {
    picard_solve(scaled_ground_state(3.0), c);
    FAIL("expected a solver failure");
  } catch (const SolverFailure& e) {
    CHECK(e.kind() == SolverFailure::Kind::divergence);
    CHECK(e.time_node() >= 0);
  }
  c = reference_config();
  c.max_iter = 1;
  try {
    picard_solve(scaled_ground_state(0.1), c);
    FAIL("expected a solver failure");
  } catch (const SolverFailure& e) {
    CHECK(e.kind() == SolverFailure::Kind::max_iterations);
    CHECK(e.contraction_history().size() == 1);
  }
  CHECK_THROWS_AS(picard_solve(scaled_ground_state(0.1, 16), reference_config()), BasisMismatch);
}

TEST_CASE("contraction factor shrinks with the window")
{
  const double pi = std::numbers::pi;
  const Report r = contraction_sweep(scaled_ground_state(0.3), reference_config(), {pi / 16, pi / 8, pi / 4});
  const auto& rows = r.curves().front().rows;
  REQUIRE(rows.size() == 3);
  CHECK(rows[0][1] < rows[1][1]);
  CHECK(rows[1][1] < rows[2][1]);
  CHECK(r.stats()["kappa_hat"].get<double>() > 0.0);
}

TEST_CASE("uniqueness probe")
{
  const SolverConfig c = reference_config();
  const SpectralField u0 = scaled_ground_state(0.1);
  const BasisPtr b = u0.basis_ptr();

  const Report same = uniqueness_probe(u0, c, SpectralField::zero(b));
  CHECK(same.stats()["max_gap_l2"].get<double>() == 0.0);

  const Report near = uniqueness_probe(u0, c, 0.01 * SpectralField::unit(b, 1));
  CHECK(near.stats()["outcome"] == "agree");
  CHECK(near.passed());

  const Report far = uniqueness_probe(u0, c, 10.0 * SpectralField::unit(b, 1));
  const std::string outcome = far.stats()["outcome"];
  CHECK((outcome == "diverged" || outcome == "agree"));
  CHECK(far.passed());
}

TEST_CASE("scattering states")
{
  const SolverConfig c = reference_config();
  const Trajectory t = picard_solve(scaled_ground_state(0.1), c);
  const ScatteringPair sp = scattering_extract(t);
  REQUIRE(sp.residual_curve.size() == 3);
  CHECK(sp.residual_curve[0].second > sp.residual_curve[1].second);
  CHECK(sp.residual_curve[1].second > sp.residual_curve[2].second);
  CHECK(sp.residual_curve[2].second <= 1e-3);

  std::vector<double> loglam, lognorm;
  for (double lam : {0.05, 0.1}) {
    const ScatteringPair s = scattering_extract(picard_solve(scaled_ground_state(lam), c));
    loglam.push_back(std::log(lam));
    lognorm.push_back(std::log(harmonic_sobolev_norm(s.L_plus, s.s)));
  }
  const double slope = (lognorm[1] - lognorm[0]) / (loglam[1] - loglam[0]);
  CHECK(std::abs(slope - 5.0) <= 0.3);

  // Physical cross-check at t = 1: u~(1) - e^{i Delta}(u0 + L+) has the
  // residual curve's size in L2 (s is small).
  const PhysicalFrame lhs = global_nls_solution(t, 1.0);
  const PhysicalFrame rhs = free_propagate(t.u0 + sp.L_plus, 1.0, lhs.grid);
  const double gap = l2_distance(lhs, rhs);
  const double l2_residual = (t.duhamel_at(lens_time_map(1.0)) - sp.L_plus).l2_norm();
  CHECK(gap == doctest::Approx(l2_residual).epsilon(1e-3));
}

TEST_CASE("global solution through the lens")
{
  const SolverConfig c = reference_config();
  const Trajectory t = picard_solve(scaled_ground_state(0.1), c);
  const PhysicalFrame at0 = global_nls_solution(t, 0.0);
  const AuditSampler sampler(t.basis(), c.audit_density);
  CHECK((at0.values - sampler.values(t.u0)).cwiseAbs().maxCoeff() < 1e-15);
  for (double tt : {0.5, 2.0, 10.0})
    CHECK(std::abs(global_nls_solution(t, tt).l2_norm() - t.u_at(lens_time_map(tt)).l2_norm()) <= 1e-8);

  SolverConfig lin = c;
  lin.nonlinear = false;
  const Trajectory tl = picard_solve(scaled_ground_state(0.1), lin);
  const PhysicalFrame a = global_nls_solution(tl, 0.5);
  CHECK(l2_distance(a, free_propagate(tl.u0, 0.5, a.grid)) <= 1e-6);

  SolverConfig shortc = c;
  shortc.T = 0.3;
  const Trajectory ts = picard_solve(scaled_ground_state(0.1), shortc);
  CHECK_THROWS_AS(global_nls_solution(ts, 10.0), InvalidArgument);
}

TEST_CASE("interpolation reproduces nodes and stays smooth between them")
{
  const Trajectory t = picard_solve(scaled_ground_state(0.1), reference_config());
  CHECK((t.duhamel_at(t.times[10]) - t.duhamel[10]).l2_norm() == 0.0);
  const double mid = 0.5 * (t.times[10] + t.times[11]);
  const double between = t.duhamel_at(mid).l2_norm();
  CHECK(between > std::min(t.duhamel[10].l2_norm(), t.duhamel[11].l2_norm()) * 0.99);
  CHECK(between < std::max(t.duhamel[10].l2_norm(), t.duhamel[11].l2_norm()) * 1.01);
}

TEST_CASE("checkpoints reload bit-identically and resume")
{
  SolverConfig c = reference_config();
  const Trajectory t = picard_solve(scaled_ground_state(0.1), c);
  const auto path = std::filesystem::temp_directory_path() / "hoslab_traj_test.bin";
  save_trajectory(path, t);
  const Trajectory r = load_trajectory(path);
  CHECK(r.times == t.times);
  CHECK(r.iterations == t.iterations);
  CHECK(r.contraction_history == t.contraction_history);
  for (std::size_t k = 0; k < t.size(); ++k)
    CHECK((r.duhamel[k].coeffs().array() == t.duhamel[k].coeffs().array()).all());
  CHECK(std::isnan(r.config.s));

  const Trajectory again = picard_solve(r.u0, r.config, {}, &r);
  CHECK(again.iterations == t.iterations);

  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_trajectory(path), Error);
}
