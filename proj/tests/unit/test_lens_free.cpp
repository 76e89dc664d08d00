#include "hoslab/error.hpp"
#include "hoslab/lens_free.hpp"
#include "hoslab/spectral_ops.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hoslab;

namespace {

SpectralField mixed_field(const BasisPtr& b)
{
  SpectralField u = SpectralField::unit(b, 0);
  u.coeffs()[3] = Complex(0.3, -0.2);
  u.coeffs()[8] = Complex(0.0, 0.15);
  return u;
}

}  // namespace

TEST_CASE("time map and dilation")
{
  CHECK(lens_time_map(0.5) == doctest::Approx(std::numbers::pi / 8).epsilon(1e-15));
  CHECK(inverse_lens_time_map(std::numbers::pi / 8) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(lens_time_map(-2.0) == doctest::Approx(-lens_time_map(2.0)));
  CHECK(lens_dilation(1.0) == doctest::Approx(std::sqrt(5.0)));
  CHECK_THROWS_AS(inverse_lens_time_map(std::numbers::pi / 4), InvalidArgument);
  for (double t : {0.1, 1.0, 10.0, 1e3})
    CHECK(inverse_lens_time_map(lens_time_map(t)) == doctest::Approx(t).epsilon(1e-10));
}

TEST_CASE("lens transform at t = 0 is sampling and is an isometry")
{
  const BasisPtr b = cached_basis(1, 64);
  const SpectralField u = mixed_field(b);
  const PhysicalFrame f = lens_forward(u, 0.0);
  const AuditSampler sampler(b, 16.0);
  CHECK((f.values - sampler.values(u)).cwiseAbs().maxCoeff() < 1e-14);
  for (double t : {0.0, 0.25, 1.0, 10.0}) {
    const PhysicalFrame g = lens_forward(u, t);
    CHECK(std::abs(g.l2_norm() - u.l2_norm()) < 1e-10);
  }
}

TEST_CASE("lens image of the linear oscillator flow is the free flow")
{
  const BasisPtr b = cached_basis(1, 64);
  const SpectralField u0 = mixed_field(b);
  for (double t : {0.25, 0.5, 1.0}) {
    const PhysicalFrame lens = lens_forward(propagate_linear(u0, lens_time_map(t)), t);
    const PhysicalFrame direct = free_propagate(u0, t, lens.grid);
    CHECK(l2_distance(lens, direct) < 1e-6);
  }
}

TEST_CASE("free propagator: Gaussian spreading and unitarity")
{
  const BasisPtr b = cached_basis(1, 64);
  const double t = 0.5;
  const PhysicalFrame g = free_propagate(SpectralField::unit(b, 0), t);
  CHECK(g.sup_norm() == doctest::Approx(std::pow(std::numbers::pi, -0.25) * std::pow(1 + 4 * t * t, -0.25)).epsilon(1e-10));

  const SpectralField h3 = SpectralField::unit(b, 3);
  CHECK(std::abs(free_propagate_field(h3, 0.3).l2_norm() - 1.0) < 1e-8);
  CHECK(std::abs(free_propagate(h3, 0.3).l2_norm() - 1.0) < 1e-8);
}

TEST_CASE("free propagator refuses degrees beyond the budget")
{
  const BasisPtr b = cached_basis(1, 64);
  CHECK_THROWS_AS(free_propagate_field(SpectralField::unit(b, 0), 50.0), AliasingGuard);
  CHECK_THROWS_AS(free_propagate_field(SpectralField::unit(b, 0), 1.0, 70), AliasingGuard);
}

TEST_CASE("time-indexed lens transport checks the window")
{
  const BasisPtr b = cached_basis(1, 16);
  const TimeIndexedField u = [&](double s) { return propagate_linear(SpectralField::unit(b, 0), s); };
  CHECK_NOTHROW(lens_forward(u, 0.5, 0.2));
  CHECK_THROWS_AS(lens_forward(u, 0.3, 1.0), InvalidArgument);
}
