#pragma once

#include "hoslab/field.hpp"

#include <functional>
#include <iosfwd>
#include <optional>

namespace hoslab {

/// Complex values on a uniform grid at one time.
struct PhysicalFrame
{
  AuditGrid grid;
  Eigen::VectorXcd values;
  double time = 0.0;

  /// Trapezoid L^2 norm: (spacing^d sum |v|^2)^{1/2}.
  double l2_norm() const;
  double sup_norm() const;
  /// Rows (x..., re, im), one per grid point.
  void write_csv(std::ostream& os) const;
};

/// L^2 distance between two frames on the same grid.
double l2_distance(const PhysicalFrame& a, const PhysicalFrame& b);

/// s = arctan(2t)/2 and its inverse t = tan(2s)/2 (|s| < pi/4).
double lens_time_map(double t);
double inverse_lens_time_map(double s);

/// Spatial dilation factor sqrt(1 + 4 t^2).
double lens_dilation(double t);

/// Audit grid of `basis` dilated by sqrt(1 + 4t^2): the lens transform then
/// samples u(s) exactly at the audit points.
AuditGrid lens_frame_grid(const BasisGrid& basis, double t);

/// Lens image at time t of a field given at the internal time s(t):
///   (1+4t^2)^{-d/4} u(s, x / sqrt(1+4t^2)) e^{i |x|^2 t / (1+4t^2)}.
PhysicalFrame lens_forward(const SpectralField& u_at_s, double t, const std::optional<AuditGrid>& grid = {});

/// Same, for a trajectory known on |s| <= window.
using TimeIndexedField = std::function<SpectralField(double s)>;
PhysicalFrame lens_forward(const TimeIndexedField& u, double window, double t,
                           const std::optional<AuditGrid>& grid = {});

/// Default ceiling on the degree of the free-propagation output basis.
int default_free_degree_budget(int dim);

/// Hermite degree needed to represent e^{it Delta} of a degree-N field: the
/// phase-space support grows by mu = 1 + 2t^2 + 2|t| sqrt(1+t^2),
/// applied to N plus a margin for the blurred spectral edge.
int free_output_degree(int dim, int max_degree, double t);

/// e^{it Delta} u0 through the Fourier multiplier e^{-it|xi|^2}, projected
/// onto a Hermite basis of degree free_output_degree. Throws AliasingGuard
/// when that degree exceeds `degree_budget` (0 selects the default).
SpectralField free_propagate_field(const SpectralField& u0, double t, int degree_budget = 0);

/// free_propagate_field sampled on a frame grid (default lens_frame_grid).
PhysicalFrame free_propagate(const SpectralField& u0, double t, const std::optional<AuditGrid>& grid = {},
                             int degree_budget = 0);

}  // namespace hoslab
