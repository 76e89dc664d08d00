#include "hoslab/lens_free.hpp"

#include "hoslab/error.hpp"
#include "hoslab/report.hpp"
#include "hoslab/spectral_ops.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace hoslab {

double PhysicalFrame::l2_norm() const
{
  return std::sqrt(grid.cell_volume() * values.squaredNorm());
}

double PhysicalFrame::sup_norm() const
{
  return values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
}

void PhysicalFrame::write_csv(std::ostream& os) const
{
  const Eigen::MatrixXd pts = grid.points();
  for (int a = 0; a < grid.dim; ++a)
    os << "x" << a << ',';
  os << "re,im\n";
  os.precision(17);
  for (Eigen::Index j = 0; j < pts.cols(); ++j) {
    for (int a = 0; a < grid.dim; ++a)
      os << pts(a, j) << ',';
    os << values[j].real() << ',' << values[j].imag() << '\n';
  }
}

double l2_distance(const PhysicalFrame& a, const PhysicalFrame& b)
{
  if (a.grid.dim != b.grid.dim || a.grid.axis != b.grid.axis)
    throw InvalidArgument("frame", "frames live on different grids");
  return std::sqrt(a.grid.cell_volume() * (a.values - b.values).squaredNorm());
}

double lens_time_map(double t)
{
  return 0.5 * std::atan(2.0 * t);
}

double inverse_lens_time_map(double s)
{
  if (!(std::abs(s) < 0.25 * std::numbers::pi))
    throw InvalidArgument("s", "inverse lens map needs |s| < pi/4");
  return 0.5 * std::tan(2.0 * s);
}

double lens_dilation(double t)
{
  return std::sqrt(1.0 + 4.0 * t * t);
}

AuditGrid lens_frame_grid(const BasisGrid& basis, double t)
{
  AuditGrid g = basis.audit_grid();
  const double sigma = lens_dilation(t);
  g.spacing *= sigma;
  g.half_width *= sigma;
  for (double& x : g.axis)
    x *= sigma;
  return g;
}

PhysicalFrame lens_forward(const SpectralField& u_at_s, double t, const std::optional<AuditGrid>& grid)
{
  const BasisGrid& basis = u_at_s.basis();
  PhysicalFrame f;
  f.time = t;
  f.grid = grid ? *grid : lens_frame_grid(basis, t);
  if (f.grid.dim != basis.dim())
    throw InvalidArgument("grid", "dimension differs from the field's");
  const double sigma2 = 1.0 + 4.0 * t * t;
  const double sigma = std::sqrt(sigma2);
  const Eigen::MatrixXd pts = f.grid.points();
  const Eigen::VectorXcd inner = synthesize_at(u_at_s, pts / sigma);
  const double amplitude = std::pow(sigma2, -0.25 * basis.dim());
  f.values.resize(pts.cols());
  for (Eigen::Index j = 0; j < pts.cols(); ++j)
    f.values[j] = amplitude * inner[j] * std::polar(1.0, pts.col(j).squaredNorm() * t / sigma2);
  return f;
}

PhysicalFrame lens_forward(const TimeIndexedField& u, double window, double t, const std::optional<AuditGrid>& grid)
{
  const double s = lens_time_map(t);
  if (std::abs(s) > window * (1.0 + 1e-14))
    throw InvalidArgument("t", "internal time " + num(s) + " lies beyond the solved window " +
                                   num(window));
  return lens_forward(u(s), t, grid);
}

int default_free_degree_budget(int dim)
{
  switch (dim) {
    case 1: return 2048;
    case 2: return 160;
    default: return 60;
  }
}

int free_output_degree(int dim, int max_degree, double t)
{
  const double a = std::abs(t);
  const double mu = 1.0 + 2.0 * a * a + 2.0 * a * std::sqrt(1.0 + a * a);
  // The input's own spectral edge is blurred over ~N^{1/3} modes; the flow
  // stretches that blur by mu as well.
  const double edge = max_degree + 0.5 * dim + 10.0 * std::cbrt(max_degree + 1.0) + 4.0;
  return static_cast<int>(std::ceil(mu * edge + 16.0));
}

SpectralField free_propagate_field(const SpectralField& u0, double t, int degree_budget)
{
  const BasisGrid& in = u0.basis();
  if (t == 0.0)
    return u0;
  const int budget = degree_budget > 0 ? degree_budget : default_free_degree_budget(in.dim());
  const int n_out = std::max(in.max_degree(), free_output_degree(in.dim(), in.max_degree(), t));
  if (n_out > budget)
    throw AliasingGuard("free propagation to t = " + num(t) + " needs output degree " +
                        std::to_string(n_out) + " > budget " + std::to_string(budget) +
                        "; use the lens route for large times");
  const BasisPtr out = cached_basis(in.dim(), n_out);

  // Fourier side: uhat(xi) = sum (-i)^{|n|} c_n h_n(xi), times the chirp,
  // analysed on the output basis quadrature, then inverse transform.
  const SpectralField uhat = fourier_transform(u0);
  const Quadrature& q = out->quadrature();
  const Eigen::MatrixXd table_in = in.evaluate(q.points);
  Eigen::VectorXcd values(q.size());
  values.real() = table_in.transpose() * uhat.coeffs().real();
  values.imag() = table_in.transpose() * uhat.coeffs().imag();
  for (Eigen::Index j = 0; j < q.size(); ++j)
    values[j] *= std::polar(1.0, -t * q.points.col(j).squaredNorm());
  return inverse_fourier_transform(analyze(values, out));
}

PhysicalFrame free_propagate(const SpectralField& u0, double t, const std::optional<AuditGrid>& grid, int degree_budget)
{
  const SpectralField v = free_propagate_field(u0, t, degree_budget);
  PhysicalFrame f;
  f.time = t;
  f.grid = grid ? *grid : lens_frame_grid(u0.basis(), t);
  f.values = synthesize_at(v, f.grid.points());
  return f;
}

}  // namespace hoslab
