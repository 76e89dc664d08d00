#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace hoslab {

/// A point set with weights such that sum_j w_j f(x_j) approximates the
/// integral of f over R^d. Points are stored column-wise (dim x count).
struct Quadrature
{
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;

  int dim() const { return static_cast<int>(points.rows()); }
  Eigen::Index size() const { return points.cols(); }
};

/// Orthonormal Hermite functions h_0..h_nmax at x, via the normalized
/// three-term recurrence. The recurrence carries a separate binary exponent
/// so that far-tail points underflow only in the final value, never midway.
void hermite_functions(int nmax, double x, std::span<double> out);
std::vector<double> hermite_functions(int nmax, double x);

/// Gauss-Hermite rule with `count` nodes for the plain Lebesgue measure:
/// exact for f = p(x) e^{-x^2} with deg p <= 2 count - 1. The weights are the
/// classical weights times e^{x^2}, obtained as 1 / sum_k h_k(x_j)^2 so that
/// no exponential is ever formed.
Quadrature gauss_hermite(int count);

/// Tensor product of a one-dimensional rule.
Quadrature tensor_rule(const Quadrature& axis, int dim);

/// Rule for integrals of |x|^a f(x) over R with a > -1, exact when
/// f(x) e^{x^2} is a polynomial of degree <= 4 count - 1. Built from the
/// generalized Gauss-Laguerre rule in y = x^2. The |x|^a factor is folded
/// into the weights.
Quadrature radial_power_rule(double a, int count);

/// Uniform grid on [-L, L]^d with `density` points per unit length.
struct AuditGrid
{
  int dim = 1;
  double half_width = 0.0;
  double spacing = 0.0;
  std::vector<double> axis;

  Eigen::Index size() const;
  Eigen::MatrixXd points() const;  // dim x size, first axis fastest
  double cell_volume() const;
};

AuditGrid make_audit_grid(int dim, double half_width, double density);

}  // namespace hoslab
