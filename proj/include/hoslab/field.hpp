#pragma once

#include "hoslab/hermite_basis.hpp"

#include <Eigen/Dense>

#include <complex>

namespace hoslab {

using Complex = std::complex<double>;

/// u = sum_n c_n h_n on a BasisGrid.
class SpectralField
{
 public:
  SpectralField() = default;
  explicit SpectralField(BasisPtr basis);
  SpectralField(BasisPtr basis, Eigen::VectorXcd coeffs);

  static SpectralField zero(BasisPtr basis) { return SpectralField(std::move(basis)); }
  // Unit coefficient on the k-th enumerated function.
  static SpectralField unit(BasisPtr basis, std::size_t k);

  const BasisGrid& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const Eigen::VectorXcd& coeffs() const { return coeffs_; }
  Eigen::VectorXcd& coeffs() { return coeffs_; }
  Complex operator[](std::size_t k) const { return coeffs_[static_cast<Eigen::Index>(k)]; }
  std::size_t size() const { return static_cast<std::size_t>(coeffs_.size()); }

  double l2_norm() const { return coeffs_.norm(); }
  bool all_finite() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(Complex a);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(Complex a, SpectralField u) { return u *= a; }
  friend SpectralField operator*(SpectralField u, Complex a) { return u *= a; }

 private:
  void check_same_basis(const SpectralField& other) const;

  BasisPtr basis_;
  Eigen::VectorXcd coeffs_;
};

/// values[j] = sum_n c_n h_n(x_j) on the basis quadrature nodes.
Eigen::VectorXcd synthesize(const SpectralField& field);

/// c_n = sum_j w_j h_n(x_j) values[j]; the left inverse of synthesize.
SpectralField analyze(const Eigen::VectorXcd& values, const BasisPtr& basis);

/// Out-of-span energy of nodal values: sum_j w_j |v_j|^2 - ||analyze(v)||^2,
/// clamped at zero.
double out_of_span_energy(const Eigen::VectorXcd& values, const BasisGrid& basis);

/// Copy coefficients into another basis of the same dimension; modes absent
/// from the target are dropped, new modes are zero.
SpectralField rebase(const SpectralField& field, const BasisPtr& target);

/// Derivative along `axis`, returned in a basis of degree N + 1:
/// h_n' = sqrt(n/2) h_{n-1} - sqrt((n+1)/2) h_{n+1}.
SpectralField derivative_coefficients(const SpectralField& field, int axis = 0);

/// Multiplication by x_axis, exact, into degree N + 1.
SpectralField multiply_by_x(const SpectralField& field, int axis = 0);

}  // namespace hoslab
