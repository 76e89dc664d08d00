#pragma once

#include "hoslab/field.hpp"

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace hoslab {

enum class NormKind {
  harmonic_sobolev,         // ||H^{s/2} u||_{L^2}
  classical_sobolev,        // (||u||^2 + || |grad|^s u ||^2)^{1/2}
  weighted_x,               // ||<x>^s u||_{L^2}
  fractional_laplacian_L2,  // || |grad|^s u ||_{L^2}
  lebesgue_Lr,              // ||H^{s/2} u||_{L^r} on the audit grid
  sup_norm,                 // max |u| on the audit grid
  harmonic_sobolev_sup,     // max |H^{s/2} u| on the audit grid
};

std::string to_string(NormKind kind);
NormKind norm_kind_from_string(const std::string& name);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct NormSpec
{
  NormKind kind = NormKind::harmonic_sobolev;
  double s = 0.0;
  double r = 2.0;  // only read by lebesgue_Lr; kInfinity means sup

  void validate() const;
};

/// Coefficient-wise lambda_n^s, i.e. H^{s/2} (s may be negative).
SpectralField harmonic_power(const SpectralField& u, double s);

double harmonic_sobolev_norm(const SpectralField& u, double s);

/// e^{-itH}: c_n -> e^{-i t lambda_n^2} c_n.
SpectralField propagate_linear(const SpectralField& u, double t);

/// Unitary Fourier transform: c_n -> (-i)^{|n|} c_n.
SpectralField fourier_transform(const SpectralField& u);
SpectralField inverse_fourier_transform(const SpectralField& u);

double weighted_x_L2_norm(const SpectralField& u, double s);
double fractional_laplacian_L2_norm(const SpectralField& u, double s);
double classical_sobolev_norm(const SpectralField& u, double s);

/// Field values at arbitrary points (dim x count), evaluated by recurrence.
Eigen::VectorXcd synthesize_at(const SpectralField& u, const Eigen::MatrixXd& points);

/// Evaluation of fields of one basis on its audit grid. The table is built
/// once and reused, which matters inside time loops and Monte Carlo loops.
class AuditSampler
{
 public:
  explicit AuditSampler(BasisPtr basis, double density = 16.0);

  const AuditGrid& grid() const { return grid_; }
  const BasisGrid& basis() const { return *basis_; }
  double density() const { return density_; }
  /// Basis values on the grid (basis size x points); empty when too large to keep.
  const Eigen::MatrixXd& table() const { return table_; }

  Eigen::VectorXcd values(const SpectralField& u) const;
  double sup(const SpectralField& u) const;
  double lebesgue(const SpectralField& u, double r) const;

 private:
  BasisPtr basis_;
  double density_;
  AuditGrid grid_;
  Eigen::MatrixXd table_;  // basis size x audit points
};

/// Spatial norm of a single field. Audit-grid kinds build a sampler per call;
/// use the overload taking a sampler inside loops.
double spatial_norm(const SpectralField& u, const NormSpec& norm);
double spatial_norm(const SpectralField& u, const NormSpec& norm, const AuditSampler& sampler);

/// || ||e^{-itH} u0||_norm ||_{L^q(-T, T)} by the composite trapezoid rule on
/// time_nodes uniform nodes; q = kInfinity takes the max over nodes.
double spacetime_norm(const SpectralField& u0, double q, const NormSpec& norm, double T, int time_nodes,
                      double audit_density = 16.0);

enum class SmoothingVariant { sqrtH, fractional_grad };

std::string to_string(SmoothingVariant v);
SmoothingVariant smoothing_variant_from_string(const std::string& name);

/// Normalized smoothing functional
///   || <x>^{-(1/2-eps)} G e^{itH} u0 ||_{L^2([-2pi, 2pi] x R^d)} / ||u0||_den
/// with G = H^{(1/2-2eps)/2} (sqrtH, den = L^2) or G = |grad|^{d/2-2eps}
/// (fractional_grad, den = harmonic Sobolev of order (d-1)/2).
///
/// With time_nodes = 0 the time integral is evaluated exactly: the spectrum
/// is 2|n| + d, so |e^{itH}u|^2 is pi-periodic and the integral over a whole
/// number of periods reduces to 4 pi sum_k ||<x>^{..} G P_k u0||^2 over the
/// eigenspaces P_k. time_nodes > 0 uses the periodic trapezoid rule instead.
class SmoothingEvaluator
{
 public:
  SmoothingEvaluator(BasisPtr basis, double eps, SmoothingVariant variant, int projection_degree = 0);

  double operator()(const SpectralField& u0, int time_nodes = 0) const;

  double eps() const { return eps_; }
  SmoothingVariant variant() const { return variant_; }
  // Degree of the space that receives G u0 (2N by default for fractional_grad).
  int projection_degree() const { return projection_degree_; }

 private:
  double denominator(const SpectralField& u0) const;

  BasisPtr basis_;
  double eps_;
  SmoothingVariant variant_;
  int projection_degree_;
  // Rows: weighted quadrature samples sqrt(w_j) <x_j>^{-(1/2-eps)} (G h_n)(x_j);
  // columns: basis functions of the input basis.
  Eigen::MatrixXd weighted_;
  std::vector<std::vector<Eigen::Index>> shells_;  // column indices per |n|
};

double smoothing_functional(const SpectralField& u0, double eps, SmoothingVariant variant, int time_nodes = 0);

/// One CSV row (norm_kind, s, r, q, T, N, value). q and T are NaN for purely
/// spatial norms.
struct NormRecord
{
  NormSpec norm;
  double q = std::numeric_limits<double>::quiet_NaN();
  double T = std::numeric_limits<double>::quiet_NaN();
  int N = 0;
  double value = 0.0;
};

void write_norm_csv(std::ostream& os, const std::vector<NormRecord>& rows);

}  // namespace hoslab
