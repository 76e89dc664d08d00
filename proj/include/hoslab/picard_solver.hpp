#pragma once

#include "hoslab/field.hpp"
#include "hoslab/lens_free.hpp"
#include "hoslab/report.hpp"

#include <filesystem>
#include <limits>
#include <optional>
#include <vector>

namespace hoslab {

/// Problem data for i u_t - H u = K cos(2t)^e |u|^{p-1} u on [-T, T],
/// e = d(p-1)/2 - 2.
struct SolverConfig
{
  int dim = 1;
  int nonlinearity_p = 5;
  int K = 1;
  double T = 0.25 * 3.14159265358979323846;
  int N = 32;
  int time_nodes = 65;   // odd, uniform on [-T, T]
  double tol = 1e-13;
  int max_iter = 50;
  double s = std::numeric_limits<double>::quiet_NaN();  // NaN: window midpoint
  bool nonlinear = true;
  double blowup_factor = 1e6;
  double audit_density = 16.0;

  void validate() const;
  int cosine_exponent() const;
  /// Midpoint of ]d/2 - 2/(p-1), d/2[ unless s is set.
  double reporting_s() const;
  double step() const { return 2.0 * T / (time_nodes - 1); }
};

json to_json(const SolverConfig& cfg);
SolverConfig solver_config_from_json(const json& j, SolverConfig defaults = {});

/// Solution on the time grid, stored in the interaction picture:
/// u(t) = e^{-itH} (u0 + D(t)), v(t) = e^{-itH} D(t).
struct Trajectory
{
  SolverConfig config;
  std::vector<double> times;
  SpectralField u0;
  std::vector<SpectralField> duhamel;    // D(t_k)
  int iterations = 0;
  std::vector<double> contraction_history;  // update norms per iteration
  double contraction_factor = 0.0;          // median successive ratio
  double geometric_fit_r2 = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;

  std::size_t size() const { return times.size(); }
  std::size_t middle() const { return times.size() / 2; }
  const BasisPtr& basis() const { return u0.basis_ptr(); }

  SpectralField v(std::size_t k) const;
  SpectralField u(std::size_t k) const;
  /// D(s) by 6-point Lagrange interpolation between nodes.
  SpectralField duhamel_at(double s) const;
  SpectralField u_at(double s) const;
};

/// K cos(2s)^e P_N(|u|^{p-1} u), with the product evaluated on the
/// de-aliased quadrature of degree (p+1) N.
class Nonlinearity
{
 public:
  Nonlinearity(BasisPtr basis, const SolverConfig& cfg);
  SpectralField operator()(const SpectralField& u, double s) const;
  int quad_per_axis() const { return per_axis_; }

 private:
  BasisPtr basis_;
  int p_;
  int K_;
  int exponent_;
  bool enabled_;
  int per_axis_;
  NodalTransform transform_;
};

/// Cumulative integrals I_k = int_{t_c}^{t_k} f from the centre node c of a
/// uniform grid outward: composite Simpson, closing with the 3/8 rule for an
/// odd number of intervals and a four-point rule for a single interval.
template <class V>
std::vector<V> cumulative_from_center(const std::vector<V>& f, double h);

/// One application of the Duhamel map on the whole grid:
/// D_new(t) = -i int_0^t e^{isH} N(e^{-isH}(u0 + D(s))) ds.
std::vector<SpectralField> duhamel_apply(const std::vector<SpectralField>& duhamel, const SpectralField& u0,
                                         const SolverConfig& cfg, const std::vector<double>& times);

/// Fixed-point iteration from D = e^{itH} v_init (default 0). When `resume`
/// is given its grid and coefficients are used as the starting iterate.
Trajectory picard_solve(const SpectralField& u0, const SolverConfig& cfg,
                        const std::optional<SpectralField>& v_init = {},
                        const Trajectory* resume = nullptr);

/// Stopping norm: max(L^inf_t H^s, L^2_t audit-sup of H^{s/2} e^{-itH} D).
double trajectory_norm(const std::vector<SpectralField>& duhamel, const std::vector<double>& times,
                       const SolverConfig& cfg);

/// max over interior nodes of || i d/dt u - H u - N(u) ||_{L^2}, with the
/// time derivative by fourth-order centred differences. Evaluated in the
/// interaction picture, where it equals the same quantity for u.
double residual(const Trajectory& traj);

std::vector<double> mass_curve(const Trajectory& traj);
double mass_drift(const Trajectory& traj);

Report uniqueness_probe(const SpectralField& u0, const SolverConfig& cfg, const SpectralField& perturbation);

/// Contraction factor of the Picard map against the window half-length T at
/// fixed data, and the slope kappa_hat of log rho against log T. Logged only.
Report contraction_sweep(const SpectralField& u0, const SolverConfig& cfg, const std::vector<double>& windows);

struct ScatteringPair
{
  SpectralField L_plus;
  SpectralField L_minus;
  double s = 0.0;  // Sobolev order of the residual curve
  std::vector<std::pair<double, double>> residual_curve;
};

/// Scattering states of the lens-transported solution: L^+- = D(+-T). The
/// residual || u~(t) - e^{it Delta}(u0 + L^+) ||_{H^s} equals
/// || D(s(t)) - D(T) ||_{H^s} because e^{it Delta} is unitary on H^s.
ScatteringPair scattering_extract(const Trajectory& traj, const std::vector<double>& external_times = {1.0, 5.0, 20.0});

/// Lens image of the solved trajectory at external time t.
PhysicalFrame global_nls_solution(const Trajectory& traj, double t, const std::optional<AuditGrid>& grid = {});

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj);
Trajectory load_trajectory(const std::filesystem::path& path);

}  // namespace hoslab
