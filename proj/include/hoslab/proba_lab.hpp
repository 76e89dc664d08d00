#pragma once

#include "hoslab/field.hpp"
#include "hoslab/random_ensembles.hpp"
#include "hoslab/report.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <vector>

namespace hoslab {

/// Empirical ||sum_n c_n g_n||_{L^q(Omega)} over q_grid and the slope of its
/// log against log q. Verdict: slope <= 1/m(gamma) + 0.15. Throws
/// UnstableEstimate when the relative standard error of E|S|^q at the
/// largest q exceeds 10%.
Report khinchin_growth(const EnsembleSpec& spec, const std::vector<double>& coeffs, const std::vector<int>& q_grid,
                       long n_samples, int workers = 1);

std::vector<int> default_khinchin_q_grid();

/// Permutations of {1..2p} without fixed points whose cycles all have
/// length 2 or 3.
boost::multiprecision::cpp_int b2p_closed_form(int p);  // 2p <= 60
long long b2p_brute_force(int p);                      // 2p <= 10

/// Table of counts for p = 1..p_max with brute-force agreement where it
/// runs, and the smallest C with count <= (C p)^{4p/3} over the range.
Report enumerate_b2p(int p_max);

/// E(X_{n_1} ... X_{n_k}) for the index tuple, against the exact value
/// prod_n E X^{mult(n)}.
Report odd_moment_witness(const EnsembleSpec& spec, const std::vector<int>& indices, long n_samples, int workers = 1);

/// Survival of ||u0^omega||_{Hbar^{(d-1)/2}} on t_grid and a linear fit of
/// log survival against t^gamma inside the window [1e-3, 0.3].
Report norm_tail(const SpectralField& base, const EnsembleSpec& spec, const std::vector<double>& t_grid,
                 long n_samples, int workers = 1);

struct TailExperiment
{
  SpectralField base;
  EnsembleSpec ensemble;
  std::vector<double> thresholds;
  long n_samples = 10000;
  int time_nodes = 257;        // over [-2 pi, 2 pi]
  double audit_density = 16.0;

  void validate() const;
};

/// Per-draw pair (||u0||_{Hbar^{(d-1)/2}}, ||e^{-itH} u0||_{L^{2p}_t Wbar^{1/7,inf}})
/// with t in [-2 pi, 2 pi]; the second norm is the audit-grid sup of
/// H^{1/14} u. Both are exactly homogeneous under scaling by powers of 2.
struct OmegaNorms
{
  double sobolev = 0.0;
  double strichartz = 0.0;
};

std::vector<OmegaNorms> omega_norms(const TailExperiment& exp, int p_nl, int workers = 1);

/// Empirical P(Omega_t) per threshold with Wilson intervals, the two-term
/// split, monotonicity, and a homogeneity audit against base / 2.
Report omega_t_probability(const TailExperiment& exp, int p_nl, int workers = 1);

/// P(Omega_lambda^c | ||u0^omega||_{Hbar^{(d-1)/2}} <= eta) per eta, with
/// Wilson intervals. Reported as a curve only; its small-eta limit is not
/// asserted.
Report small_data_conditional(const TailExperiment& exp, int p_nl, double lambda, const std::vector<double>& etas,
                              int workers = 1);

/// chi = 1 on [0, 1], 0 beyond 2, and 1 - S7(x - 1) between, S7 the
/// degree-7 smoothstep. Applied to H / N^2.
struct CutoffSpec
{
  double N = 4.0;
  double s = 0.0;

  static double chi(double x);
};

/// sigma_N^2 = sum chi^2(lambda^2/N^2) |c_n|^2 lambda^{2s} and the
/// Paley-Zygmund lower bound for S_N^2 = ||chi(H/N^2) u0^omega||^2_{H^s}.
Report paley_zygmund_check(const SpectralField& base, const EnsembleSpec& spec, const CutoffSpec& cutoff,
                           long n_samples, int workers = 1);

/// ||h_n||_{L^p} for n <= n_max (p = kInfinity allowed) times lambda_n^{1/6}
/// in d = 1, or times lambda_n^{1 - d/2} along h_{(k,k)} in d = 2.
Report eigenfunction_lp_decay(double p_exp, int n_max, int dim = 1);

/// Single-function L^p norm in d = 1 (trapezoid on a fine grid; sup refined
/// between grid points for p = infinity).
double hermite_lp_norm(int n, double p_exp);

/// MGF shape, tail shape and L^q growth of sum c_n g_n for gamma in (1, 2].
Report chernoff_tail(const EnsembleSpec& spec, const std::vector<double>& coeffs, const std::vector<double>& rho_grid,
                     long n_samples, int workers = 1);

}  // namespace hoslab
