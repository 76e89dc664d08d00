#pragma once

#include "hoslab/counter_rng.hpp"
#include "hoslab/field.hpp"
#include "hoslab/report.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace hoslab {

enum class Family { gaussian, rademacher, uniform_symmetric, symmetric_weibull, centered_two_point };

std::string to_string(Family f);
Family family_from_string(const std::string& name);

/// A random-variable law for the coefficients g_n together with the
/// hypotheses it satisfies. Construct through make(); validate() re-checks
/// the flags against the family's analytic properties.
struct EnsembleSpec
{
  Family family = Family::gaussian;
  double gamma = 2.0;           // certified tail exponent
  std::uint64_t seed = 0;
  bool satisfies_HE1 = false;   // all odd moments vanish
  bool satisfies_HE2 = false;   // mean zero
  bool satisfies_H01 = false;   // P(|g| < rho) > 0 for every rho > 0
  bool satisfies_H02 = false;   // E|g|^2 bounded below

  /// gamma <= 0 selects the family default (2); symmetric_weibull requires
  /// gamma in (0, 2].
  static EnsembleSpec make(Family family, std::uint64_t seed, double gamma = 0.0);
  void validate() const;

  /// Exact E X^k and E |X|^k.
  double moment(int k) const;
  double abs_moment(int k) const;
  double variance() const { return moment(2); }
  bool bounded() const;

  /// Concentration exponent m(gamma) for the strongest hypothesis this
  /// family satisfies.
  double concentration_exponent() const;
};

/// m(gamma): 2g/(2+g) when odd moments vanish and g <= 1; otherwise
/// 3g/(2g+3) for g <= 1, g on (1, 2], and 2 beyond.
double concentration_exponent(double gamma, bool odd_moments_vanish);

json to_json(const EnsembleSpec& spec);
EnsembleSpec ensemble_from_json(const json& j);

/// g_n(omega) for omega = sample_index, n = coeff_index. Pure function of
/// (spec.seed, sample_index, coeff_index).
double sample(const EnsembleSpec& spec, std::uint64_t sample_index, std::uint64_t coeff_index);

struct SurvivalFit
{
  std::vector<std::array<double, 3>> survival;  // (rho, P(|X| >= rho), std error)
  double max_abs = 0.0;
  bool bounded_support = false;  // survival drops from >= 100 exceedances to 0
  double gamma_hat = std::numeric_limits<double>::quiet_NaN();
  double log_prefactor = 0.0;
  double power = 0.0;
  double rate = 0.0;
  std::size_t fit_points = 0;
};

/// Empirical survival of |X| on rho_grid, fitted by log S = A - B log rho -
/// c rho^gamma (grid search in gamma, weighted least squares in A, B, c)
/// over thresholds with at least 10 exceedances and S <= 0.3.
SurvivalFit fit_survival(std::vector<double> abs_values, const std::vector<double>& rho_grid);

/// Fit of the empirical two-sided survival P(|X| >= rho) against
/// A - B log rho - c rho^gamma_hat; verdict gamma_hat >= spec.gamma - 0.15.
Report verify_tail(const EnsembleSpec& spec, long n_samples, const std::vector<double>& rho_grid, int workers = 1);

struct MomentEstimate
{
  double value = 0.0;
  double std_error = 0.0;
  double exact = 0.0;
};

/// Monte Carlo E|X|^order on coefficient stream 0.
MomentEstimate empirical_moment(const EnsembleSpec& spec, int order, long n_samples, int workers = 1);

struct RandomFieldDraw
{
  SpectralField base;
  SpectralField draw;
  std::uint64_t omega_id = 0;
};

RandomFieldDraw randomize(const SpectralField& base, const EnsembleSpec& spec, std::uint64_t omega_id);

}  // namespace hoslab
