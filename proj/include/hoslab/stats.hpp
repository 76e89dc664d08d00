#pragma once

#include <span>
#include <vector>

namespace hoslab::stats {

struct MeanEstimate
{
  double mean = 0.0;
  double std_error = 0.0;
  long count = 0;
};

MeanEstimate mean_estimate(std::span<const double> samples);

struct LinearFit
{
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_std_error = 0.0;
};

/// Ordinary least squares y = intercept + slope x; weights optional.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> weights = {});

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

struct Interval
{
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval for a binomial proportion at z standard deviations.
Interval wilson_interval(long successes, long trials, double z = 3.0);

/// Standard error of a proportion.
double proportion_std_error(long successes, long trials);

/// Kahan-style stable accumulation of a sum.
class Accumulator
{
 public:
  void add(double v);
  double sum() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace hoslab::stats
