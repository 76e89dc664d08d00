#include "hoslab/stats.hpp"

#include "hoslab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hoslab::stats {

MeanEstimate mean_estimate(std::span<const double> samples)
{
  MeanEstimate m;
  m.count = static_cast<long>(samples.size());
  if (samples.empty())
    return m;
  Accumulator acc;
  for (double v : samples)
    acc.add(v);
  m.mean = acc.sum() / m.count;
  if (m.count > 1) {
    Accumulator var;
    for (double v : samples)
      var.add((v - m.mean) * (v - m.mean));
    m.std_error = std::sqrt(var.sum() / (m.count - 1) / m.count);
  }
  return m;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> weights)
{
  const std::size_t n = x.size();
  if (n != y.size() || (!weights.empty() && weights.size() != n))
    throw InvalidArgument("fit", "x, y and weights must have equal length");
  if (n < 2)
    throw InvalidArgument("fit", "need at least two points");
  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };

  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w(i);
    sx += w(i) * x[i];
    sy += w(i) * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w(i) * (x[i] - mx) * (x[i] - mx);
    sxy += w(i) * (x[i] - mx) * (y[i] - my);
    syy += w(i) * (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0)
    throw InvalidArgument("fit", "degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += w(i) * r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  if (n > 2)
    f.slope_std_error = std::sqrt(sse / (n - 2) / sxx);
  return f;
}

namespace {

std::vector<double> ranks(std::span<const double> v)
{
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]])
      ++j;
    const double avg = 0.5 * (i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b)
{
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0)
    return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidArgument("spearman", "need two equal-length series of length >= 2");
  return pearson(ranks(x), ranks(y));
}

Interval wilson_interval(long successes, long trials, double z)
{
  if (trials <= 0 || successes < 0 || successes > trials)
    throw InvalidArgument("wilson", "invalid counts");
  const double n = static_cast<double>(trials);
  const double p = successes / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double proportion_std_error(long successes, long trials)
{
  if (trials <= 0)
    return 0.0;
  const double p = static_cast<double>(successes) / trials;
  return std::sqrt(p * (1 - p) / trials);
}

void Accumulator::add(double v)
{
  const double y = v - carry_;
  const double t = sum_ + y;
  carry_ = (t - sum_) - y;
  sum_ = t;
}

}  // namespace hoslab::stats
