#include "hoslab/quadrature.hpp"

#include "hoslab/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace hoslab {

namespace {

constexpr double kRescaleAbove = 1e150;
constexpr double kRescaleFactor = 1e-150;
const double kLogRescale = std::log(1e150);

// h_n(x) = mantissa * exp(log_scale). Used where only ratios or logs of the
// top two functions matter (node polishing, weights).
struct ScaledPair
{
  double top = 0.0;     // mantissa of h_n
  double below = 0.0;   // mantissa of h_{n-1}
  double log_scale = 0.0;
};

ScaledPair hermite_top_pair(int n, double x)
{
  ScaledPair r;
  r.log_scale = -0.5 * x * x - 0.25 * std::log(std::numbers::pi);
  double prev = 0.0;
  double cur = 1.0;
  for (int k = 0; k < n; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * x * cur - std::sqrt(double(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleAbove) {
      cur *= kRescaleFactor;
      prev *= kRescaleFactor;
      r.log_scale += kLogRescale;
    }
  }
  r.top = cur;
  r.below = prev;
  return r;
}

// Orthonormal Laguerre polynomials for the measure y^alpha e^{-y}, scaled.
struct LaguerreEval
{
  double p = 0.0;        // p_K mantissa
  double p_prev = 0.0;   // p_{K-1} mantissa
  double dp = 0.0;       // p_K' mantissa
  double log_scale = 0.0;
};

LaguerreEval laguerre_top(int K, double alpha, double y)
{
  LaguerreEval r;
  r.log_scale = -0.5 * std::lgamma(alpha + 1.0);
  double p_prev = 0.0, p = 1.0;
  double d_prev = 0.0, d = 0.0;
  for (int k = 0; k < K; ++k) {
    const double a_k = 2.0 * k + alpha + 1.0;
    const double b_k = std::sqrt(k * (k + alpha));
    const double b_next = std::sqrt((k + 1.0) * (k + 1.0 + alpha));
    const double p_next = ((y - a_k) * p - b_k * p_prev) / b_next;
    const double d_next = (p + (y - a_k) * d - b_k * d_prev) / b_next;
    p_prev = p;
    p = p_next;
    d_prev = d;
    d = d_next;
    const double big = std::max({std::abs(p), std::abs(d), std::abs(p_prev)});
    if (big > kRescaleAbove) {
      p *= kRescaleFactor;
      p_prev *= kRescaleFactor;
      d *= kRescaleFactor;
      d_prev *= kRescaleFactor;
      r.log_scale += kLogRescale;
    }
  }
  r.p = p;
  r.p_prev = p_prev;
  r.dp = d;
  return r;
}

}  // namespace

void hermite_functions(int nmax, double x, std::span<double> out)
{
  if (nmax < 0 || out.size() < static_cast<std::size_t>(nmax + 1))
    throw InvalidArgument("nmax", "output span too small");

  double log_scale = -0.5 * x * x - 0.25 * std::log(std::numbers::pi);
  double factor = std::exp(log_scale);
  double prev = 0.0;
  double cur = 1.0;
  out[0] = factor;
  for (int k = 0; k < nmax; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * x * cur - std::sqrt(double(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleAbove) {
      cur *= kRescaleFactor;
      prev *= kRescaleFactor;
      log_scale += kLogRescale;
      factor = std::exp(log_scale);
    }
    out[k + 1] = cur * factor;
  }
}

std::vector<double> hermite_functions(int nmax, double x)
{
  std::vector<double> out(static_cast<std::size_t>(nmax + 1));
  hermite_functions(nmax, x, out);
  return out;
}

Quadrature gauss_hermite(int count)
{
  if (count < 1)
    throw InvalidArgument("count", "Gauss-Hermite rule needs at least one node");

  Eigen::VectorXd diag = Eigen::VectorXd::Zero(count);
  Eigen::VectorXd sub(std::max(count - 1, 0));
  for (int k = 1; k < count; ++k)
    sub[k - 1] = std::sqrt(k / 2.0);

  Eigen::VectorXd x(count);
  if (count == 1) {
    x[0] = 0.0;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    x = eig.eigenvalues();
  }

  // Newton polish: p_n' e^{-x^2/2} = sqrt(2n) h_{n-1}.
  for (int j = 0; j < count; ++j) {
    for (int it = 0; it < 3; ++it) {
      const ScaledPair hp = hermite_top_pair(count, x[j]);
      if (hp.below == 0.0)
        break;
      x[j] -= hp.top / (std::sqrt(2.0 * count) * hp.below);
    }
  }
  // Enforce exact symmetry.
  for (int j = 0; j < count / 2; ++j) {
    const double m = 0.5 * (x[count - 1 - j] - x[j]);
    x[j] = -m;
    x[count - 1 - j] = m;
  }
  if (count % 2 == 1)
    x[count / 2] = 0.0;

  // Christoffel-Darboux at a root of h_n: sum_{k<n} h_k^2 = n h_{n-1}^2.
  Eigen::VectorXd w(count);
  for (int j = 0; j < count; ++j) {
    const ScaledPair hp = hermite_top_pair(count, x[j]);
    const double log_below = hp.log_scale + std::log(std::abs(hp.below));
    w[j] = std::exp(-std::log(double(count)) - 2.0 * log_below);
  }
  for (int j = 0; j < count / 2; ++j) {
    const double m = 0.5 * (w[j] + w[count - 1 - j]);
    w[j] = m;
    w[count - 1 - j] = m;
  }

  Quadrature q;
  q.points = x.transpose();
  q.weights = w;
  return q;
}

Quadrature tensor_rule(const Quadrature& axis, int dim)
{
  if (dim < 1 || axis.dim() != 1)
    throw InvalidArgument("dim", "tensor rule needs a 1-D axis rule and dim >= 1");
  const Eigen::Index n = axis.size();
  Eigen::Index total = 1;
  for (int k = 0; k < dim; ++k)
    total *= n;

  Quadrature q;
  q.points.resize(dim, total);
  q.weights.resize(total);
  for (Eigen::Index j = 0; j < total; ++j) {
    Eigen::Index rem = j;
    double w = 1.0;
    for (int k = 0; k < dim; ++k) {
      const Eigen::Index i = rem % n;
      rem /= n;
      q.points(k, j) = axis.points(0, i);
      w *= axis.weights[i];
    }
    q.weights[j] = w;
  }
  return q;
}

Quadrature radial_power_rule(double a, int count)
{
  if (!(a > -1.0))
    throw InvalidArgument("a", "radial power must exceed -1");
  if (count < 1)
    throw InvalidArgument("count", "radial rule needs at least one node");
  const double alpha = 0.5 * (a - 1.0);

  Eigen::VectorXd diag(count);
  Eigen::VectorXd sub(std::max(count - 1, 0));
  for (int k = 0; k < count; ++k)
    diag[k] = 2.0 * k + alpha + 1.0;
  for (int k = 1; k < count; ++k)
    sub[k - 1] = std::sqrt(k * (k + alpha));

  Eigen::VectorXd y(count);
  if (count == 1) {
    y[0] = alpha + 1.0;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    y = eig.eigenvalues();
  }
  for (int j = 0; j < count; ++j) {
    for (int it = 0; it < 4; ++it) {
      const LaguerreEval le = laguerre_top(count, alpha, y[j]);
      if (le.dp == 0.0)
        break;
      const double step = le.p / le.dp;
      const double next = y[j] - step;
      y[j] = next > 0.0 ? next : 0.5 * y[j];
    }
  }

  // Gauss weight for y^alpha e^{-y}: 1 / (b_K p_K'(y_j) p_{K-1}(y_j)); the
  // function weight multiplies by e^{y_j}. Each of +-sqrt(y_j) gets half.
  const double b_count = std::sqrt(count * (count + alpha));
  Quadrature q;
  q.points.resize(1, 2 * count);
  q.weights.resize(2 * count);
  for (int j = 0; j < count; ++j) {
    const LaguerreEval le = laguerre_top(count, alpha, y[j]);
    const double log_prod = 2.0 * le.log_scale + std::log(std::abs(le.dp * le.p_prev)) + std::log(b_count);
    const double w = 0.5 * std::exp(y[j] - log_prod);
    const double r = std::sqrt(y[j]);
    q.points(0, 2 * j) = -r;
    q.points(0, 2 * j + 1) = r;
    q.weights[2 * j] = w;
    q.weights[2 * j + 1] = w;
  }
  return q;
}

Eigen::Index AuditGrid::size() const
{
  Eigen::Index total = 1;
  for (int k = 0; k < dim; ++k)
    total *= static_cast<Eigen::Index>(axis.size());
  return total;
}

Eigen::MatrixXd AuditGrid::points() const
{
  const Eigen::Index n = static_cast<Eigen::Index>(axis.size());
  const Eigen::Index total = size();
  Eigen::MatrixXd pts(dim, total);
  for (Eigen::Index j = 0; j < total; ++j) {
    Eigen::Index rem = j;
    for (int k = 0; k < dim; ++k) {
      pts(k, j) = axis[static_cast<std::size_t>(rem % n)];
      rem /= n;
    }
  }
  return pts;
}

double AuditGrid::cell_volume() const { return std::pow(spacing, dim); }

AuditGrid make_audit_grid(int dim, double half_width, double density)
{
  if (dim < 1 || !(half_width > 0.0) || !(density > 0.0))
    throw InvalidArgument("audit_grid", "dim, half width and density must be positive");
  AuditGrid g;
  g.dim = dim;
  g.spacing = 1.0 / density;
  const long half = static_cast<long>(std::ceil(half_width * density));
  g.half_width = half * g.spacing;
  g.axis.reserve(static_cast<std::size_t>(2 * half + 1));
  for (long i = -half; i <= half; ++i)
    g.axis.push_back(i * g.spacing);
  return g;
}

}  // namespace hoslab
