#include "hoslab/spectral_ops.hpp"

#include "hoslab/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

namespace hoslab {

namespace {

constexpr Eigen::Index kChunk = 4096;
constexpr double kMaxTableEntries = 2e7;

// (-i)^k
Complex minus_i_power(int k)
{
  switch (k & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

Eigen::VectorXcd apply_table_transpose(const Eigen::MatrixXd& table, const Eigen::VectorXcd& c)
{
  Eigen::VectorXcd out(table.cols());
  out.real() = table.transpose() * c.real();
  out.imag() = table.transpose() * c.imag();
  return out;
}

// Quadrature rule plus tabulated basis on it, memoized per (basis, tag).
struct SampledRule
{
  Quadrature rule;
  Eigen::MatrixXd table;
};

using SampledPtr = std::shared_ptr<const SampledRule>;

template <class Make>
SampledPtr memoized_rule(const std::string& key, Make make)
{
  static std::mutex mutex;
  static std::map<std::string, SampledPtr> registry;
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = registry.find(key); it != registry.end())
      return it->second;
  }
  auto built = std::make_shared<const SampledRule>(make());
  std::lock_guard<std::mutex> lock(mutex);
  return registry.emplace(key, built).first->second;
}

SampledPtr gauss_rule_for(const BasisGrid& basis, int per_axis)
{
  return memoized_rule(basis.cache_key() + "/gh" + std::to_string(per_axis), [&] {
    SampledRule r;
    r.rule = basis.rule(per_axis);
    r.table = basis.evaluate(r.rule.points);
    return r;
  });
}

// One-dimensional rule exact for |x|^{2s} times (poly of degree 2N) e^{-x^2}.
SampledPtr radial_rule_for(const BasisGrid& basis, double two_s)
{
  std::ostringstream key;
  key.precision(17);
  key << basis.cache_key() << "/radial" << two_s;
  return memoized_rule(key.str(), [&] {
    SampledRule r;
    r.rule = radial_power_rule(two_s, basis.max_degree() / 2 + 2);
    r.table = basis.evaluate(r.rule.points);
    return r;
  });
}

double weighted_sum(const SampledRule& r, const Eigen::VectorXcd& c, const Eigen::VectorXd& weight)
{
  const Eigen::VectorXcd v = apply_table_transpose(r.table, c);
  return (weight.array() * v.array().abs2()).sum();
}

Eigen::VectorXd japanese_bracket_power(const Eigen::MatrixXd& points, double power)
{
  Eigen::VectorXd out(points.cols());
  for (Eigen::Index j = 0; j < points.cols(); ++j)
    out[j] = std::pow(1.0 + points.col(j).squaredNorm(), 0.5 * power);
  return out;
}

void require_nonnegative(double s, const char* field)
{
  if (!(s >= 0.0) || !std::isfinite(s))
    throw InvalidArgument(field, "must be a finite real >= 0");
}

}  // namespace

std::string to_string(NormKind kind)
{
  switch (kind) {
    case NormKind::harmonic_sobolev: return "harmonic_sobolev";
    case NormKind::classical_sobolev: return "classical_sobolev";
    case NormKind::weighted_x: return "weighted_x";
    case NormKind::fractional_laplacian_L2: return "fractional_laplacian_L2";
    case NormKind::lebesgue_Lr: return "lebesgue_Lr";
    case NormKind::sup_norm: return "sup_norm";
    case NormKind::harmonic_sobolev_sup: return "harmonic_sobolev_sup";
  }
  return "unknown";
}

NormKind norm_kind_from_string(const std::string& name)
{
  for (NormKind k : {NormKind::harmonic_sobolev, NormKind::classical_sobolev, NormKind::weighted_x,
                     NormKind::fractional_laplacian_L2, NormKind::lebesgue_Lr, NormKind::sup_norm,
                     NormKind::harmonic_sobolev_sup})
    if (to_string(k) == name)
      return k;
  throw InvalidArgument("norm.kind", "unknown norm kind '" + name + "'");
}

void NormSpec::validate() const
{
  require_nonnegative(s, "norm.s");
  if (!(r >= 2.0))
    throw InvalidArgument("norm.r", "Lebesgue exponent must be in [2, inf]");
}

SpectralField harmonic_power(const SpectralField& u, double s)
{
  SpectralField out = u;
  const Eigen::VectorXd& lam2 = u.basis().eigenvalues();
  out.coeffs().array() *= lam2.array().pow(0.5 * s).cast<Complex>();
  return out;
}

double harmonic_sobolev_norm(const SpectralField& u, double s)
{
  require_nonnegative(s, "s");
  const Eigen::VectorXd& lam2 = u.basis().eigenvalues();
  return std::sqrt((lam2.array().pow(s) * u.coeffs().array().abs2()).sum());
}

SpectralField propagate_linear(const SpectralField& u, double t)
{
  SpectralField out = u;
  const Eigen::VectorXd& lam2 = u.basis().eigenvalues();
  for (Eigen::Index k = 0; k < lam2.size(); ++k)
    out.coeffs()[k] *= std::polar(1.0, -t * lam2[k]);
  return out;
}

SpectralField fourier_transform(const SpectralField& u)
{
  SpectralField out = u;
  for (std::size_t k = 0; k < u.size(); ++k)
    out.coeffs()[static_cast<Eigen::Index>(k)] *= minus_i_power(u.basis().index(k).order());
  return out;
}

SpectralField inverse_fourier_transform(const SpectralField& u)
{
  SpectralField out = u;
  for (std::size_t k = 0; k < u.size(); ++k)
    out.coeffs()[static_cast<Eigen::Index>(k)] *= std::conj(minus_i_power(u.basis().index(k).order()));
  return out;
}

double weighted_x_L2_norm(const SpectralField& u, double s)
{
  require_nonnegative(s, "s");
  if (s == 0.0)
    return u.l2_norm();
  const BasisGrid& b = u.basis();
  const int per_axis = b.dealiased_points(2) + static_cast<int>(std::ceil(s));
  const SampledPtr r = gauss_rule_for(b, per_axis);
  const Eigen::VectorXd weight =
      r->rule.weights.cwiseProduct(japanese_bracket_power(r->rule.points, 2.0 * s));
  return std::sqrt(weighted_sum(*r, u.coeffs(), weight));
}

double fractional_laplacian_L2_norm(const SpectralField& u, double s)
{
  require_nonnegative(s, "s");
  if (s == 0.0)
    return u.l2_norm();
  const BasisGrid& b = u.basis();
  const SpectralField uhat = fourier_transform(u);

  if (b.dim() == 1) {
    const SampledPtr r = radial_rule_for(b, 2.0 * s);
    return std::sqrt(weighted_sum(*r, uhat.coeffs(), r->rule.weights));
  }
  if (s == 1.0) {
    double total = 0.0;
    for (int a = 0; a < b.dim(); ++a)
      total += std::pow(derivative_coefficients(u, a).l2_norm(), 2);
    return std::sqrt(total);
  }
  // d > 1, general s: |xi|^{2s} is only Hoelder at the origin, so
  // oversample the tensor rule.
  const SampledPtr r = gauss_rule_for(b, b.dealiased_points(2) + 32);
  Eigen::VectorXd weight(r->rule.size());
  for (Eigen::Index j = 0; j < weight.size(); ++j)
    weight[j] = r->rule.weights[j] * std::pow(r->rule.points.col(j).squaredNorm(), s);
  return std::sqrt(weighted_sum(*r, uhat.coeffs(), weight));
}

double classical_sobolev_norm(const SpectralField& u, double s)
{
  const double l2 = u.l2_norm();
  const double frac = fractional_laplacian_L2_norm(u, s);
  return std::sqrt(l2 * l2 + frac * frac);
}

Eigen::VectorXcd synthesize_at(const SpectralField& u, const Eigen::MatrixXd& points)
{
  Eigen::VectorXcd out(points.cols());
  for (Eigen::Index start = 0; start < points.cols(); start += kChunk) {
    const Eigen::Index len = std::min(kChunk, points.cols() - start);
    const Eigen::MatrixXd table = u.basis().evaluate(points.middleCols(start, len));
    out.segment(start, len) = apply_table_transpose(table, u.coeffs());
  }
  return out;
}

AuditSampler::AuditSampler(BasisPtr basis, double density)
    : basis_(std::move(basis))
    , density_(density)
    , grid_(basis_->audit_grid(density))
{
  if (static_cast<double>(grid_.size()) * static_cast<double>(basis_->size()) <= kMaxTableEntries)
    table_ = basis_->evaluate(grid_.points());
}

Eigen::VectorXcd AuditSampler::values(const SpectralField& u) const
{
  if (!u.basis().same_as(*basis_))
    throw BasisMismatch("field does not belong to the sampler's basis");
  if (table_.size() > 0)
    return apply_table_transpose(table_, u.coeffs());
  return synthesize_at(u, grid_.points());
}

double AuditSampler::sup(const SpectralField& u) const
{
  return std::sqrt(values(u).cwiseAbs2().maxCoeff());
}

double AuditSampler::lebesgue(const SpectralField& u, double r) const
{
  if (std::isinf(r))
    return sup(u);
  const Eigen::VectorXcd v = values(u);
  return std::pow(grid_.cell_volume() * v.cwiseAbs().array().pow(r).sum(), 1.0 / r);
}

double spatial_norm(const SpectralField& u, const NormSpec& norm)
{
  norm.validate();
  switch (norm.kind) {
    case NormKind::lebesgue_Lr:
    case NormKind::sup_norm:
    case NormKind::harmonic_sobolev_sup: {
      const AuditSampler sampler(u.basis_ptr());
      return spatial_norm(u, norm, sampler);
    }
    default:
      break;
  }
  switch (norm.kind) {
    case NormKind::harmonic_sobolev: return harmonic_sobolev_norm(u, norm.s);
    case NormKind::classical_sobolev: return classical_sobolev_norm(u, norm.s);
    case NormKind::weighted_x: return weighted_x_L2_norm(u, norm.s);
    case NormKind::fractional_laplacian_L2: return fractional_laplacian_L2_norm(u, norm.s);
    default: break;
  }
  throw Error("unreachable norm kind");
}

double spatial_norm(const SpectralField& u, const NormSpec& norm, const AuditSampler& sampler)
{
  norm.validate();
  switch (norm.kind) {
    case NormKind::lebesgue_Lr:
      return sampler.lebesgue(norm.s > 0.0 ? harmonic_power(u, norm.s) : u, norm.r);
    case NormKind::sup_norm:
      return sampler.sup(u);
    case NormKind::harmonic_sobolev_sup:
      return sampler.sup(norm.s > 0.0 ? harmonic_power(u, norm.s) : u);
    default:
      return spatial_norm(u, norm);
  }
}

double spacetime_norm(const SpectralField& u0, double q, const NormSpec& norm, double T, int time_nodes,
                      double audit_density)
{
  if (!(q >= 1.0))
    throw InvalidArgument("q", "time exponent must be in [1, inf]");
  if (!(T > 0.0))
    throw InvalidArgument("T", "must be positive");
  if (time_nodes < 16)
    throw InvalidArgument("time_nodes", "at least 16 time nodes are required");
  norm.validate();

  std::unique_ptr<AuditSampler> sampler;
  if (norm.kind == NormKind::lebesgue_Lr || norm.kind == NormKind::sup_norm ||
      norm.kind == NormKind::harmonic_sobolev_sup)
    sampler = std::make_unique<AuditSampler>(u0.basis_ptr(), audit_density);

  const double h = 2.0 * T / (time_nodes - 1);
  double acc = 0.0;
  for (int k = 0; k < time_nodes; ++k) {
    const double t = -T + k * h;
    const SpectralField ut = propagate_linear(u0, t);
    const double f = sampler ? spatial_norm(ut, norm, *sampler) : spatial_norm(ut, norm);
    if (std::isinf(q)) {
      acc = std::max(acc, f);
    } else {
      const double w = (k == 0 || k == time_nodes - 1) ? 0.5 * h : h;
      acc += w * std::pow(f, q);
    }
  }
  return std::isinf(q) ? acc : std::pow(acc, 1.0 / q);
}

std::string to_string(SmoothingVariant v)
{
  return v == SmoothingVariant::sqrtH ? "sqrtH" : "fractional_grad";
}

SmoothingVariant smoothing_variant_from_string(const std::string& name)
{
  if (name == "sqrtH")
    return SmoothingVariant::sqrtH;
  if (name == "fractional_grad")
    return SmoothingVariant::fractional_grad;
  throw InvalidArgument("variant", "expected sqrtH or fractional_grad, got '" + name + "'");
}

SmoothingEvaluator::SmoothingEvaluator(BasisPtr basis, double eps, SmoothingVariant variant, int projection_degree)
    : basis_(std::move(basis))
    , eps_(eps)
    , variant_(variant)
{
  if (!(eps > 0.0 && eps < 0.5))
    throw InvalidArgument("eps", "must lie in (0, 1/2)");
  const BasisGrid& in = *basis_;
  const int d = in.dim();
  const Eigen::Index n_in = static_cast<Eigen::Index>(in.size());

  // G maps input coefficients to coefficients on the output basis.
  BasisPtr out;
  Eigen::MatrixXd g;
  if (variant == SmoothingVariant::sqrtH) {
    projection_degree_ = in.max_degree();
    out = basis_;
    g = in.eigenvalues().array().pow(0.5 * (0.5 - 2.0 * eps)).matrix().asDiagonal();
  } else {
    projection_degree_ = projection_degree > 0 ? projection_degree : 2 * in.max_degree();
    if (projection_degree_ < in.max_degree())
      throw InvalidArgument("projection_degree", "must be >= the input degree");
    out = cached_basis(d, projection_degree_);
    const double a = 0.5 * d - 2.0 * eps;
    // <h_m, |grad|^a h_n> = i^{|m|-|n|} int |xi|^a h_m h_n dxi, real by parity.
    Quadrature rule;
    if (d == 1) {
      rule = radial_power_rule(a, (projection_degree_ + in.max_degree()) / 4 + 2);
    } else {
      rule = tensor_rule(gauss_hermite(out->dealiased_points(2) + 32), d);
      for (Eigen::Index j = 0; j < rule.size(); ++j)
        rule.weights[j] *= std::pow(rule.points.col(j).norm(), a);
    }
    const Eigen::MatrixXd t_out = out->evaluate(rule.points);
    const Eigen::MatrixXd t_in = in.evaluate(rule.points);
    g = t_out * rule.weights.asDiagonal() * t_in.transpose();
    for (Eigen::Index m = 0; m < g.rows(); ++m)
      for (Eigen::Index n = 0; n < n_in; ++n) {
        const int diff = out->index(static_cast<std::size_t>(m)).order() - in.index(static_cast<std::size_t>(n)).order();
        if (diff % 2 != 0)
          g(m, n) = 0.0;
        else if ((diff / 2) % 2 != 0)
          g(m, n) = -g(m, n);
      }
  }

  const SampledPtr r = gauss_rule_for(*out, out->dealiased_points(2));
  Eigen::VectorXd row_scale = japanese_bracket_power(r->rule.points, -(0.5 - eps));
  row_scale.array() *= r->rule.weights.array().sqrt();
  weighted_ = row_scale.asDiagonal() * (r->table.transpose() * g);

  shells_.assign(static_cast<std::size_t>(in.max_degree() + 1), {});
  for (Eigen::Index n = 0; n < n_in; ++n)
    shells_[static_cast<std::size_t>(in.index(static_cast<std::size_t>(n)).order())].push_back(n);
}

double SmoothingEvaluator::denominator(const SpectralField& u0) const
{
  if (variant_ == SmoothingVariant::sqrtH)
    return u0.l2_norm();
  return harmonic_sobolev_norm(u0, 0.5 * (basis_->dim() - 1));
}

double SmoothingEvaluator::operator()(const SpectralField& u0, int time_nodes) const
{
  if (!u0.basis().same_as(*basis_))
    throw BasisMismatch("smoothing evaluator built for another basis");
  const double den = denominator(u0);
  if (!(den > 0.0))
    throw InvalidArgument("u0", "zero input field");

  double integral = 0.0;
  if (time_nodes == 0) {
    for (const auto& shell : shells_) {
      if (shell.empty())
        continue;
      Eigen::VectorXd acc_re = Eigen::VectorXd::Zero(weighted_.rows());
      Eigen::VectorXd acc_im = Eigen::VectorXd::Zero(weighted_.rows());
      for (Eigen::Index n : shell) {
        acc_re += weighted_.col(n) * u0.coeffs()[n].real();
        acc_im += weighted_.col(n) * u0.coeffs()[n].imag();
      }
      integral += acc_re.squaredNorm() + acc_im.squaredNorm();
    }
    integral *= 4.0 * std::numbers::pi;
  } else {
    if (time_nodes < 16)
      throw InvalidArgument("time_nodes", "at least 16 time nodes are required");
    const double span = 4.0 * std::numbers::pi;
    const double h = span / (time_nodes - 1);
    for (int k = 0; k < time_nodes; ++k) {
      const double t = -2.0 * std::numbers::pi + k * h;
      // e^{+itH}
      const SpectralField ut = propagate_linear(u0, -t);
      const Eigen::VectorXd re = weighted_ * ut.coeffs().real();
      const Eigen::VectorXd im = weighted_ * ut.coeffs().imag();
      const double w = (k == 0 || k == time_nodes - 1) ? 0.5 * h : h;
      integral += w * (re.squaredNorm() + im.squaredNorm());
    }
  }
  return std::sqrt(integral) / den;
}

double smoothing_functional(const SpectralField& u0, double eps, SmoothingVariant variant, int time_nodes)
{
  const SmoothingEvaluator eval(u0.basis_ptr(), eps, variant);
  return eval(u0, time_nodes);
}

void write_norm_csv(std::ostream& os, const std::vector<NormRecord>& rows)
{
  os << "norm_kind,s,r,q,T,N,value\n";
  os.precision(17);
  for (const NormRecord& r : rows)
    os << to_string(r.norm.kind) << ',' << r.norm.s << ',' << r.norm.r << ',' << r.q << ',' << r.T << ','
       << r.N << ',' << r.value << '\n';
}

}  // namespace hoslab
