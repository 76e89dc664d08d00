#include "hoslab/field.hpp"

#include "hoslab/error.hpp"

#include <cmath>

namespace hoslab {

SpectralField::SpectralField(BasisPtr basis)
    : basis_(std::move(basis))
{
  if (!basis_)
    throw InvalidArgument("basis", "null basis");
  coeffs_ = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis_->size()));
}

SpectralField::SpectralField(BasisPtr basis, Eigen::VectorXcd coeffs)
    : basis_(std::move(basis))
    , coeffs_(std::move(coeffs))
{
  if (!basis_)
    throw InvalidArgument("basis", "null basis");
  if (coeffs_.size() != static_cast<Eigen::Index>(basis_->size()))
    throw BasisMismatch("coefficient count " + std::to_string(coeffs_.size()) + " != basis size " +
                        std::to_string(basis_->size()));
}

SpectralField SpectralField::unit(BasisPtr basis, std::size_t k)
{
  SpectralField u(std::move(basis));
  if (k >= u.size())
    throw InvalidArgument("k", "index outside the basis");
  u.coeffs_[static_cast<Eigen::Index>(k)] = 1.0;
  return u;
}

bool SpectralField::all_finite() const
{
  return coeffs_.allFinite();
}

void SpectralField::check_same_basis(const SpectralField& other) const
{
  if (!basis_ || !other.basis_ || !basis_->same_as(*other.basis_))
    throw BasisMismatch("fields live on different bases");
}

SpectralField& SpectralField::operator+=(const SpectralField& other)
{
  check_same_basis(other);
  coeffs_ += other.coeffs_;
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other)
{
  check_same_basis(other);
  coeffs_ -= other.coeffs_;
  return *this;
}

SpectralField& SpectralField::operator*=(Complex a)
{
  coeffs_ *= a;
  return *this;
}

Eigen::VectorXcd synthesize(const SpectralField& field)
{
  return field.basis().transform().synthesize(field.coeffs());
}

SpectralField analyze(const Eigen::VectorXcd& values, const BasisPtr& basis)
{
  if (!basis)
    throw InvalidArgument("basis", "null basis");
  return SpectralField(basis, basis->transform().analyze(values));
}

double out_of_span_energy(const Eigen::VectorXcd& values, const BasisGrid& basis)
{
  const double total = (basis.quadrature().weights.array() * values.array().abs2()).sum();
  const double in_span = basis.transform().analyze(values).squaredNorm();
  return std::max(0.0, total - in_span);
}

SpectralField rebase(const SpectralField& field, const BasisPtr& target)
{
  if (target->dim() != field.basis().dim())
    throw BasisMismatch("rebase across dimensions");
  SpectralField out(target);
  const BasisGrid& src = field.basis();
  for (std::size_t k = 0; k < src.size(); ++k) {
    const MultiIndex& n = src.index(k);
    if (n.order() <= target->max_degree())
      out.coeffs()[static_cast<Eigen::Index>(target->position(n))] = field[k];
  }
  return out;
}

namespace {

// Shared ladder structure: out += lower * c at n - e_axis and upper * c at
// n + e_axis.
template <class Lower, class Upper>
SpectralField ladder(const SpectralField& field, int axis, Lower lower, Upper upper)
{
  const BasisGrid& src = field.basis();
  if (axis < 0 || axis >= src.dim())
    throw InvalidArgument("axis", "outside the basis dimension");
  const BasisPtr target = cached_basis(src.dim(), src.max_degree() + 1,
                                       std::max(src.quad_per_axis(), 2 * (src.max_degree() + 2)));
  SpectralField out(target);
  for (std::size_t k = 0; k < src.size(); ++k) {
    const Complex c = field[k];
    if (c == Complex(0.0))
      continue;
    std::vector<int> comp = src.index(k).components();
    const int na = comp[static_cast<std::size_t>(axis)];
    if (na > 0) {
      comp[static_cast<std::size_t>(axis)] = na - 1;
      out.coeffs()[static_cast<Eigen::Index>(target->position(MultiIndex(comp)))] += lower(na) * c;
    }
    comp[static_cast<std::size_t>(axis)] = na + 1;
    out.coeffs()[static_cast<Eigen::Index>(target->position(MultiIndex(comp)))] += upper(na) * c;
  }
  return out;
}

}  // namespace

SpectralField derivative_coefficients(const SpectralField& field, int axis)
{
  return ladder(
      field, axis, [](int n) { return std::sqrt(n / 2.0); }, [](int n) { return -std::sqrt((n + 1) / 2.0); });
}

SpectralField multiply_by_x(const SpectralField& field, int axis)
{
  return ladder(
      field, axis, [](int n) { return std::sqrt(n / 2.0); }, [](int n) { return std::sqrt((n + 1) / 2.0); });
}

}  // namespace hoslab
