#include "hoslab/hermite_basis.hpp"

#include "hoslab/error.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <tuple>

namespace hoslab {

MultiIndex::MultiIndex(std::vector<int> components)
    : components_(std::move(components))
{
  for (int c : components_) {
    if (c < 0)
      throw InvalidArgument("multi_index", "components must be non-negative");
    order_ += c;
  }
}

namespace {

void compositions(int dim, int total, std::vector<int>& prefix, std::vector<MultiIndex>& out)
{
  if (static_cast<int>(prefix.size()) == dim - 1) {
    prefix.push_back(total);
    out.emplace_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int first = 0; first <= total; ++first) {
    prefix.push_back(first);
    compositions(dim, total - first, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<MultiIndex> enumerate_total_degree(int dim, int max_degree)
{
  if (dim < 1)
    throw InvalidArgument("dim", "must be >= 1");
  if (max_degree < 0)
    throw InvalidArgument("max_degree", "must be >= 0");
  std::vector<MultiIndex> out;
  out.reserve(total_degree_count(dim, max_degree));
  std::vector<int> prefix;
  for (int k = 0; k <= max_degree; ++k)
    compositions(dim, k, prefix, out);
  return out;
}

std::size_t total_degree_count(int dim, int max_degree)
{
  // binomial(max_degree + dim, dim)
  double c = 1.0;
  for (int i = 1; i <= dim; ++i)
    c = c * (max_degree + i) / i;
  return static_cast<std::size_t>(std::llround(c));
}

double eigenvalue(const MultiIndex& n, int dim)
{
  return 2.0 * n.order() + dim;
}

Eigen::VectorXcd NodalTransform::synthesize(const Eigen::VectorXcd& coeffs) const
{
  if (coeffs.size() != table.rows())
    throw BasisMismatch("coefficient vector does not match the tabulated basis");
  Eigen::VectorXcd out(table.cols());
  out.real() = table.transpose() * coeffs.real();
  out.imag() = table.transpose() * coeffs.imag();
  return out;
}

Eigen::VectorXcd NodalTransform::analyze(const Eigen::VectorXcd& values) const
{
  if (values.size() != table.cols())
    throw InvalidArgument("values", "length does not match the quadrature");
  if (weights.size() != table.cols())
    throw Error("analysis requested on a point set without quadrature weights");
  const Eigen::VectorXd wr = weights.cwiseProduct(values.real());
  const Eigen::VectorXd wi = weights.cwiseProduct(values.imag());
  Eigen::VectorXcd out(table.rows());
  out.real() = table * wr;
  out.imag() = table * wi;
  return out;
}

std::shared_ptr<const BasisGrid> BasisGrid::build(int dim, int max_degree, int quad_per_axis,
                                                  std::size_t coefficient_budget)
{
  if (dim < 1 || dim > 3)
    throw InvalidArgument("dim", "supported dimensions are 1, 2, 3");
  if (max_degree < 0)
    throw InvalidArgument("max_degree", "must be >= 0");
  if (quad_per_axis < 2 * (max_degree + 1))
    throw InvalidArgument("quad_per_axis", "must be at least 2 (max_degree + 1) = " +
                                               std::to_string(2 * (max_degree + 1)));
  if (total_degree_count(dim, max_degree) > coefficient_budget)
    throw InvalidArgument("max_degree", "enumeration of " + std::to_string(total_degree_count(dim, max_degree)) +
                                            " coefficients exceeds the budget of " +
                                            std::to_string(coefficient_budget));
  double nodes = 1.0;
  for (int k = 0; k < dim; ++k)
    nodes *= quad_per_axis;
  if (nodes * static_cast<double>(total_degree_count(dim, max_degree)) > 4e8)
    throw InvalidArgument("quad_per_axis", "evaluation table would exceed 4e8 entries");

  auto grid = std::shared_ptr<BasisGrid>(new BasisGrid());
  grid->dim_ = dim;
  grid->max_degree_ = max_degree;
  grid->quad_per_axis_ = quad_per_axis;
  grid->finish_indexing();
  grid->quadrature_ = tensor_rule(gauss_hermite(quad_per_axis), dim);
  grid->transform_.table = grid->evaluate(grid->quadrature_.points);
  grid->transform_.weights = grid->quadrature_.weights;
  return grid;
}

std::shared_ptr<const BasisGrid> BasisGrid::from_parts(int dim, int max_degree, int quad_per_axis,
                                                       Quadrature quadrature, Eigen::MatrixXd table)
{
  auto grid = std::shared_ptr<BasisGrid>(new BasisGrid());
  grid->dim_ = dim;
  grid->max_degree_ = max_degree;
  grid->quad_per_axis_ = quad_per_axis;
  grid->finish_indexing();
  if (quadrature.dim() != dim || table.rows() != static_cast<Eigen::Index>(grid->size()) ||
      table.cols() != quadrature.size() || quadrature.weights.size() != quadrature.size())
    throw Error("basis parts have inconsistent shapes");
  grid->quadrature_ = std::move(quadrature);
  grid->transform_.table = std::move(table);
  grid->transform_.weights = grid->quadrature_.weights;
  return grid;
}

void BasisGrid::finish_indexing()
{
  indices_ = enumerate_total_degree(dim_, max_degree_);
  lookup_.clear();
  for (std::size_t k = 0; k < indices_.size(); ++k)
    lookup_.emplace(indices_[k], k);
  eigenvalues_.resize(static_cast<Eigen::Index>(indices_.size()));
  for (std::size_t k = 0; k < indices_.size(); ++k)
    eigenvalues_[static_cast<Eigen::Index>(k)] = hoslab::eigenvalue(indices_[k], dim_);
}

std::size_t BasisGrid::position(const MultiIndex& n) const
{
  const auto it = lookup_.find(n);
  if (it == lookup_.end())
    throw InvalidArgument("multi_index", "outside the truncation |n| <= " + std::to_string(max_degree_));
  return it->second;
}

Eigen::MatrixXd BasisGrid::evaluate(const Eigen::MatrixXd& points) const
{
  if (points.rows() != dim_)
    throw InvalidArgument("points", "row count must equal the basis dimension");
  const Eigen::Index count = points.cols();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(size()), count);
  std::vector<std::vector<double>> axis(static_cast<std::size_t>(dim_),
                                        std::vector<double>(static_cast<std::size_t>(max_degree_ + 1)));
  for (Eigen::Index j = 0; j < count; ++j) {
    for (int a = 0; a < dim_; ++a)
      hermite_functions(max_degree_, points(a, j), axis[static_cast<std::size_t>(a)]);
    for (std::size_t k = 0; k < indices_.size(); ++k) {
      double v = 1.0;
      for (int a = 0; a < dim_; ++a)
        v *= axis[static_cast<std::size_t>(a)][static_cast<std::size_t>(indices_[k][a])];
      out(static_cast<Eigen::Index>(k), j) = v;
    }
  }
  return out;
}

NodalTransform BasisGrid::transform_for(const Quadrature& q) const
{
  NodalTransform t;
  t.table = evaluate(q.points);
  t.weights = q.weights;
  return t;
}

Quadrature BasisGrid::rule(int per_axis) const
{
  return tensor_rule(gauss_hermite(per_axis), dim_);
}

int BasisGrid::dealiased_points(int factor) const
{
  // A product of `factor` degree-N functions is a polynomial of degree
  // factor*N times exp(-factor |x|^2 / 2); resolve the polynomial exactly and
  // leave a margin for the non-polynomial Gaussian excess.
  const int exact = (factor * max_degree_) / 2 + 1;
  return std::max(quad_per_axis_, exact + 16 + 2 * factor);
}

AuditGrid BasisGrid::audit_grid(double density) const
{
  return make_audit_grid(dim_, std::sqrt(2.0 * max_degree_ + dim_) + 4.0, density);
}

double BasisGrid::gram_deviation() const
{
  const Eigen::MatrixXd& t = transform_.table;
  const Eigen::MatrixXd gram = t * quadrature_.weights.asDiagonal() * t.transpose();
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

bool BasisGrid::same_as(const BasisGrid& other) const
{
  return this == &other ||
         (dim_ == other.dim_ && max_degree_ == other.max_degree_ && quad_per_axis_ == other.quad_per_axis_);
}

std::string BasisGrid::cache_key() const
{
  std::ostringstream os;
  os << "d" << dim_ << "_N" << max_degree_ << "_q" << quad_per_axis_;
  return os.str();
}

BasisPtr make_basis(int dim, int max_degree, int quad_per_axis)
{
  if (quad_per_axis <= 0)
    quad_per_axis = 2 * (max_degree + 1);
  return BasisGrid::build(dim, max_degree, quad_per_axis);
}

BasisPtr cached_basis(int dim, int max_degree, int quad_per_axis)
{
  if (quad_per_axis <= 0)
    quad_per_axis = 2 * (max_degree + 1);
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, BasisPtr> registry;
  const auto key = std::make_tuple(dim, max_degree, quad_per_axis);
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = registry.find(key); it != registry.end())
      return it->second;
  }
  BasisPtr built = BasisGrid::build(dim, max_degree, quad_per_axis);
  std::lock_guard<std::mutex> lock(mutex);
  return registry.emplace(key, built).first->second;
}

}  // namespace hoslab
