#pragma once

#include "hoslab/quadrature.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace hoslab {

/// Multi-index n = (n_1, ..., n_d) labelling the tensor Hermite function
/// h_n(x) = prod_i h_{n_i}(x_i).
class MultiIndex
{
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> components);

  int dim() const { return static_cast<int>(components_.size()); }
  int order() const { return order_; }  // |n|
  int operator[](int axis) const { return components_[static_cast<std::size_t>(axis)]; }
  const std::vector<int>& components() const { return components_; }

  auto operator<=>(const MultiIndex&) const = default;

 private:
  std::vector<int> components_;
  int order_ = 0;
};

/// All multi-indices of dimension `dim` with |n| <= max_degree, in graded
/// lexicographic order.
std::vector<MultiIndex> enumerate_total_degree(int dim, int max_degree);

/// Number of multi-indices with |n| <= max_degree in dimension dim.
std::size_t total_degree_count(int dim, int max_degree);

/// Eigenvalue lambda_n^2 = 2|n| + d of H = -Delta + |x|^2 on h_n.
double eigenvalue(const MultiIndex& n, int dim);

/// Tabulated basis functions at a fixed point set, with the weights that
/// turn the point set into a quadrature. Synthesis is table^T c, analysis is
/// table (w .* values).
struct NodalTransform
{
  Eigen::MatrixXd table;     // basis size x point count
  Eigen::VectorXd weights;   // empty when the points are not a quadrature

  Eigen::VectorXcd synthesize(const Eigen::VectorXcd& coeffs) const;
  Eigen::VectorXcd analyze(const Eigen::VectorXcd& values) const;
};

inline constexpr std::size_t kDefaultCoefficientBudget = 200000;

/// Hermite eigenbasis of the harmonic oscillator truncated at total degree
/// max_degree, with a tensor Gauss-Hermite quadrature of quad_per_axis nodes
/// per axis. Immutable after construction; share through shared_ptr.
class BasisGrid
{
 public:
  static std::shared_ptr<const BasisGrid> build(int dim, int max_degree, int quad_per_axis,
                                                std::size_t coefficient_budget = kDefaultCoefficientBudget);

  int dim() const { return dim_; }
  int max_degree() const { return max_degree_; }
  int quad_per_axis() const { return quad_per_axis_; }
  std::size_t size() const { return indices_.size(); }

  const std::vector<MultiIndex>& indices() const { return indices_; }
  const MultiIndex& index(std::size_t k) const { return indices_[k]; }
  // Throws InvalidArgument for indices outside the truncation.
  std::size_t position(const MultiIndex& n) const;

  const Quadrature& quadrature() const { return quadrature_; }
  const Eigen::MatrixXd& eval_table() const { return transform_.table; }
  const NodalTransform& transform() const { return transform_; }

  /// lambda_n^2 for the k-th enumerated function.
  double eigenvalue(std::size_t k) const { return eigenvalues_[static_cast<Eigen::Index>(k)]; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

  /// Basis functions at arbitrary points (dim x count): size x count table.
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& points) const;
  NodalTransform transform_for(const Quadrature& q) const;

  /// Tensor Gauss-Hermite rule with `per_axis` nodes per axis.
  Quadrature rule(int per_axis) const;

  /// Quadrature size per axis that keeps products of `factor` basis
  /// functions well resolved (the de-aliasing grid for degree-p products).
  int dealiased_points(int factor) const;

  /// Default uniform grid for sup-type norms: L = sqrt(2N + d) + 4.
  AuditGrid audit_grid(double density = 16.0) const;

  /// Max |G - I| over the Gram matrix of the stored quadrature.
  double gram_deviation() const;

  bool same_as(const BasisGrid& other) const;

  /// Cache key "d<dim>_N<max_degree>_q<quad>".
  std::string cache_key() const;

  // Used by the cache loader; validates shapes.
  static std::shared_ptr<const BasisGrid> from_parts(int dim, int max_degree, int quad_per_axis,
                                                     Quadrature quadrature, Eigen::MatrixXd table);

 private:
  BasisGrid() = default;
  void finish_indexing();

  int dim_ = 1;
  int max_degree_ = 0;
  int quad_per_axis_ = 0;
  std::vector<MultiIndex> indices_;
  std::map<MultiIndex, std::size_t> lookup_;
  Eigen::VectorXd eigenvalues_;
  Quadrature quadrature_;
  NodalTransform transform_;
};

using BasisPtr = std::shared_ptr<const BasisGrid>;

/// Convenience: build with quad_per_axis = 2 (max_degree + 1) unless given.
BasisPtr make_basis(int dim, int max_degree, int quad_per_axis = 0);

/// Process-wide memoized make_basis; safe to call from several threads.
BasisPtr cached_basis(int dim, int max_degree, int quad_per_axis = 0);

}  // namespace hoslab
