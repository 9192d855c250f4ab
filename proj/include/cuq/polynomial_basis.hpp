#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cuq/error.hpp"

namespace cuq {

/// Highest univariate order the basis supports; 1/sqrt(j!) is still representable.
inline constexpr int kMaxHermiteOrder = 30;

/// Probabilists' Hermite polynomial He_j(u), three-term recurrence.
template <typename Scalar>
Scalar hermite(int order, Scalar u) {
  if (order == 0) return Scalar(1);
  Scalar prev(1);
  Scalar cur = u;
  for (int j = 2; j <= order; ++j) {
    Scalar next = u * cur - Scalar(j - 1) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Orthonormal values He_j(u)/sqrt(j!) for j = 0..max_order.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> orthonormal_hermite_table(int max_order, Scalar u) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(max_order + 1);
  out[0] = Scalar(1);
  if (max_order == 0) return out;
  out[1] = u;
  // Normalized recurrence: psi_j = (u psi_{j-1} - sqrt(j-1) psi_{j-2}) / sqrt(j)
  for (int j = 2; j <= max_order; ++j) {
    using std::sqrt;
    out[j] = (u * out[j - 1] - sqrt(Scalar(j - 1)) * out[j - 2]) / sqrt(Scalar(j));
  }
  return out;
}

using MultiIndex = std::vector<int>;

/// Total-degree multi-index set in graded lexicographic order: by total
/// degree, then lexicographically descending in the leading coordinates, so
/// D=2, p=2 gives (0,0) (1,0) (0,1) (2,0) (1,1) (0,2).
class BasisSet {
 public:
  BasisSet(int dimension, int max_order, std::vector<MultiIndex> indices);

  int dimension() const { return dimension_; }
  int max_order() const { return max_order_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(indices_.size()); }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  const MultiIndex& operator[](Eigen::Index k) const { return indices_[static_cast<std::size_t>(k)]; }

  /// Position of a multi-index, or -1 when absent.
  Eigen::Index find(const MultiIndex& index) const;

  bool operator==(const BasisSet&) const = default;

 private:
  int dimension_;
  int max_order_;
  std::vector<MultiIndex> indices_;
};

/// C(D + p, p); throws CapExceeded above `cap`.
std::size_t basis_size(int dimension, int max_order, std::size_t cap = 1'000'000);

BasisSet enumerate_basis(int dimension, int max_order, std::size_t cap = 1'000'000);

/// psi_k(u) = prod_d He_{p_d}(u_d)/sqrt(p_d!) for every index in the basis.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> eval_basis(
    const BasisSet& basis, const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  if (u.size() != basis.dimension()) {
    throw DimensionMismatch("eval_basis: point has " + std::to_string(u.size()) +
                            " coordinates, basis dimension is " + std::to_string(basis.dimension()));
  }
  const int dim = basis.dimension();
  const int order = basis.max_order();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> table(order + 1, dim);
  for (int d = 0; d < dim; ++d) table.col(d) = orthonormal_hermite_table<Scalar>(order, u[d]);

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(basis.size());
  for (Eigen::Index k = 0; k < basis.size(); ++k) {
    const MultiIndex& idx = basis[k];
    Scalar value(1);
    for (int d = 0; d < dim; ++d) {
      if (idx[static_cast<std::size_t>(d)] != 0) value *= table(idx[static_cast<std::size_t>(d)], d);
    }
    out[k] = value;
  }
  return out;
}

/// Row j holds eval_basis at points.row(j).
Eigen::MatrixXd build_design_matrix(const BasisSet& basis, const Eigen::MatrixXd& points);

}  // namespace cuq
