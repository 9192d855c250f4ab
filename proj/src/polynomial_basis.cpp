#include "cuq/polynomial_basis.hpp"

#include <algorithm>
#include <limits>

namespace cuq {

BasisSet::BasisSet(int dimension, int max_order, std::vector<MultiIndex> indices)
    : dimension_(dimension), max_order_(max_order), indices_(std::move(indices)) {}

Eigen::Index BasisSet::find(const MultiIndex& index) const {
  const auto it = std::find(indices_.begin(), indices_.end(), index);
  return it == indices_.end() ? -1 : static_cast<Eigen::Index>(it - indices_.begin());
}

std::size_t basis_size(int dimension, int max_order, std::size_t cap) {
  if (dimension < 1) throw InvalidParameter("basis dimension must be >= 1");
  if (max_order < 0) throw InvalidParameter("basis order must be >= 0");
  if (max_order > kMaxHermiteOrder) {
    throw CapExceeded("basis order " + std::to_string(max_order) + " exceeds " +
                      std::to_string(kMaxHermiteOrder));
  }
  // C(D+p, p) built incrementally; each partial product is itself a binomial.
  std::size_t count = 1;
  for (int i = 1; i <= max_order; ++i) {
    const auto factor = static_cast<std::size_t>(dimension + i);
    if (count > std::numeric_limits<std::size_t>::max() / factor) {
      throw CapExceeded("basis size overflows");
    }
    count = count * factor / static_cast<std::size_t>(i);
    if (count > cap) break;
  }
  if (count > cap) {
    throw CapExceeded("basis size for D=" + std::to_string(dimension) + ", p=" +
                      std::to_string(max_order) + " exceeds cap " + std::to_string(cap));
  }
  return count;
}

namespace {

// All compositions of `remaining` into positions [pos, D), leading coordinate descending.
void compositions(int pos, int remaining, MultiIndex& current, std::vector<MultiIndex>& out) {
  const int dim = static_cast<int>(current.size());
  if (pos == dim - 1) {
    current[static_cast<std::size_t>(pos)] = remaining;
    out.push_back(current);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    current[static_cast<std::size_t>(pos)] = v;
    compositions(pos + 1, remaining - v, current, out);
  }
  current[static_cast<std::size_t>(pos)] = 0;
}

}  // namespace

BasisSet enumerate_basis(int dimension, int max_order, std::size_t cap) {
  const std::size_t count = basis_size(dimension, max_order, cap);
  std::vector<MultiIndex> indices;
  indices.reserve(count);
  MultiIndex current(static_cast<std::size_t>(dimension), 0);
  for (int degree = 0; degree <= max_order; ++degree) compositions(0, degree, current, indices);
  return BasisSet(dimension, max_order, std::move(indices));
}

Eigen::MatrixXd build_design_matrix(const BasisSet& basis, const Eigen::MatrixXd& points) {
  if (points.cols() != basis.dimension()) {
    throw DimensionMismatch("build_design_matrix: points have " + std::to_string(points.cols()) +
                            " columns, basis dimension is " + std::to_string(basis.dimension()));
  }
  Eigen::MatrixXd psi(points.rows(), basis.size());
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    psi.row(j) = eval_basis(basis, points.row(j).transpose()).transpose();
  }
  return psi;
}

}  // namespace cuq
