#include "cuq/experimental_design.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "cuq/error.hpp"
#include "cuq/normal.hpp"
#include "cuq/random.hpp"

namespace cuq {

std::string_view to_string(DesignKind kind) {
  switch (kind) {
    case DesignKind::LHS: return "lhs";
    case DesignKind::TensorQuadrature: return "tensor";
    case DesignKind::Smolyak: return "smolyak";
  }
  return "unknown";
}

Design lhs_design(Eigen::Index n, Eigen::Index dimension, std::uint64_t seed) {
  if (n < 1) throw InvalidParameter("lhs_design: N must be >= 1");
  if (dimension < 1) throw InvalidParameter("lhs_design: dimension must be >= 1");
  Rng rng(seed);
  Design design;
  design.kind = DesignKind::LHS;
  design.points.resize(n, dimension);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index d = 0; d < dimension; ++d) {
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    for (std::size_t i = perm.size() - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.index(i + 1)]);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const double p = (static_cast<double>(perm[static_cast<std::size_t>(j)]) + rng.uniform()) * inv_n;
      design.points(j, d) = normal_quantile(p);
    }
  }
  return design;
}

QuadratureRule gauss_hermite_1d(int n_points) {
  if (n_points < 1 || n_points > kMaxGaussHermitePoints) {
    throw CapExceeded("gauss_hermite_1d: n must be in [1, " + std::to_string(kMaxGaussHermitePoints) +
                      "], got " + std::to_string(n_points));
  }
  QuadratureRule rule{Eigen::VectorXd::Zero(n_points), Eigen::VectorXd::Ones(n_points)};
  if (n_points == 1) return rule;

  // Jacobi matrix of the monic He recurrence: zero diagonal, sqrt(k) off-diagonal.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n_points);
  Eigen::VectorXd sub(n_points - 1);
  for (int k = 1; k < n_points; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error("gauss_hermite_1d: eigen-decomposition failed");

  const Eigen::VectorXd& nodes = solver.eigenvalues();
  Eigen::VectorXd weights = solver.eigenvectors().row(0).transpose().array().square();

  // Enforce exact symmetry; the middle node of an odd rule is exactly zero.
  for (int i = 0; i < n_points / 2; ++i) {
    const int j = n_points - 1 - i;
    const double x = 0.5 * (nodes[j] - nodes[i]);
    const double w = 0.5 * (weights[i] + weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (n_points % 2 == 1) {
    rule.nodes[n_points / 2] = 0.0;
    rule.weights[n_points / 2] = weights[n_points / 2];
  }
  rule.weights /= rule.weights.sum();
  return rule;
}

std::size_t tensor_design_size(Eigen::Index dimension, int points_per_axis, std::size_t cap) {
  if (dimension < 1) throw InvalidParameter("tensor_design: dimension must be >= 1");
  if (points_per_axis < 1) throw InvalidParameter("tensor_design: points_per_axis must be >= 1");
  std::size_t count = 1;
  for (Eigen::Index d = 0; d < dimension; ++d) {
    count *= static_cast<std::size_t>(points_per_axis);
    if (count > cap) {
      throw CapExceeded("tensor_design: " + std::to_string(points_per_axis) + "^" +
                        std::to_string(dimension) + " points exceeds cap " + std::to_string(cap));
    }
  }
  return count;
}

Design tensor_design(Eigen::Index dimension, int points_per_axis, std::size_t cap) {
  const auto count = static_cast<Eigen::Index>(tensor_design_size(dimension, points_per_axis, cap));
  const QuadratureRule rule = gauss_hermite_1d(points_per_axis);
  Design design;
  design.kind = DesignKind::TensorQuadrature;
  design.points.resize(count, dimension);
  Eigen::VectorXd weights(count);
  std::vector<int> odometer(static_cast<std::size_t>(dimension), 0);
  for (Eigen::Index j = 0; j < count; ++j) {
    double w = 1.0;
    for (Eigen::Index d = 0; d < dimension; ++d) {
      const int i = odometer[static_cast<std::size_t>(d)];
      design.points(j, d) = rule.nodes[i];
      w *= rule.weights[i];
    }
    weights[j] = w;
    for (Eigen::Index d = dimension - 1; d >= 0; --d) {
      if (++odometer[static_cast<std::size_t>(d)] < points_per_axis) break;
      odometer[static_cast<std::size_t>(d)] = 0;
    }
  }
  design.weights = std::move(weights);
  return design;
}

int smolyak_rule_size(int level) {
  switch (level) {
    case 0: return 1;
    case 1: return 3;
    case 2: return 7;
    default:
      throw InvalidParameter("smolyak: unsupported level " + std::to_string(level) + " (0, 1, 2)");
  }
}

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Visits every multi-level l in N^D with |l|_1 <= max_sum.
template <typename Fn>
void for_each_level(std::vector<int>& level, std::size_t pos, int remaining, Fn&& fn) {
  if (pos == level.size()) {
    fn(level);
    return;
  }
  for (int v = 0; v <= remaining; ++v) {
    level[pos] = v;
    for_each_level(level, pos + 1, remaining - v, fn);
  }
  level[pos] = 0;
}

}  // namespace

Design smolyak_design(Eigen::Index dimension, int level) {
  if (dimension < 1) throw InvalidParameter("smolyak_design: dimension must be >= 1");
  smolyak_rule_size(level);

  std::vector<QuadratureRule> rules;
  for (int l = 0; l <= level; ++l) rules.push_back(gauss_hermite_1d(smolyak_rule_size(l)));

  const int dim = static_cast<int>(dimension);
  // Points merged on a 1e-12 lattice; insertion order is kept for determinism.
  std::map<std::vector<long long>, std::size_t> lookup;
  std::vector<std::vector<double>> coords;
  std::vector<double> weights;

  std::vector<int> multi(static_cast<std::size_t>(dim), 0);
  for_each_level(multi, 0, level, [&](const std::vector<int>& ml) {
    const int sum = std::accumulate(ml.begin(), ml.end(), 0);
    if (sum < level - dim + 1) return;
    const double coeff = ((level - sum) % 2 == 0 ? 1.0 : -1.0) * binomial(dim - 1, level - sum);
    if (coeff == 0.0) return;

    std::vector<int> odometer(static_cast<std::size_t>(dim), 0);
    while (true) {
      std::vector<double> x(static_cast<std::size_t>(dim));
      std::vector<long long> key(static_cast<std::size_t>(dim));
      double w = coeff;
      for (int d = 0; d < dim; ++d) {
        const auto& rule = rules[static_cast<std::size_t>(ml[static_cast<std::size_t>(d)])];
        const int i = odometer[static_cast<std::size_t>(d)];
        x[static_cast<std::size_t>(d)] = rule.nodes[i];
        key[static_cast<std::size_t>(d)] = std::llround(rule.nodes[i] * 1e12);
        w *= rule.weights[i];
      }
      const auto [it, inserted] = lookup.try_emplace(key, coords.size());
      if (inserted) {
        coords.push_back(std::move(x));
        weights.push_back(w);
      } else {
        weights[it->second] += w;
      }
      int d = dim - 1;
      for (; d >= 0; --d) {
        const auto size = rules[static_cast<std::size_t>(ml[static_cast<std::size_t>(d)])].nodes.size();
        if (++odometer[static_cast<std::size_t>(d)] < size) break;
        odometer[static_cast<std::size_t>(d)] = 0;
      }
      if (d < 0) break;
    }
  });

  Design design;
  design.kind = DesignKind::Smolyak;
  const auto n = static_cast<Eigen::Index>(coords.size());
  design.points.resize(n, dimension);
  Eigen::VectorXd w(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& row = coords[static_cast<std::size_t>(j)];
    for (int d = 0; d < dim; ++d) design.points(j, d) = row[static_cast<std::size_t>(d)];
    w[j] = weights[static_cast<std::size_t>(j)];
  }
  design.weights = std::move(w);
  return design;
}

}  // namespace cuq
