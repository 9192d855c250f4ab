#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string_view>

namespace cuq {

enum class DesignKind { LHS, TensorQuadrature, Smolyak };

std::string_view to_string(DesignKind kind);

/// N x D standard-normal points; quadrature designs carry weights summing to 1.
struct Design {
  Eigen::MatrixXd points;
  std::optional<Eigen::VectorXd> weights;
  DesignKind kind = DesignKind::LHS;

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dimension() const { return points.cols(); }
};

/// Latin hypercube in standard-normal space, u = Phi^-1((perm(j) + r) / N).
Design lhs_design(Eigen::Index n, Eigen::Index dimension, std::uint64_t seed);

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

inline constexpr int kMaxGaussHermitePoints = 30;

/// Probabilists' Gauss-Hermite rule (weight = standard normal density),
/// computed by Golub-Welsch. Nodes ascending, exactly symmetric.
QuadratureRule gauss_hermite_1d(int n_points);

/// Number of points in a full tensor grid; throws CapExceeded above `cap`.
std::size_t tensor_design_size(Eigen::Index dimension, int points_per_axis, std::size_t cap = 1'000'000);

/// Full tensor product of gauss_hermite_1d(points_per_axis); the last axis varies fastest.
Design tensor_design(Eigen::Index dimension, int points_per_axis, std::size_t cap = 1'000'000);

/// Points in the 1D rule used at Smolyak level l: 1, 3, 7.
int smolyak_rule_size(int level);

/// Smolyak combination of Gauss-Hermite rules, level in {0, 1, 2}.
Design smolyak_design(Eigen::Index dimension, int level);

}  // namespace cuq
