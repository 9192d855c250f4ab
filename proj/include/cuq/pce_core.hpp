#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cuq/experimental_design.hpp"
#include "cuq/polynomial_basis.hpp"

namespace cuq {

enum class FitMethod { LeastSquares, Projection };

std::string_view to_string(FitMethod method);

struct FitDiagnostics {
  FitMethod method = FitMethod::LeastSquares;
  /// ||Psi alpha - y||_2 over the training points.
  double residual_norm = 0.0;
  /// |R_00| / |R_kk| of the pivoted QR (least squares); 1 for projection.
  double condition = 1.0;
  bool ill_conditioned = false;
};

/// Coefficients of an orthonormal Hermite expansion over a BasisSet.
class PceModel {
 public:
  PceModel(BasisSet basis, Eigen::VectorXd coefficients, FitDiagnostics diagnostics = {});

  const BasisSet& basis() const { return basis_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }
  const FitDiagnostics& diagnostics() const { return diagnostics_; }

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& u) const;

 private:
  BasisSet basis_;
  Eigen::VectorXd coefficients_;
  FitDiagnostics diagnostics_;
};

inline constexpr double kIllConditionedThreshold = 1e10;

/// Ordinary least squares via column-pivoted Householder QR.
/// Throws Underdetermined when N < P+1.
PceModel fit_least_squares(const BasisSet& basis, const Eigen::MatrixXd& points, const Eigen::VectorXd& y);

/// Discrete projection alpha_k = sum_j w_j y_j psi_k(u_j). Throws MissingWeights.
PceModel fit_projection(const BasisSet& basis, const Design& design, const Eigen::VectorXd& y);

double pce_eval(const PceModel& model, const Eigen::Ref<const Eigen::VectorXd>& u);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double std = 0.0;
};

Moments moments(const PceModel& model);

struct SobolEntry {
  std::string label;
  double first_order = 0.0;
  double total_order = 0.0;
};

struct SobolReport {
  std::vector<SobolEntry> entries;
  double total_variance = 0.0;
  /// Variance share of terms that involve two or more variables.
  double interaction_share = 0.0;

  double first_order_sum() const;
  const SobolEntry& at(std::string_view label) const;
};

/// Throws ZeroVariance when the expansion has no variance.
SobolReport sobol_indices(const PceModel& model, std::span<const std::string> labels);

struct CdfTable {
  std::vector<double> values;         // ascending
  std::vector<double> probabilities;  // i / n, i = 1..n

  double quantile(double p) const;
};

/// Sorted PCE evaluations at n standard-normal draws.
CdfTable empirical_cdf(const PceModel& model, std::size_t n_samples, std::uint64_t seed);

/// Text form: header, dimension, order, one line per term (multi-index then
/// coefficient at 17 significant digits).
std::string serialize(const PceModel& model);
PceModel deserialize_pce(std::string_view text);

}  // namespace cuq
