#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "cuq/error.hpp"
#include "cuq/experimental_design.hpp"
#include "cuq/normal.hpp"
#include "cuq/pce_core.hpp"
#include "cuq/polynomial_basis.hpp"

namespace cuq {
namespace {

std::vector<std::string> labels(int d) {
  std::vector<std::string> out;
  for (int i = 1; i <= d; ++i) out.push_back("x" + std::to_string(i));
  return out;
}

Eigen::MatrixXd normal_points(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd u(n, d);
  for (auto& v : u.reshaped()) v = normal(gen);
  return u;
}

Eigen::VectorXd evaluate(const PceModel& model, const Eigen::MatrixXd& u) {
  Eigen::VectorXd y(u.rows());
  for (Eigen::Index j = 0; j < u.rows(); ++j) y[j] = model(u.row(j).transpose());
  return y;
}

PceModel model_with(const BasisSet& basis, std::initializer_list<std::pair<MultiIndex, double>> terms) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(basis.size());
  for (const auto& [idx, c] : terms) a[basis.find(idx)] = c;
  return PceModel(basis, a);
}

TEST(LeastSquaresTest, ExactRecoveryOfModelClass) {
  const BasisSet basis = enumerate_basis(4, 3);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  Eigen::VectorXd truth(basis.size());
  for (auto& v : truth) v = uni(gen);
  const Eigen::MatrixXd u = normal_points(3 * basis.size(), 4, 12);
  const PceModel fit = fit_least_squares(basis, u, evaluate(PceModel(basis, truth), u));
  EXPECT_LT((fit.coefficients() - truth).lpNorm<Eigen::Infinity>(), 1e-10);
  EXPECT_EQ(fit.diagnostics().method, FitMethod::LeastSquares);
  EXPECT_LT(fit.diagnostics().residual_norm, 1e-9);
  EXPECT_GE(fit.diagnostics().condition, 1.0);
  EXPECT_FALSE(fit.diagnostics().ill_conditioned);
}

TEST(LeastSquaresTest, ConstantOutput) {
  const BasisSet basis = enumerate_basis(3, 2);
  const Eigen::MatrixXd u = normal_points(40, 3, 2);
  const PceModel fit = fit_least_squares(basis, u, Eigen::VectorXd::Constant(40, 7.0));
  EXPECT_NEAR(fit.coefficients()[0], 7.0, 1e-12);
  EXPECT_LT(fit.coefficients().tail(basis.size() - 1).lpNorm<Eigen::Infinity>(), 1e-12);
}

// u^2 = He_2 + 1 = sqrt(2) psi_2 + psi_0.
TEST(LeastSquaresTest, SquareOfFirstVariableOnTensorGrid) {
  const BasisSet basis = enumerate_basis(2, 2);
  const Design grid = tensor_design(2, 3);
  const Eigen::VectorXd y = grid.points.col(0).array().square();
  const PceModel fit = fit_least_squares(basis, grid.points, y);
  EXPECT_NEAR(fit.coefficients()[0], 1.0, 1e-12);
  EXPECT_NEAR(fit.coefficients()[basis.find({2, 0})], std::sqrt(2.0), 1e-12);
  for (Eigen::Index k = 0; k < basis.size(); ++k) {
    if (k != 0 && k != basis.find({2, 0})) EXPECT_NEAR(fit.coefficients()[k], 0.0, 1e-12);
  }
}

TEST(LeastSquaresTest, Errors) {
  const BasisSet basis = enumerate_basis(6, 2);
  EXPECT_THROW(fit_least_squares(basis, normal_points(27, 6, 1), Eigen::VectorXd::Zero(27)), Underdetermined);
  EXPECT_THROW(fit_least_squares(basis, normal_points(40, 5, 1), Eigen::VectorXd::Zero(40)), DimensionMismatch);
  EXPECT_THROW(fit_least_squares(basis, normal_points(40, 6, 1), Eigen::VectorXd::Zero(39)), DimensionMismatch);
}

TEST(LeastSquaresTest, FlagsRankDeficientDesign) {
  const BasisSet basis = enumerate_basis(2, 2);
  Eigen::MatrixXd u = normal_points(20, 2, 3);
  u.col(1) = u.col(0);
  const PceModel fit = fit_least_squares(basis, u, u.col(0));
  EXPECT_TRUE(fit.diagnostics().ill_conditioned);
  EXPECT_GT(fit.diagnostics().condition, kIllConditionedThreshold);
}

TEST(ProjectionTest, ConstantOutput) {
  const BasisSet basis = enumerate_basis(3, 2);
  const Design grid = smolyak_design(3, 1);
  const PceModel fit = fit_projection(basis, grid, Eigen::VectorXd::Constant(grid.size(), -2.5));
  EXPECT_NEAR(fit.coefficients()[0], -2.5, 1e-12);
  EXPECT_LT(fit.coefficients().tail(basis.size() - 1).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_EQ(fit.diagnostics().method, FitMethod::Projection);
}

TEST(ProjectionTest, RecoversEachBasisFunction) {
  for (int p = 1; p <= 3; ++p) {
    const BasisSet basis = enumerate_basis(3, p);
    const Design grid = tensor_design(3, p + 1);
    const Eigen::MatrixXd psi = build_design_matrix(basis, grid.points);
    for (Eigen::Index k = 0; k < basis.size(); ++k) {
      const PceModel fit = fit_projection(basis, grid, psi.col(k));
      EXPECT_LT((fit.coefficients() - Eigen::VectorXd::Unit(basis.size(), k)).lpNorm<Eigen::Infinity>(), 1e-10)
          << "p=" << p << " k=" << k;
    }
  }
}

TEST(ProjectionTest, SmolyakLevelOneCannotSeePairInteractions) {
  const BasisSet basis = enumerate_basis(6, 2);
  const Design grid = smolyak_design(6, 1);
  ASSERT_EQ(grid.size(), 13);
  const Eigen::VectorXd y = grid.points.col(0).cwiseProduct(grid.points.col(1));
  EXPECT_EQ(y.lpNorm<Eigen::Infinity>(), 0.0);
  const PceModel fit = fit_projection(basis, grid, y);
  EXPECT_EQ(fit.coefficients()[basis.find({1, 1, 0, 0, 0, 0})], 0.0);
}

TEST(ProjectionTest, Errors) {
  const BasisSet basis = enumerate_basis(2, 2);
  const Design lhs = lhs_design(20, 2, 1);
  EXPECT_THROW(fit_projection(basis, lhs, Eigen::VectorXd::Zero(20)), MissingWeights);
  const Design grid = tensor_design(2, 3);
  EXPECT_THROW(fit_projection(basis, grid, Eigen::VectorXd::Zero(8)), DimensionMismatch);
  EXPECT_THROW(fit_projection(enumerate_basis(3, 2), grid, Eigen::VectorXd::Zero(9)), DimensionMismatch);
}

TEST(EvalTest, ConstantAndLinearity) {
  const BasisSet basis = enumerate_basis(3, 2);
  const PceModel c = model_with(basis, {{{0, 0, 0}, 4.5}});
  EXPECT_EQ(pce_eval(c, Eigen::Vector3d::Zero()), 4.5);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXd a(basis.size()), b(basis.size());
  for (auto& v : a) v = uni(gen);
  for (auto& v : b) v = uni(gen);
  const Eigen::Vector3d u(0.3, -1.2, 2.0);
  EXPECT_NEAR(pce_eval(PceModel(basis, a + b), u), pce_eval(PceModel(basis, a), u) + pce_eval(PceModel(basis, b), u),
              1e-12);
  EXPECT_THROW(PceModel(basis, Eigen::VectorXd::Zero(3)), DimensionMismatch);
  EXPECT_THROW(pce_eval(c, Eigen::Vector2d::Zero()), DimensionMismatch);
}

TEST(EvalTest, AgreesWithTrainingSamplesWithinResidual) {
  const BasisSet basis = enumerate_basis(2, 2);
  const Eigen::MatrixXd u = normal_points(60, 2, 9);
  const Eigen::VectorXd y = (u.col(0).array() * 0.8).sin() + u.col(1).array().exp() * 0.1;
  const PceModel fit = fit_least_squares(basis, u, y);
  EXPECT_NEAR((evaluate(fit, u) - y).norm(), fit.diagnostics().residual_norm, 1e-10);
}

TEST(MomentsTest, Examples) {
  const BasisSet basis = enumerate_basis(2, 1);
  const Moments a = moments(model_with(basis, {{{0, 0}, 5.0}}));
  EXPECT_EQ(a.mean, 5.0);
  EXPECT_EQ(a.variance, 0.0);
  EXPECT_EQ(a.std, 0.0);
  const Moments b = moments(PceModel(basis, Eigen::Vector3d(0.0, 3.0, 4.0)));
  EXPECT_EQ(b.mean, 0.0);
  EXPECT_EQ(b.variance, 25.0);
  EXPECT_EQ(b.std, 5.0);
}

TEST(MomentsTest, MatchMonteCarloWithinFourStandardErrors) {
  const BasisSet basis = enumerate_basis(3, 2);
  Eigen::VectorXd a(basis.size());
  a << 1.0, 0.8, -0.5, 0.3, 0.4, 0.2, -0.1, 0.15, 0.05, -0.25;
  const PceModel model(basis, a);
  const Moments m = moments(model);
  const std::size_t n = 1000000;
  std::mt19937_64 gen(21);
  std::normal_distribution<double> normal;
  std::vector<double> ys(n);
  Eigen::Vector3d u;
  for (auto& y : ys) {
    for (auto& v : u) v = normal(gen);
    y = model(u);
  }
  double mean = 0.0;
  for (double y : ys) mean += y;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m4 = 0.0;
  for (double y : ys) {
    const double c = (y - mean) * (y - mean);
    m2 += c;
    m4 += c * c;
  }
  const double var = m2 / static_cast<double>(n - 1);
  m4 /= static_cast<double>(n);
  const double se_mean = std::sqrt(var / static_cast<double>(n));
  const double se_var = std::sqrt((m4 - var * var) / static_cast<double>(n));
  EXPECT_NEAR(mean, m.mean, 4.0 * se_mean);
  EXPECT_NEAR(var, m.variance, 4.0 * se_var);
}

TEST(SobolTest, AdditiveModel) {
  const BasisSet basis = enumerate_basis(3, 2);
  const PceModel model = model_with(basis, {{{0, 0, 0}, 2.0}, {{1, 0, 0}, 1.0}, {{0, 2, 0}, 2.0}, {{0, 0, 1}, 0.5}});
  const auto names = labels(3);
  const SobolReport r = sobol_indices(model, names);
  for (const auto& e : r.entries) EXPECT_NEAR(e.first_order, e.total_order, 1e-15);
  EXPECT_NEAR(r.first_order_sum(), 1.0, 1e-12);
  EXPECT_NEAR(r.at("x1").first_order, 1.0 / 5.25, 1e-12);
  EXPECT_NEAR(r.at("x2").first_order, 4.0 / 5.25, 1e-12);
  EXPECT_NEAR(r.total_variance, 5.25, 1e-12);
  EXPECT_EQ(r.interaction_share, 0.0);
}

TEST(SobolTest, PureInteraction) {
  const BasisSet basis = enumerate_basis(2, 2);
  const auto names = labels(2);
  const SobolReport r = sobol_indices(model_with(basis, {{{1, 1}, 3.0}}), names);
  EXPECT_EQ(r.at("x1").first_order, 0.0);
  EXPECT_EQ(r.at("x2").first_order, 0.0);
  EXPECT_EQ(r.at("x1").total_order, 1.0);
  EXPECT_EQ(r.at("x2").total_order, 1.0);
  EXPECT_EQ(r.interaction_share, 1.0);
}

TEST(SobolTest, ConsistencyIdentities) {
  const BasisSet basis = enumerate_basis(4, 3);
  std::mt19937_64 gen(33);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd a(basis.size());
    for (auto& v : a) v = normal(gen);
    // x4 never appears.
    for (Eigen::Index k = 0; k < basis.size(); ++k) {
      if (basis[k][3] != 0) a[k] = 0.0;
    }
    const PceModel model(basis, a);
    const auto names = labels(4);
    const SobolReport r = sobol_indices(model, names);
    EXPECT_NEAR(r.first_order_sum() + r.interaction_share, 1.0, 1e-12);
    EXPECT_LE(r.first_order_sum(), 1.0 + 1e-9);
    for (const auto& e : r.entries) EXPECT_LE(e.first_order, e.total_order + 1e-12);
    EXPECT_EQ(r.at("x4").first_order, 0.0);
    EXPECT_EQ(r.at("x4").total_order, 0.0);
    // Complement: S_Ti = 1 - (share of terms free of x_i).
    for (int i = 0; i < 4; ++i) {
      double without = 0.0;
      for (Eigen::Index k = 1; k < basis.size(); ++k) {
        if (basis[k][static_cast<std::size_t>(i)] == 0) without += a[k] * a[k];
      }
      EXPECT_NEAR(r.entries[static_cast<std::size_t>(i)].total_order, 1.0 - without / r.total_variance, 1e-12);
    }
  }
}

TEST(SobolTest, ScaleEquivariance) {
  const BasisSet basis = enumerate_basis(3, 2);
  const Design grid = tensor_design(3, 3);
  Eigen::VectorXd y(grid.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const auto u = grid.points.row(j);
    y[j] = 1.0 + u[0] + 0.5 * u[1] * u[2] + 0.3 * u[2] * u[2];
  }
  const auto names = labels(3);
  const PceModel base = fit_projection(basis, grid, y);
  const SobolReport rb = sobol_indices(base, names);
  for (double c : {-3.0, 0.01, 250.0}) {
    const PceModel scaled = fit_projection(basis, grid, c * y);
    EXPECT_LT((scaled.coefficients() - c * base.coefficients()).lpNorm<Eigen::Infinity>(), 1e-12 * std::fabs(c) * 10);
    EXPECT_NEAR(moments(scaled).mean, c * moments(base).mean, 1e-12 * std::fabs(c) * 10);
    EXPECT_NEAR(moments(scaled).std, std::fabs(c) * moments(base).std, 1e-12 * std::fabs(c) * 10);
    const SobolReport rs = sobol_indices(scaled, names);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_NEAR(rs.entries[i].first_order, rb.entries[i].first_order, 1e-12);
      EXPECT_NEAR(rs.entries[i].total_order, rb.entries[i].total_order, 1e-12);
    }
  }
}

TEST(SobolTest, Errors) {
  const BasisSet basis = enumerate_basis(2, 2);
  const auto names = labels(2);
  EXPECT_THROW(sobol_indices(model_with(basis, {{{0, 0}, 1.0}}), names), ZeroVariance);
  const auto three = labels(3);
  EXPECT_THROW(sobol_indices(model_with(basis, {{{1, 0}, 1.0}}), three), DimensionMismatch);
  const SobolReport r = sobol_indices(model_with(basis, {{{1, 0}, 1.0}}), names);
  EXPECT_THROW(r.at("x9"), InvalidParameter);
}

TEST(CdfTest, ConstantModelIsAStep) {
  const BasisSet basis = enumerate_basis(2, 2);
  const CdfTable cdf = empirical_cdf(model_with(basis, {{{0, 0}, 3.0}}), 100, 1);
  ASSERT_EQ(cdf.values.size(), 100u);
  for (double v : cdf.values) EXPECT_EQ(v, 3.0);
  EXPECT_EQ(cdf.probabilities.front(), 0.01);
  EXPECT_EQ(cdf.probabilities.back(), 1.0);
}

TEST(CdfTest, LinearModelMatchesStandardNormal) {
  const BasisSet basis = enumerate_basis(3, 2);
  const std::size_t n = 20000;
  const CdfTable cdf = empirical_cdf(model_with(basis, {{{1, 0, 0}, 1.0}}), n, 42);
  ASSERT_TRUE(std::is_sorted(cdf.values.begin(), cdf.values.end()));
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = normal_cdf(cdf.values[i]);
    ks = std::max({ks, std::fabs(f - static_cast<double>(i + 1) / n), std::fabs(f - static_cast<double>(i) / n)});
  }
  EXPECT_LT(ks, 1.5 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(cdf.quantile(0.5), 0.0, 0.05);
}

TEST(CdfTest, DeterministicGivenSeed) {
  const BasisSet basis = enumerate_basis(2, 2);
  const PceModel model = model_with(basis, {{{1, 0}, 1.0}, {{1, 1}, 0.5}});
  EXPECT_EQ(empirical_cdf(model, 500, 3).values, empirical_cdf(model, 500, 3).values);
  EXPECT_NE(empirical_cdf(model, 500, 3).values, empirical_cdf(model, 500, 4).values);
  EXPECT_THROW(empirical_cdf(model, 0, 1), InvalidParameter);
}

TEST(SerializationTest, RoundTripIsBitExact) {
  const BasisSet basis = enumerate_basis(4, 3);
  std::mt19937_64 gen(8);
  std::normal_distribution<double> normal;
  Eigen::VectorXd a(basis.size());
  for (auto& v : a) v = normal(gen) * std::pow(10.0, normal(gen) * 5);
  const PceModel model(basis, a);
  const std::string text = serialize(model);
  const PceModel back = deserialize_pce(text);
  EXPECT_EQ(back.basis(), model.basis());
  for (Eigen::Index k = 0; k < a.size(); ++k) EXPECT_EQ(back.coefficients()[k], a[k]);
  EXPECT_EQ(serialize(back), text);
}

TEST(SerializationTest, RejectsMalformedText) {
  EXPECT_THROW(deserialize_pce(""), InvalidParameter);
  EXPECT_THROW(deserialize_pce("not-a-pce\n"), InvalidParameter);
  const BasisSet basis = enumerate_basis(2, 1);
  std::string text = serialize(PceModel(basis, Eigen::Vector3d(1, 2, 3)));
  EXPECT_THROW(deserialize_pce(text.substr(0, text.size() - 4)), InvalidParameter);
}

}  // namespace
}  // namespace cuq
