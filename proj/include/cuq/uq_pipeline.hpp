#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cuq/experimental_design.hpp"
#include "cuq/gp_surrogate.hpp"
#include "cuq/input_model.hpp"
#include "cuq/pce_core.hpp"

namespace cuq {

/// Label of the auxiliary standard-normal variable carrying surrogate error.
inline constexpr const char* kModelUncertaintyLabel = "model_uncertainty";

enum class DesignMethod { Lhs, Tensor, Smolyak };

std::string_view to_string(DesignMethod method);
std::optional<DesignMethod> parse_design_method(std::string_view text);

struct DesignConfig {
  DesignMethod method = DesignMethod::Lhs;
  Eigen::Index n = 80;       // lhs only
  std::uint64_t seed = 0;    // lhs only
  int level = 1;             // smolyak only
  int points_per_axis = 0;   // tensor only; 0 means order + 1
};

struct PceConfig {
  int order = 2;
  DesignConfig design;
};

/// Builds the design for a D-dimensional expansion of the given order.
Design make_design(const DesignConfig& config, Eigen::Index dimension, int order);

/// Number of points make_design would produce, without building it.
Eigen::Index design_point_count(const DesignConfig& config, Eigen::Index dimension, int order);

struct UqProblem {
  InputSpace inputs;
  std::shared_ptr<const ProbabilisticSurrogate> surrogate;
  PceConfig pce;

  /// n inputs plus the model-uncertainty coordinate.
  Eigen::Index dimension() const { return inputs.size() + 1; }
  /// Input names followed by kModelUncertaintyLabel.
  std::vector<std::string> labels() const;
};

/// y_j = M(x_j) + u_Y,j S(x_j) with x_j = u_to_x(first n coordinates of row j).
Eigen::VectorXd coupled_sample_outputs(const UqProblem& problem, const Eigen::MatrixXd& design_points);

struct McsResult {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  CdfTable cdf;
};

/// Direct Monte Carlo over (X, U_Y) with native sampling of every marginal.
McsResult mcs_oracle(const UqProblem& problem, std::size_t n_samples, std::uint64_t seed);

struct McsComparison {
  double oracle_mean = 0.0;
  double oracle_std = 0.0;
  double mean_relative_error = 0.0;
  double std_relative_error = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

struct UqResult {
  PceModel pce;
  DesignKind design_kind = DesignKind::LHS;
  Eigen::Index design_points = 0;
  Moments moments;
  SobolReport sobol;
  std::optional<McsComparison> mcs;
  std::string surrogate_description;
  DesignConfig design_config;
};

/// Design -> coupled outputs -> fit (projection for quadrature, least squares
/// for LHS) -> moments -> Sobol' indices. Stage failures raise StageError.
UqResult run_uq(const UqProblem& problem);

McsComparison compare_with_oracle(const UqResult& result, const McsResult& oracle);

using ModelFunction = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// Box mean +- width*std per input, clipped to what the marginal can produce.
std::pair<Eigen::VectorXd, Eigen::VectorXd> training_box(const InputSpace& inputs, double width);

/// Seeded LHS over training_box.
Eigen::MatrixXd box_lhs(const InputSpace& inputs, Eigen::Index m, std::uint64_t seed, double width = 4.0);

struct GpTrainingPlan {
  Eigen::Index points = 100;
  std::uint64_t seed = 0;
  double box_width = 4.0;
  GpConfig gp;
};

/// Samples the true model on a box LHS and trains a GP on it.
GpModel train_gp_on_model(const ModelFunction& model, const InputSpace& inputs, const GpTrainingPlan& plan);

struct StudyRow {
  Eigen::Index training_points = 0;
  std::optional<UqResult> result;
  std::string error;
};

/// Trains one GP per size and runs the pipeline; per-size failures are recorded.
std::vector<StudyRow> training_size_study(const ModelFunction& true_model, const std::vector<Eigen::Index>& sizes,
                                          const UqProblem& problem_template, const GpTrainingPlan& plan);

// ---------------------------------------------------------------------------
// Example models

/// Yield margin of a shaft, inputs in SI (Pa, m, m, N, N m), result in MPa.
double shaft_eval(double yield_strength, double diameter, double length, double force, double torque);
double shaft_model(const Eigen::Ref<const Eigen::VectorXd>& x);
/// Shaft marginals in SI units, canonical order S_y, d, l, F, T.
std::vector<DistributionSpec> shaft_inputs();

/// Smooth closed-form stand-in for the thin-plate top-edge temperature (K).
/// Inputs: conductivity, convection coefficient, emissivity, ambient temperature, height.
double plate_synthetic_model(const Eigen::Ref<const Eigen::VectorXd>& x);
std::vector<DistributionSpec> plate_inputs();

}  // namespace cuq
