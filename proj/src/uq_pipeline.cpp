#include "cuq/uq_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cuq/error.hpp"
#include "cuq/normal.hpp"
#include "cuq/random.hpp"

namespace cuq {

std::string_view to_string(DesignMethod method) {
  switch (method) {
    case DesignMethod::Lhs: return "lhs";
    case DesignMethod::Tensor: return "tensor";
    case DesignMethod::Smolyak: return "smolyak";
  }
  return "unknown";
}

std::optional<DesignMethod> parse_design_method(std::string_view text) {
  if (text == "lhs") return DesignMethod::Lhs;
  if (text == "tensor") return DesignMethod::Tensor;
  if (text == "smolyak") return DesignMethod::Smolyak;
  return std::nullopt;
}

namespace {

int axis_points(const DesignConfig& config, int order) {
  return config.points_per_axis > 0 ? config.points_per_axis : order + 1;
}

}  // namespace

Design make_design(const DesignConfig& config, Eigen::Index dimension, int order) {
  switch (config.method) {
    case DesignMethod::Lhs: return lhs_design(config.n, dimension, config.seed);
    case DesignMethod::Tensor: return tensor_design(dimension, axis_points(config, order));
    case DesignMethod::Smolyak: return smolyak_design(dimension, config.level);
  }
  throw InvalidParameter("unknown design method");
}

Eigen::Index design_point_count(const DesignConfig& config, Eigen::Index dimension, int order) {
  switch (config.method) {
    case DesignMethod::Lhs: return config.n;
    case DesignMethod::Tensor:
      return static_cast<Eigen::Index>(tensor_design_size(dimension, axis_points(config, order)));
    case DesignMethod::Smolyak: return smolyak_design(dimension, config.level).size();
  }
  throw InvalidParameter("unknown design method");
}

std::vector<std::string> UqProblem::labels() const {
  auto names = inputs.names();
  names.emplace_back(kModelUncertaintyLabel);
  return names;
}

Eigen::VectorXd coupled_sample_outputs(const UqProblem& problem, const Eigen::MatrixXd& design_points) {
  const Eigen::Index n = problem.inputs.size();
  if (design_points.cols() != n + 1) {
    throw DimensionMismatch("coupled_sample_outputs: design has " + std::to_string(design_points.cols()) +
                            " columns, expected " + std::to_string(n + 1));
  }
  if (!problem.surrogate) throw InvalidParameter("coupled_sample_outputs: no surrogate");
  Eigen::VectorXd y(design_points.rows());
  for (Eigen::Index j = 0; j < design_points.rows(); ++j) {
    const Eigen::VectorXd x = problem.inputs.u_to_x(design_points.row(j).head(n).transpose());
    const Prediction p = problem.surrogate->predict(x);
    y[j] = p.mean + design_points(j, n) * p.std;
  }
  return y;
}

McsResult mcs_oracle(const UqProblem& problem, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 2) throw InvalidParameter("mcs_oracle: need at least two samples");
  if (!problem.surrogate) throw InvalidParameter("mcs_oracle: no surrogate");
  Rng rng(seed);
  const Eigen::Index n = problem.inputs.size();
  McsResult out;
  out.n_samples = n_samples;
  out.seed = seed;
  out.cdf.values.resize(n_samples);
  Eigen::VectorXd x(n);
  for (auto& v : out.cdf.values) {
    for (Eigen::Index i = 0; i < n; ++i) x[i] = problem.inputs[i].sample(rng);
    const double u_y = rng.normal();
    const Prediction p = problem.surrogate->predict(x);
    v = p.mean + u_y * p.std;
  }
  // Two-pass moments for stability.
  double sum = 0.0;
  for (double v : out.cdf.values) sum += v;
  out.mean = sum / static_cast<double>(n_samples);
  double ss = 0.0;
  for (double v : out.cdf.values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(n_samples - 1));

  std::sort(out.cdf.values.begin(), out.cdf.values.end());
  out.cdf.probabilities.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    out.cdf.probabilities[i] = static_cast<double>(i + 1) / static_cast<double>(n_samples);
  }
  return out;
}

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

UqResult run_uq(const UqProblem& problem) {
  const Eigen::Index dim = problem.dimension();
  const int order = problem.pce.order;
  const BasisSet basis = stage("basis", [&] { return enumerate_basis(static_cast<int>(dim), order); });
  const Design design = stage("design", [&] { return make_design(problem.pce.design, dim, order); });
  const Eigen::VectorXd y = stage("outputs", [&] { return coupled_sample_outputs(problem, design.points); });
  PceModel pce = stage("fit", [&] {
    return design.weights ? fit_projection(basis, design, y) : fit_least_squares(basis, design.points, y);
  });
  const Moments mom = moments(pce);
  const auto labels = problem.labels();
  SobolReport sobol = stage("sobol", [&] { return sobol_indices(pce, labels); });

  return UqResult{std::move(pce),
                  design.kind,
                  design.size(),
                  mom,
                  std::move(sobol),
                  std::nullopt,
                  problem.surrogate->describe(),
                  problem.pce.design};
}

McsComparison compare_with_oracle(const UqResult& result, const McsResult& oracle) {
  McsComparison c;
  c.oracle_mean = oracle.mean;
  c.oracle_std = oracle.std;
  c.mean_relative_error = (result.moments.mean - oracle.mean) / oracle.mean;
  c.std_relative_error = (result.moments.std - oracle.std) / oracle.std;
  c.n_samples = oracle.n_samples;
  c.seed = oracle.seed;
  return c;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> training_box(const InputSpace& inputs, double width) {
  if (!(width > 0.0)) throw InvalidParameter("training box width must be > 0");
  const Eigen::Index n = inputs.size();
  Eigen::VectorXd lo(n), hi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& m = inputs[i];
    lo[i] = std::max(m.spec().mean - width * m.spec().std, m.from_standard_normal(-kNormalTailClamp));
    hi[i] = std::min(m.spec().mean + width * m.spec().std, m.from_standard_normal(kNormalTailClamp));
  }
  return {lo, hi};
}

Eigen::MatrixXd box_lhs(const InputSpace& inputs, Eigen::Index m, std::uint64_t seed, double width) {
  const auto [lo, hi] = training_box(inputs, width);
  const Design unit = lhs_design(m, inputs.size(), seed);
  Eigen::MatrixXd x(m, inputs.size());
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < inputs.size(); ++i) {
      x(j, i) = lo[i] + (hi[i] - lo[i]) * normal_cdf(unit.points(j, i));
    }
  }
  return x;
}

GpModel train_gp_on_model(const ModelFunction& model, const InputSpace& inputs, const GpTrainingPlan& plan) {
  const Eigen::MatrixXd x = box_lhs(inputs, plan.points, plan.seed, plan.box_width);
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index j = 0; j < x.rows(); ++j) y[j] = model(x.row(j).transpose());
  return gp_train(x, y, plan.gp);
}

std::vector<StudyRow> training_size_study(const ModelFunction& true_model, const std::vector<Eigen::Index>& sizes,
                                          const UqProblem& problem_template, const GpTrainingPlan& plan) {
  std::vector<StudyRow> rows;
  for (const Eigen::Index m : sizes) {
    StudyRow row;
    row.training_points = m;
    try {
      GpTrainingPlan sized = plan;
      sized.points = m;
      auto gp = std::make_shared<GpModel>(
          stage("gp_train", [&] { return train_gp_on_model(true_model, problem_template.inputs, sized); }));
      UqProblem problem{problem_template.inputs, gp, problem_template.pce};
      row.result = run_uq(problem);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double shaft_eval(double yield_strength, double diameter, double length, double force, double torque) {
  const double stress = 16.0 / (std::numbers::pi * diameter * diameter * diameter) *
                        std::sqrt(4.0 * force * force * length * length + 3.0 * torque * torque);
  return (yield_strength - stress) * 1e-6;
}

double shaft_model(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != 5) throw DimensionMismatch("shaft model takes 5 inputs");
  return shaft_eval(x[0], x[1], x[2], x[3], x[4]);
}

std::vector<DistributionSpec> shaft_inputs() {
  return {
      {Family::Normal, 250e6, 30e6, "S_y"},
      {Family::Normal, 0.04, 1e-7, "d"},
      {Family::Normal, 0.4, 1e-7, "l"},
      {Family::Lognormal, 1780.0, 363.0, "F"},
      {Family::GumbelMax, 430.0, 40.0, "T"},
  };
}

double plate_synthetic_model(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != 5) throw DimensionMismatch("plate model takes 5 inputs");
  const double k = x[0], h = x[1], eps = x[2], ta = x[3], height = x[4];
  // Conduction lifts the edge above ambient; convection, radiation and plate
  // height pull it back. Smooth and monotone in every input.
  const double lift = 150.0 * std::sqrt(k / 400.0) * std::pow(h, -0.05) * (1.0 - 0.4 * (eps - 0.5));
  return ta + lift * std::exp(-0.5 * (height - 1.0));
}

std::vector<DistributionSpec> plate_inputs() {
  return {
      {Family::Normal, 400.0, 10.0, "k"},
      {Family::Normal, 1.0, 0.05, "h_coeff"},
      {Family::Normal, 0.5, 0.05, "emissivity"},
      {Family::GumbelMax, 300.0, 20.0, "T_a"},
      {Family::Normal, 1.0, 0.05, "H"},
  };
}

}  // namespace cuq
