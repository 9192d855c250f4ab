#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cuq {

/// Gaussian predictive distribution of the response at one input.
struct Prediction {
  double mean = 0.0;
  double std = 0.0;
};

/// Anything that returns a predictive mean M(x) and standard deviation S(x) >= 0.
class ProbabilisticSurrogate {
 public:
  virtual ~ProbabilisticSurrogate() = default;
  virtual Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
  virtual Eigen::Index dimension() const = 0;
  virtual std::string describe() const = 0;
};

/// Wraps plain callables; S defaults to zero (a deterministic model).
class FunctionSurrogate final : public ProbabilisticSurrogate {
 public:
  using Fn = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

  FunctionSurrogate(Eigen::Index dimension, Fn mean, Fn std = {}, std::string label = "function");

  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  Eigen::Index dimension() const override { return dimension_; }
  std::string describe() const override { return label_; }

 private:
  Eigen::Index dimension_;
  Fn mean_;
  Fn std_;
  std::string label_;
};

struct GpConfig {
  /// Noise floor as a fraction of the signal variance.
  double jitter = 1e-10;
  /// Largest jitter tried before the kernel matrix is declared non-PD.
  double max_jitter = 1e-4;
  int restarts = 8;
  std::uint64_t seed = 0;
  int max_iterations = 200;
};

/// Hyperparameters of the squared-exponential kernel in standardized units.
struct GpHyperparameters {
  double signal_variance = 1.0;
  Eigen::VectorXd length_scales;
  /// Absolute noise variance added to the diagonal (standardized units).
  double noise_variance = 1e-10;
};

/// Affine maps to the standardized space: z = (x - x_shift) / x_scale,
/// t = (y - y_shift) / y_scale.
struct GpScaling {
  Eigen::VectorXd x_shift, x_scale;
  double y_shift = 0.0;
  double y_scale = 1.0;
};

/// Zero-mean GP on standardized data with an anisotropic squared-exponential
/// kernel. Immutable once built.
class GpModel final : public ProbabilisticSurrogate {
 public:
  /// Conditions on the data with fixed hyperparameters. The noise is raised
  /// by 10x (up to max_jitter * signal variance) until the Cholesky
  /// factorization succeeds.
  /// By default the scaling comes from the training data's mean and std.
  GpModel(Eigen::MatrixXd inputs, Eigen::VectorXd outputs, GpHyperparameters hyper,
          double max_jitter = 1e-4, std::optional<GpScaling> scaling = std::nullopt);

  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  Eigen::Index dimension() const override { return inputs_.cols(); }
  std::string describe() const override;

  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& outputs() const { return outputs_; }
  const GpHyperparameters& hyperparameters() const { return hyper_; }
  double log_marginal_likelihood() const { return log_likelihood_; }

  /// Closed-form leave-one-out residuals y_i - M_{-i}(x_i), physical units.
  Eigen::VectorXd loo_residuals() const;

  /// Kernel value between two standardized points.
  double kernel(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) const;

  GpScaling scaling() const { return {x_shift_, x_scale_, y_shift_, y_scale_}; }

 private:
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd outputs_;
  GpHyperparameters hyper_;
  Eigen::VectorXd x_shift_, x_scale_;
  double y_shift_ = 0.0, y_scale_ = 1.0;
  Eigen::MatrixXd z_;  // standardized inputs, one row per point
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double log_likelihood_ = 0.0;
};

/// Fits hyperparameters by multi-start maximization of the log marginal likelihood.
GpModel gp_train(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs, const GpConfig& config = {});

Prediction gp_predict(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Tabulated (M, S) on a regular tensor grid with multilinear interpolation.
/// Queries outside the grid are clamped to its boundary and counted.
class GridSurrogate final : public ProbabilisticSurrogate {
 public:
  /// axes[d] ascending; values in row-major order (last axis fastest).
  GridSurrogate(std::vector<std::vector<double>> axes, Eigen::VectorXd means, Eigen::VectorXd stds,
                std::string label = "grid");

  /// CSV with header x1,...,xn,mean,std; rows must form a complete regular grid.
  static std::shared_ptr<GridSurrogate> load_csv(const std::filesystem::path& path);

  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  Eigen::Index dimension() const override { return static_cast<Eigen::Index>(axes_.size()); }
  std::string describe() const override { return label_; }

  std::uint64_t clamped_queries() const { return clamped_.load(); }
  const std::vector<std::vector<double>>& axes() const { return axes_; }

 private:
  std::vector<std::vector<double>> axes_;
  Eigen::VectorXd means_, stds_;
  std::vector<std::size_t> strides_;
  std::string label_;
  mutable std::atomic<std::uint64_t> clamped_{0};
};

/// Writes x1..xn,y (or the given column names) for audit.
void write_training_csv(const std::filesystem::path& path, const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& outputs, const std::vector<std::string>& names = {});

}  // namespace cuq
