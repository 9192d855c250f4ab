#include "cuq/gp_surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "cuq/error.hpp"
#include "cuq/random.hpp"
#include "cuq/text_io.hpp"

namespace cuq {

// ---------------------------------------------------------------------------
// FunctionSurrogate

FunctionSurrogate::FunctionSurrogate(Eigen::Index dimension, Fn mean, Fn std, std::string label)
    : dimension_(dimension), mean_(std::move(mean)), std_(std::move(std)), label_(std::move(label)) {}

Prediction FunctionSurrogate::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dimension_) throw DimensionMismatch("surrogate: wrong input dimension");
  return {mean_(x), std_ ? std::max(0.0, std_(x)) : 0.0};
}

// ---------------------------------------------------------------------------
// GP internals

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct Standardized {
  Eigen::VectorXd x_shift, x_scale;
  double y_shift = 0.0, y_scale = 1.0;
  Eigen::MatrixXd z;
  Eigen::VectorXd t;
  bool constant_output = false;
};

Standardized standardize(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Standardized s;
  const double m = static_cast<double>(x.rows());
  s.x_shift = x.colwise().mean().transpose();
  s.x_scale.resize(x.cols());
  for (Eigen::Index d = 0; d < x.cols(); ++d) {
    const double var = (x.col(d).array() - s.x_shift[d]).square().sum() / m;
    s.x_scale[d] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  s.z = (x.rowwise() - s.x_shift.transpose()).array().rowwise() / s.x_scale.transpose().array();

  s.y_shift = y.mean();
  const double yvar = (y.array() - s.y_shift).square().sum() / m;
  if (yvar > 0.0) {
    s.y_scale = std::sqrt(yvar);
  } else {
    // Constant response: keep the posterior spread negligible relative to |c|.
    s.constant_output = true;
    s.y_scale = std::max(std::fabs(s.y_shift), 1.0) * 1e-12;
  }
  s.t = (y.array() - s.y_shift) / s.y_scale;
  return s;
}

// Noise-free SE kernel on standardized points.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& z, double signal_variance, const Eigen::VectorXd& ls) {
  const Eigen::Index m = z.rows();
  const Eigen::MatrixXd zs = z.array().rowwise() / ls.transpose().array();
  const Eigen::VectorXd sq = zs.rowwise().squaredNorm();
  Eigen::MatrixXd k = zs * zs.transpose();
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double r2 = std::max(0.0, sq[i] + sq[j] - 2.0 * k(i, j));
      k(i, j) = signal_variance * std::exp(-0.5 * r2);
    }
    k(j, j) = signal_variance;
  }
  return k;
}

// Factorizes K + noise*I, escalating the noise until the factorization succeeds.
bool factorize(const Eigen::MatrixXd& k, double& noise, double max_noise, Eigen::LLT<Eigen::MatrixXd>& llt) {
  while (true) {
    Eigen::MatrixXd kn = k;
    kn.diagonal().array() += noise;
    llt.compute(kn);
    bool ok = llt.info() == Eigen::Success;
    if (ok) {
      const auto diag = llt.matrixLLT().diagonal();
      ok = diag.allFinite() && diag.minCoeff() > 0.0;
    }
    if (ok) return true;
    if (noise >= max_noise) return false;
    noise = std::min(noise * 10.0, max_noise);
  }
}

struct Objective {
  const Eigen::MatrixXd& z;
  const Eigen::VectorXd& t;
  double jitter;
  double max_jitter;
  Eigen::VectorXd lower, upper;  // bounds on log-parameters

  Eigen::VectorXd to_log(const Eigen::VectorXd& phi) const {
    Eigen::VectorXd theta(phi.size());
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
      theta[i] = lower[i] + (upper[i] - lower[i]) / (1.0 + std::exp(-phi[i]));
    }
    return theta;
  }

  Eigen::VectorXd from_log(const Eigen::VectorXd& theta) const {
    Eigen::VectorXd phi(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double s = std::clamp((theta[i] - lower[i]) / (upper[i] - lower[i]), 1e-9, 1.0 - 1e-9);
      phi[i] = std::log(s / (1.0 - s));
    }
    return phi;
  }

  // Negative log marginal likelihood and its gradient with respect to phi.
  double operator()(const Eigen::VectorXd& phi, Eigen::VectorXd& grad) const {
    const Eigen::VectorXd theta = to_log(phi);
    const double sf2 = std::exp(theta[0]);
    const Eigen::VectorXd ls = theta.tail(theta.size() - 1).array().exp();
    const Eigen::MatrixXd kf = kernel_matrix(z, sf2, ls);
    double noise = jitter * sf2;
    Eigen::LLT<Eigen::MatrixXd> llt;
    if (!factorize(kf, noise, max_jitter * sf2, llt)) {
      grad.setZero(phi.size());
      return std::numeric_limits<double>::infinity();
    }
    const Eigen::Index m = z.rows();
    const Eigen::VectorXd alpha = llt.solve(t);
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double nll = 0.5 * t.dot(alpha) + 0.5 * logdet + 0.5 * static_cast<double>(m) * kLog2Pi;

    Eigen::MatrixXd w = llt.solve(Eigen::MatrixXd::Identity(m, m));
    w.noalias() -= alpha * alpha.transpose();

    Eigen::VectorXd gtheta(theta.size());
    // K scales with sf2 including the proportional noise term.
    Eigen::MatrixXd kn = kf;
    kn.diagonal().array() += noise;
    gtheta[0] = 0.5 * (w.array() * kn.array()).sum();
    const Eigen::MatrixXd wk = w.cwiseProduct(kf);
    for (Eigen::Index d = 0; d < ls.size(); ++d) {
      const Eigen::VectorXd col = z.col(d) / ls[d];
      double acc = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) {
          const double diff = col[i] - col[j];
          acc += wk(i, j) * diff * diff;
        }
      }
      gtheta[d + 1] = 0.5 * acc;
    }
    grad.resize(phi.size());
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-phi[i]));
      grad[i] = gtheta[i] * (upper[i] - lower[i]) * s * (1.0 - s);
    }
    return nll;
  }
};

// BFGS with Armijo backtracking.
Eigen::VectorXd minimize_bfgs(const Objective& f, Eigen::VectorXd x, int max_iterations, double& fx) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd g;
  fx = f(x, g);
  if (!std::isfinite(fx)) return x;
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  for (int iter = 0; iter < max_iterations; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() < 1e-6) break;
    Eigen::VectorXd dir = -h * g;
    double slope = g.dot(dir);
    if (slope >= 0.0) {
      h.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }
    double step = 1.0;
    Eigen::VectorXd xn, gn;
    double fn = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      xn = x + step * dir;
      fn = f(xn, gn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd y = gn - g;
    const double improvement = fx - fn;
    x = xn;
    g = gn;
    fx = fn;
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
      h = left * h * left.transpose() + rho * s * s.transpose();
    }
    if (improvement < 1e-10 * (1.0 + std::fabs(fx))) break;
  }
  return x;
}

void check_training_data(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs) {
  if (inputs.rows() != outputs.size()) {
    throw DimensionMismatch("gp_train: " + std::to_string(inputs.rows()) + " inputs but " +
                            std::to_string(outputs.size()) + " outputs");
  }
  if (inputs.rows() < 2 || inputs.cols() < 1) throw DegenerateData("gp_train: need at least two training points");
  if (!inputs.allFinite() || !outputs.allFinite()) throw DegenerateData("gp_train: non-finite training data");
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < inputs.rows(); ++j) {
      if (inputs.row(i) == inputs.row(j)) {
        throw DegenerateData("gp_train: duplicate training inputs at rows " + std::to_string(i) + " and " +
                             std::to_string(j));
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// GpModel

GpModel::GpModel(Eigen::MatrixXd inputs, Eigen::VectorXd outputs, GpHyperparameters hyper, double max_jitter,
                 std::optional<GpScaling> scaling)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), hyper_(std::move(hyper)) {
  check_training_data(inputs_, outputs_);
  if (hyper_.length_scales.size() != inputs_.cols()) {
    throw DimensionMismatch("GpModel: need one length-scale per input dimension");
  }
  Standardized s = standardize(inputs_, outputs_);
  if (scaling) {
    if (scaling->x_shift.size() != inputs_.cols() || scaling->x_scale.size() != inputs_.cols() ||
        !(scaling->y_scale > 0.0) || !(scaling->x_scale.array() > 0.0).all()) {
      throw InvalidParameter("GpModel: invalid scaling");
    }
    s.x_shift = scaling->x_shift;
    s.x_scale = scaling->x_scale;
    s.y_shift = scaling->y_shift;
    s.y_scale = scaling->y_scale;
    s.z = (inputs_.rowwise() - s.x_shift.transpose()).array().rowwise() / s.x_scale.transpose().array();
    s.t = (outputs_.array() - s.y_shift) / s.y_scale;
  }
  x_shift_ = std::move(s.x_shift);
  x_scale_ = std::move(s.x_scale);
  y_shift_ = s.y_shift;
  y_scale_ = s.y_scale;
  z_ = std::move(s.z);

  const Eigen::MatrixXd kf = kernel_matrix(z_, hyper_.signal_variance, hyper_.length_scales);
  double noise = hyper_.noise_variance;
  if (!factorize(kf, noise, std::max(noise, max_jitter * hyper_.signal_variance), llt_)) {
    throw NotPositiveDefinite("GP kernel matrix is not positive definite at maximum jitter");
  }
  hyper_.noise_variance = noise;
  alpha_ = llt_.solve(s.t);
  const double logdet = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  log_likelihood_ = -0.5 * s.t.dot(alpha_) - 0.5 * logdet - 0.5 * static_cast<double>(z_.rows()) * kLog2Pi;
}

double GpModel::kernel(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) const {
  const double r2 = ((a - b).array() / hyper_.length_scales.array()).square().sum();
  return hyper_.signal_variance * std::exp(-0.5 * r2);
}

Prediction GpModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dimension()) {
    throw DimensionMismatch("gp_predict: expected " + std::to_string(dimension()) + " inputs, got " +
                            std::to_string(x.size()));
  }
  const Eigen::VectorXd zq = (x - x_shift_).array() / x_scale_.array();
  Eigen::VectorXd kstar(z_.rows());
  for (Eigen::Index i = 0; i < z_.rows(); ++i) kstar[i] = kernel(z_.row(i).transpose(), zq);
  const double mean = kstar.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(kstar);
  const double var = std::max(0.0, hyper_.signal_variance - v.squaredNorm());
  return {y_shift_ + y_scale_ * mean, y_scale_ * std::sqrt(var)};
}

Eigen::VectorXd GpModel::loo_residuals() const {
  const Eigen::MatrixXd kinv = llt_.solve(Eigen::MatrixXd::Identity(z_.rows(), z_.rows()));
  return y_scale_ * (alpha_.array() / kinv.diagonal().array()).matrix();
}

std::string GpModel::describe() const {
  std::ostringstream ss;
  ss << "gp(m=" << inputs_.rows() << ", signal_variance=" << format_double(hyper_.signal_variance)
     << ", noise_variance=" << format_double(hyper_.noise_variance) << ", length_scales=[";
  for (Eigen::Index d = 0; d < hyper_.length_scales.size(); ++d) {
    ss << (d ? "," : "") << format_double(hyper_.length_scales[d]);
  }
  ss << "])";
  return ss.str();
}

GpModel gp_train(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs, const GpConfig& config) {
  check_training_data(inputs, outputs);
  if (config.restarts < 1) throw InvalidParameter("gp_train: restarts must be >= 1");
  if (!(config.jitter > 0.0) || config.max_jitter < config.jitter) {
    throw InvalidParameter("gp_train: need 0 < jitter <= max_jitter");
  }
  const Eigen::Index n = inputs.cols();
  const Standardized s = standardize(inputs, outputs);

  GpHyperparameters best;
  best.signal_variance = 1.0;
  best.length_scales = Eigen::VectorXd::Ones(n);
  best.noise_variance = config.jitter;
  if (s.constant_output) return GpModel(inputs, outputs, best, config.max_jitter);

  Objective objective{s.z, s.t, config.jitter, config.max_jitter, Eigen::VectorXd(n + 1), Eigen::VectorXd(n + 1)};
  objective.lower[0] = std::log(1e-4);
  objective.upper[0] = std::log(1e4);
  objective.lower.tail(n).setConstant(std::log(1e-2));
  objective.upper.tail(n).setConstant(std::log(1e3));

  Rng rng(config.seed);
  double best_nll = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_theta;
  for (int r = 0; r < config.restarts; ++r) {
    Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(n + 1);
    if (r > 0) {
      theta0[0] = std::log(0.1) + rng.uniform() * std::log(100.0);
      for (Eigen::Index d = 0; d < n; ++d) theta0[d + 1] = std::log(0.1) + rng.uniform() * std::log(100.0);
    }
    double nll = 0.0;
    const Eigen::VectorXd phi = minimize_bfgs(objective, objective.from_log(theta0), config.max_iterations, nll);
    if (std::isfinite(nll) && nll < best_nll) {
      best_nll = nll;
      best_theta = objective.to_log(phi);
    }
  }
  if (!std::isfinite(best_nll)) {
    throw NotPositiveDefinite("gp_train: kernel matrix not positive definite for any start");
  }
  best.signal_variance = std::exp(best_theta[0]);
  best.length_scales = best_theta.tail(n).array().exp();
  best.noise_variance = config.jitter * best.signal_variance;
  return GpModel(inputs, outputs, best, config.max_jitter);
}

Prediction gp_predict(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return model.predict(x);
}

// ---------------------------------------------------------------------------
// GridSurrogate

GridSurrogate::GridSurrogate(std::vector<std::vector<double>> axes, Eigen::VectorXd means, Eigen::VectorXd stds,
                             std::string label)
    : axes_(std::move(axes)), means_(std::move(means)), stds_(std::move(stds)), label_(std::move(label)) {
  if (axes_.empty()) throw InvalidParameter("grid surrogate: no axes");
  std::size_t total = 1;
  for (const auto& axis : axes_) {
    if (axis.empty()) throw InvalidParameter("grid surrogate: empty axis");
    if (!std::is_sorted(axis.begin(), axis.end()) ||
        std::adjacent_find(axis.begin(), axis.end()) != axis.end()) {
      throw InvalidParameter("grid surrogate: axis values must be strictly increasing");
    }
    total *= axis.size();
  }
  if (static_cast<std::size_t>(means_.size()) != total || static_cast<std::size_t>(stds_.size()) != total) {
    throw InvalidParameter("grid surrogate: expected " + std::to_string(total) + " grid values");
  }
  if ((stds_.array() < 0.0).any()) throw InvalidParameter("grid surrogate: negative std value");
  strides_.assign(axes_.size(), 1);
  for (std::size_t d = axes_.size() - 1; d > 0; --d) strides_[d - 1] = strides_[d] * axes_[d].size();
}

std::shared_ptr<GridSurrogate> GridSurrogate::load_csv(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw InvalidParameter("grid file '" + path.string() + "' is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[header.size() - 2] != "mean" || header.back() != "std") {
    throw InvalidParameter("grid file '" + path.string() + "': header must be x1,...,xn,mean,std");
  }
  const std::size_t dim = header.size() - 2;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw InvalidParameter("grid file '" + path.string() + "' line " + std::to_string(line_no) +
                             ": wrong field count");
    }
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_double(f));
    rows.push_back(std::move(row));
  }
  // Axis values are the distinct coordinates per column, in order of appearance.
  std::vector<std::vector<double>> axes(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    for (const auto& row : rows) {
      if (std::find(axes[d].begin(), axes[d].end(), row[d]) == axes[d].end()) axes[d].push_back(row[d]);
    }
  }
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.size();
  if (total != rows.size()) {
    throw InvalidParameter("grid file '" + path.string() + "': " + std::to_string(rows.size()) +
                           " rows do not form a regular grid of " + std::to_string(total) + " points");
  }
  Eigen::VectorXd means(static_cast<Eigen::Index>(total)), stds(static_cast<Eigen::Index>(total));
  // Row-major check: row j must sit at the odometer position j.
  std::vector<std::size_t> odo(dim, 0);
  for (std::size_t j = 0; j < total; ++j) {
    for (std::size_t d = 0; d < dim; ++d) {
      if (rows[j][d] != axes[d][odo[d]]) {
        throw InvalidParameter("grid file '" + path.string() + "': row " + std::to_string(j + 2) +
                               " breaks row-major grid order");
      }
    }
    means[static_cast<Eigen::Index>(j)] = rows[j][dim];
    stds[static_cast<Eigen::Index>(j)] = rows[j][dim + 1];
    for (std::size_t d = dim; d-- > 0;) {
      if (++odo[d] < axes[d].size()) break;
      odo[d] = 0;
    }
  }
  return std::make_shared<GridSurrogate>(std::move(axes), std::move(means), std::move(stds),
                                         "grid(" + path.filename().string() + ")");
}

Prediction GridSurrogate::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dimension()) throw DimensionMismatch("grid surrogate: wrong input dimension");
  const std::size_t dim = axes_.size();
  std::vector<std::size_t> lo(dim);
  std::vector<double> frac(dim);
  bool clamped = false;
  for (std::size_t d = 0; d < dim; ++d) {
    const auto& axis = axes_[d];
    double v = x[static_cast<Eigen::Index>(d)];
    if (v < axis.front() || v > axis.back()) {
      clamped = true;
      v = std::clamp(v, axis.front(), axis.back());
    }
    if (axis.size() == 1) {
      lo[d] = 0;
      frac[d] = 0.0;
      continue;
    }
    auto it = std::upper_bound(axis.begin(), axis.end(), v);
    std::size_t hi = static_cast<std::size_t>(it - axis.begin());
    hi = std::clamp<std::size_t>(hi, 1, axis.size() - 1);
    lo[d] = hi - 1;
    frac[d] = (v - axis[lo[d]]) / (axis[hi] - axis[lo[d]]);
  }
  if (clamped) clamped_.fetch_add(1, std::memory_order_relaxed);

  double mean = 0.0, sd = 0.0;
  const std::size_t corners = std::size_t{1} << dim;
  for (std::size_t c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t offset = 0;
    for (std::size_t d = 0; d < dim; ++d) {
      const bool upper = (c >> d) & 1U;
      if (upper && axes_[d].size() == 1) {
        w = 0.0;
        break;
      }
      w *= upper ? frac[d] : 1.0 - frac[d];
      offset += (lo[d] + (upper ? 1 : 0)) * strides_[d];
    }
    if (w == 0.0) continue;
    mean += w * means_[static_cast<Eigen::Index>(offset)];
    sd += w * stds_[static_cast<Eigen::Index>(offset)];
  }
  return {mean, std::max(0.0, sd)};
}

void write_training_csv(const std::filesystem::path& path, const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& outputs, const std::vector<std::string>& names) {
  std::string out;
  for (Eigen::Index d = 0; d < inputs.cols(); ++d) {
    out += names.size() == static_cast<std::size_t>(inputs.cols()) ? names[static_cast<std::size_t>(d)]
                                                                     : "x" + std::to_string(d + 1);
    out += ',';
  }
  out += "y\n";
  for (Eigen::Index j = 0; j < inputs.rows(); ++j) {
    for (Eigen::Index d = 0; d < inputs.cols(); ++d) out += format_double(inputs(j, d)) + ",";
    out += format_double(outputs[j]) + "\n";
  }
  write_file_atomic(path, out);
}

}  // namespace cuq
