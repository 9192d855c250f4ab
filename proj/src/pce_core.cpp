#include "cuq/pce_core.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cuq/error.hpp"
#include "cuq/random.hpp"
#include "cuq/text_io.hpp"

namespace cuq {

std::string_view to_string(FitMethod method) {
  return method == FitMethod::LeastSquares ? "least_squares" : "projection";
}

PceModel::PceModel(BasisSet basis, Eigen::VectorXd coefficients, FitDiagnostics diagnostics)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)), diagnostics_(diagnostics) {
  if (coefficients_.size() != basis_.size()) {
    throw DimensionMismatch("PceModel: " + std::to_string(coefficients_.size()) + " coefficients for " +
                            std::to_string(basis_.size()) + " basis terms");
  }
}

double PceModel::operator()(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  return eval_basis(basis_, u).dot(coefficients_);
}

PceModel fit_least_squares(const BasisSet& basis, const Eigen::MatrixXd& points, const Eigen::VectorXd& y) {
  if (points.rows() != y.size()) throw DimensionMismatch("fit_least_squares: points/outputs length differ");
  if (points.rows() < basis.size()) {
    throw Underdetermined("fit_least_squares: " + std::to_string(points.rows()) + " points for " +
                          std::to_string(basis.size()) + " coefficients; use a quadrature design with projection");
  }
  const Eigen::MatrixXd psi = build_design_matrix(basis, points);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(psi);
  Eigen::VectorXd alpha = qr.solve(y);

  FitDiagnostics diag;
  diag.method = FitMethod::LeastSquares;
  diag.residual_norm = (psi * alpha - y).norm();
  const auto r = qr.matrixR().diagonal().cwiseAbs();
  const double smallest = r.tail(1)[0];
  diag.condition = smallest > 0.0 ? r[0] / smallest : std::numeric_limits<double>::infinity();
  diag.ill_conditioned = !(diag.condition <= kIllConditionedThreshold);
  return PceModel(basis, std::move(alpha), diag);
}

PceModel fit_projection(const BasisSet& basis, const Design& design, const Eigen::VectorXd& y) {
  if (!design.weights) throw MissingWeights("fit_projection: design has no quadrature weights");
  if (design.size() != y.size()) throw DimensionMismatch("fit_projection: points/outputs length differ");
  const Eigen::MatrixXd psi = build_design_matrix(basis, design.points);
  Eigen::VectorXd alpha = psi.transpose() * design.weights->cwiseProduct(y);

  FitDiagnostics diag;
  diag.method = FitMethod::Projection;
  diag.residual_norm = (psi * alpha - y).norm();
  return PceModel(basis, std::move(alpha), diag);
}

double pce_eval(const PceModel& model, const Eigen::Ref<const Eigen::VectorXd>& u) { return model(u); }

Moments moments(const PceModel& model) {
  const auto& a = model.coefficients();
  Moments m;
  m.mean = a[0];
  m.variance = a.tail(a.size() - 1).squaredNorm();
  m.std = std::sqrt(m.variance);
  return m;
}

double SobolReport::first_order_sum() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.first_order;
  return s;
}

const SobolEntry& SobolReport::at(std::string_view label) const {
  const auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.label == label; });
  if (it == entries.end()) throw InvalidParameter("no Sobol' entry named '" + std::string(label) + "'");
  return *it;
}

SobolReport sobol_indices(const PceModel& model, std::span<const std::string> labels) {
  const BasisSet& basis = model.basis();
  const auto dim = static_cast<std::size_t>(basis.dimension());
  if (labels.size() != dim) {
    throw DimensionMismatch("sobol_indices: " + std::to_string(labels.size()) + " labels for dimension " +
                            std::to_string(dim));
  }
  const double variance = moments(model).variance;
  // Roundoff from fitting a constant leaves a relative std near machine epsilon.
  const double floor = 1e-13 * std::fabs(model.coefficients()[0]);
  if (!(variance > 0.0) || std::sqrt(variance) <= floor) {
    throw ZeroVariance("sobol_indices: expansion has zero variance");
  }

  std::vector<double> first(dim, 0.0), total(dim, 0.0);
  double interaction = 0.0;
  const auto& a = model.coefficients();
  for (Eigen::Index k = 1; k < basis.size(); ++k) {
    const double share = a[k] * a[k];
    const MultiIndex& idx = basis[k];
    std::size_t active = 0, last = 0;
    for (std::size_t d = 0; d < dim; ++d) {
      if (idx[d] != 0) {
        ++active;
        last = d;
        total[d] += share;
      }
    }
    if (active == 1) {
      first[last] += share;
    } else {
      interaction += share;
    }
  }

  SobolReport report;
  report.total_variance = variance;
  report.interaction_share = interaction / variance;
  for (std::size_t d = 0; d < dim; ++d) {
    report.entries.push_back({labels[d], first[d] / variance, total[d] / variance});
  }
  return report;
}

double CdfTable::quantile(double p) const {
  if (values.empty()) throw InvalidParameter("quantile of an empty CDF table");
  const auto it = std::lower_bound(probabilities.begin(), probabilities.end(), p);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - probabilities.begin()), values.size() - 1);
  return values[i];
}

CdfTable empirical_cdf(const PceModel& model, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw InvalidParameter("empirical_cdf: need at least one sample");
  Rng rng(seed);
  const int dim = model.basis().dimension();
  CdfTable table;
  table.values.resize(n_samples);
  Eigen::VectorXd u(dim);
  for (auto& v : table.values) {
    for (int d = 0; d < dim; ++d) u[d] = rng.normal();
    v = model(u);
  }
  std::sort(table.values.begin(), table.values.end());
  table.probabilities.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    table.probabilities[i] = static_cast<double>(i + 1) / static_cast<double>(n_samples);
  }
  return table;
}

std::string serialize(const PceModel& model) {
  const BasisSet& basis = model.basis();
  std::ostringstream out;
  out << "cuq-pce 1\n";
  out << "dimension " << basis.dimension() << "\n";
  out << "max_order " << basis.max_order() << "\n";
  out << "terms " << basis.size() << "\n";
  for (Eigen::Index k = 0; k < basis.size(); ++k) {
    for (int p : basis[k]) out << p << ' ';
    out << format_double(model.coefficients()[k]) << "\n";
  }
  return out.str();
}

PceModel deserialize_pce(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string tag, key;
  int version = 0, dim = 0, order = 0;
  Eigen::Index terms = 0;
  if (!(in >> tag >> version) || tag != "cuq-pce" || version != 1) {
    throw InvalidParameter("PCE file: bad header");
  }
  if (!(in >> key >> dim) || key != "dimension" || dim < 1) throw InvalidParameter("PCE file: bad dimension");
  if (!(in >> key >> order) || key != "max_order" || order < 0) throw InvalidParameter("PCE file: bad max_order");
  if (!(in >> key >> terms) || key != "terms" || terms < 1) throw InvalidParameter("PCE file: bad terms");

  std::vector<MultiIndex> indices;
  Eigen::VectorXd coeffs(terms);
  for (Eigen::Index k = 0; k < terms; ++k) {
    MultiIndex idx(static_cast<std::size_t>(dim));
    for (auto& p : idx) {
      if (!(in >> p) || p < 0 || p > order) {
        throw InvalidParameter("PCE file: bad multi-index on term " + std::to_string(k));
      }
    }
    std::string number;
    if (!(in >> number)) throw InvalidParameter("PCE file: missing coefficient on term " + std::to_string(k));
    coeffs[k] = parse_double(number);
    indices.push_back(std::move(idx));
  }
  return PceModel(BasisSet(dim, order, std::move(indices)), std::move(coeffs));
}

}  // namespace cuq
