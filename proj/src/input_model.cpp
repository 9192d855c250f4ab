#include "cuq/input_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cuq/error.hpp"
#include "cuq/normal.hpp"

namespace cuq {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::Normal: return "normal";
    case Family::Lognormal: return "lognormal";
    case Family::Uniform: return "uniform";
    case Family::GumbelMax: return "gumbel_max";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view text) {
  if (text == "normal") return Family::Normal;
  if (text == "lognormal") return Family::Lognormal;
  if (text == "uniform") return Family::Uniform;
  if (text == "gumbel_max") return Family::GumbelMax;
  return std::nullopt;
}

NativeParams native_params(const DistributionSpec& spec) {
  if (!(spec.std > 0.0) || !std::isfinite(spec.std) || !std::isfinite(spec.mean)) {
    throw InvalidParameter("distribution '" + spec.name + "': std must be finite and > 0");
  }
  switch (spec.family) {
    case Family::Normal:
      return {spec.mean, spec.std};
    case Family::Lognormal: {
      if (!(spec.mean > 0.0)) {
        throw InvalidParameter("distribution '" + spec.name + "': lognormal mean must be > 0");
      }
      const double cv = spec.std / spec.mean;
      const double zeta2 = std::log1p(cv * cv);
      return {std::log(spec.mean) - 0.5 * zeta2, std::sqrt(zeta2)};
    }
    case Family::Uniform: {
      const double half = std::numbers::sqrt3 * spec.std;
      return {spec.mean - half, spec.mean + half};
    }
    case Family::GumbelMax: {
      const double scale = spec.std * std::sqrt(6.0) / std::numbers::pi;
      return {spec.mean - std::numbers::egamma * scale, scale};
    }
  }
  throw InvalidParameter("unknown distribution family");
}

Marginal::Marginal(DistributionSpec spec) : spec_(std::move(spec)), native_(native_params(spec_)) {}

bool Marginal::in_support(double x) const {
  if (!std::isfinite(x)) return false;
  switch (spec_.family) {
    case Family::Lognormal: return x > 0.0;
    case Family::Uniform: return x >= native_.first && x <= native_.second;
    default: return true;
  }
}

double Marginal::cdf(double x) const {
  const auto [p1, p2] = native_;
  switch (spec_.family) {
    case Family::Normal:
      return normal_cdf((x - p1) / p2);
    case Family::Lognormal:
      return x <= 0.0 ? 0.0 : normal_cdf((std::log(x) - p1) / p2);
    case Family::Uniform:
      return std::clamp((x - p1) / (p2 - p1), 0.0, 1.0);
    case Family::GumbelMax:
      return std::exp(-std::exp(-(x - p1) / p2));
  }
  return 0.0;
}

double Marginal::ccdf(double x) const {
  const auto [p1, p2] = native_;
  switch (spec_.family) {
    case Family::Normal:
      return normal_ccdf((x - p1) / p2);
    case Family::Lognormal:
      return x <= 0.0 ? 1.0 : normal_ccdf((std::log(x) - p1) / p2);
    case Family::Uniform:
      return std::clamp((p2 - x) / (p2 - p1), 0.0, 1.0);
    case Family::GumbelMax:
      return -std::expm1(-std::exp(-(x - p1) / p2));
  }
  return 0.0;
}

double Marginal::inv_cdf(double p) const {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("inv_cdf: probability " + std::to_string(p) + " outside (0, 1)");
  }
  const auto [p1, p2] = native_;
  switch (spec_.family) {
    case Family::Normal: return p1 + p2 * normal_quantile(p);
    case Family::Lognormal: return std::exp(p1 + p2 * normal_quantile(p));
    case Family::Uniform: return p1 + (p2 - p1) * p;
    case Family::GumbelMax: return p1 - p2 * std::log(-std::log(p));
  }
  return 0.0;
}

double Marginal::from_standard_normal(double u) const {
  u = std::clamp(u, -kNormalTailClamp, kNormalTailClamp);
  const auto [p1, p2] = native_;
  switch (spec_.family) {
    case Family::Normal:
      return p1 + p2 * u;
    case Family::Lognormal:
      return std::exp(p1 + p2 * u);
    case Family::Uniform:
      return u <= 0.0 ? p1 + (p2 - p1) * normal_cdf(u) : p2 - (p2 - p1) * normal_ccdf(u);
    case Family::GumbelMax: {
      // -ln F = -ln Phi(u); take the log1p route when Phi(u) is close to 1.
      const double neg_log_p = u <= 0.0 ? -std::log(normal_cdf(u)) : -std::log1p(-normal_ccdf(u));
      return p1 - p2 * std::log(neg_log_p);
    }
  }
  return 0.0;
}

double Marginal::to_standard_normal(double x) const {
  if (!in_support(x)) {
    throw SupportError("value " + std::to_string(x) + " outside the support of '" + spec_.name + "'");
  }
  const auto [p1, p2] = native_;
  double u = 0.0;
  switch (spec_.family) {
    case Family::Normal:
      u = (x - p1) / p2;
      break;
    case Family::Lognormal:
      u = (std::log(x) - p1) / p2;
      break;
    case Family::Uniform:
    case Family::GumbelMax: {
      const double lower = cdf(x);
      const double upper = ccdf(x);
      if (lower <= 0.0) {
        u = -kNormalTailClamp;
      } else if (upper <= 0.0) {
        u = kNormalTailClamp;
      } else {
        u = lower <= upper ? normal_quantile(lower) : -normal_quantile(upper);
      }
      break;
    }
  }
  return std::clamp(u, -kNormalTailClamp, kNormalTailClamp);
}

double Marginal::sample(Rng& rng) const {
  const auto [p1, p2] = native_;
  switch (spec_.family) {
    case Family::Normal: return p1 + p2 * rng.normal();
    case Family::Lognormal: return std::exp(p1 + p2 * rng.normal());
    case Family::Uniform: return p1 + (p2 - p1) * rng.uniform();
    case Family::GumbelMax: return p1 - p2 * std::log(-std::log(rng.uniform()));
  }
  return 0.0;
}

double cdf(const DistributionSpec& spec, double x) { return Marginal(spec).cdf(x); }

double inv_cdf(const DistributionSpec& spec, double p) { return Marginal(spec).inv_cdf(p); }

InputSpace::InputSpace(const std::vector<DistributionSpec>& specs) {
  if (specs.empty()) throw InvalidParameter("input space needs at least one marginal");
  marginals_.reserve(specs.size());
  for (const auto& s : specs) marginals_.emplace_back(s);
}

std::vector<std::string> InputSpace::names() const {
  std::vector<std::string> out;
  out.reserve(marginals_.size());
  for (const auto& m : marginals_) out.push_back(m.spec().name);
  return out;
}

Eigen::VectorXd InputSpace::u_to_x(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  if (u.size() != size()) {
    throw DimensionMismatch("u_to_x: expected " + std::to_string(size()) + " coordinates, got " +
                            std::to_string(u.size()));
  }
  Eigen::VectorXd x(size());
  for (Eigen::Index i = 0; i < size(); ++i) x[i] = (*this)[i].from_standard_normal(u[i]);
  return x;
}

Eigen::VectorXd InputSpace::x_to_u(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != size()) {
    throw DimensionMismatch("x_to_u: expected " + std::to_string(size()) + " coordinates, got " +
                            std::to_string(x.size()));
  }
  Eigen::VectorXd u(size());
  for (Eigen::Index i = 0; i < size(); ++i) u[i] = (*this)[i].to_standard_normal(x[i]);
  return u;
}

}  // namespace cuq
