#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cuq/random.hpp"

namespace cuq {

enum class Family { Normal, Lognormal, Uniform, GumbelMax };

/// Config spelling: normal, lognormal, uniform, gumbel_max.
std::string_view to_string(Family family);
std::optional<Family> parse_family(std::string_view text);

/// A marginal distribution as the user specifies it: family plus mean and
/// standard deviation in physical units.
struct DistributionSpec {
  Family family = Family::Normal;
  double mean = 0.0;
  double std = 1.0;
  std::string name;

  bool operator==(const DistributionSpec&) const = default;
};

/// Moment-matched native parameters.
///
///   Normal    -> (mu, sigma)
///   Lognormal -> (lambda, zeta), parameters of ln X
///   Uniform   -> (a, b), support endpoints
///   GumbelMax -> (location, scale)
struct NativeParams {
  double first = 0.0;
  double second = 0.0;
};

/// Throws InvalidParameter when std <= 0 or a lognormal mean is <= 0.
NativeParams native_params(const DistributionSpec& spec);

/// A validated marginal with cached native parameters.
class Marginal {
 public:
  explicit Marginal(DistributionSpec spec);

  const DistributionSpec& spec() const { return spec_; }
  const NativeParams& native() const { return native_; }

  double cdf(double x) const;
  /// 1 - cdf(x), computed without cancellation in the upper tail.
  double ccdf(double x) const;
  double inv_cdf(double p) const;

  /// X = F^-1(Phi(u)); u is clamped to +-kNormalTailClamp.
  double from_standard_normal(double u) const;
  /// U = Phi^-1(F(x)). Throws SupportError outside the support.
  double to_standard_normal(double x) const;

  bool in_support(double x) const;
  /// Sample from the native parameterization.
  double sample(Rng& rng) const;

 private:
  DistributionSpec spec_;
  NativeParams native_;
};

double cdf(const DistributionSpec& spec, double x);
double inv_cdf(const DistributionSpec& spec, double p);

/// Independent marginals in canonical order.
class InputSpace {
 public:
  explicit InputSpace(const std::vector<DistributionSpec>& specs);

  Eigen::Index size() const { return static_cast<Eigen::Index>(marginals_.size()); }
  const Marginal& operator[](Eigen::Index i) const { return marginals_[static_cast<std::size_t>(i)]; }
  const std::vector<Marginal>& marginals() const { return marginals_; }
  std::vector<std::string> names() const;

  Eigen::VectorXd u_to_x(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  Eigen::VectorXd x_to_u(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  std::vector<Marginal> marginals_;
};

}  // namespace cuq
