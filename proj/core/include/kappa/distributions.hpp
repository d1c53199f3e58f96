#pragma once

// Sampling laws and their population concentration values.
//
// kappa_q is the share of the total expectation carried by the top q-fraction
// of the population; kappa_h is the same share above a fixed cut h.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace kappa {

/// Pareto law P(X > x) = (x_min / x)^alpha on [x_min, inf).
struct ParetoParams {
  double alpha = 0.0;
  double x_min = 1.0;

  friend bool operator==(const ParetoParams&, const ParetoParams&) = default;
};

/// X = exp(mu + sigma * Z), Z standard normal.
struct LognormalParams {
  double mu = 0.0;
  double sigma = 1.0;

  friend bool operator==(const LognormalParams&, const LognormalParams&) = default;
};

/// Finite mixture of Pareto laws, each normalized to unit mean
/// (x_min_i = (alpha_i - 1) / alpha_i).
struct MixtureSpec {
  std::vector<double> weights;
  std::vector<ParetoParams> components;

  /// Builds the unit-mean mixture for the given exponents.
  static MixtureSpec unit_mean(std::vector<double> weights, std::span<const double> alphas);

  friend bool operator==(const MixtureSpec&, const MixtureSpec&) = default;
};

using DistributionSpec = std::variant<ParetoParams, LognormalParams, MixtureSpec>;

/// Unit-mean lower bound for exponent alpha.
double unit_mean_x_min(double alpha);

void validate(const ParetoParams& p);
void validate(const LognormalParams& p);
void validate(const MixtureSpec& m);
void validate(const DistributionSpec& spec);

/// Short human-readable form, e.g. "pareto(alpha=1.1, x_min=1)".
std::string describe(const DistributionSpec& spec);

/// A batch of positive observations, optionally tagged with the law and seed
/// that produced it.
class Sample {
 public:
  /// Throws DomainError if `values` is empty or holds a value that is not
  /// strictly positive and finite.
  explicit Sample(std::vector<double> values, std::uint64_t seed = 0,
                  std::optional<DistributionSpec> spec = std::nullopt);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::optional<DistributionSpec>& spec() const noexcept { return spec_; }

  /// Copy with every value multiplied by c > 0.
  Sample scaled(double c) const;
  /// Copy with `y` appended.
  Sample with_appended(double y) const;

 private:
  std::vector<double> values_;
  std::uint64_t seed_;
  std::optional<DistributionSpec> spec_;
};

/// Draws n values. Pareto by inverse CDF x_min * U^(-1/alpha), lognormal by
/// Box-Muller, mixtures by categorical pick then component draw. The output
/// depends only on (spec, n, seed).
Sample sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

/// Inverse-CDF Pareto draw for a uniform u in (0,1): x_min * u^(-1/alpha).
inline double pareto_from_uniform(const ParetoParams& p, double u) {
  return p.x_min * std::pow(u, -1.0 / p.alpha);
}

/// Same draws as sample(spec, out.size(), seed), written into `out`.
/// `spec` must already be valid.
void fill_sample(const DistributionSpec& spec, std::uint64_t seed, std::span<double> out);

/// Inverse survival function of a Pareto law at probability q: x_min * q^(-1/alpha).
double theoretical_threshold(const ParetoParams& params, double q);

/// q^((alpha - 1) / alpha).
double kappa_pareto(double alpha, double q);

/// Top-q share when only the tail P(X > x) = (lambda / x)^alpha is Pareto
/// and the population mean is supplied by the caller.
/// Throws InconsistencyError if the result exceeds 1.
double kappa_cut_pareto(double alpha, double lambda, double mean, double q);

/// d^2/d alpha^2 of kappa_pareto:
///   q^((alpha-1)/alpha) * ln q * (ln q - 2 alpha) / alpha^4.
double kappa_second_derivative(double alpha, double q);

/// Threshold h of a unit-mean Pareto mixture with P(X > h) = q, found by
/// bisection to 1e-12 relative width.
double mixture_threshold(const MixtureSpec& mix, double q);

/// Population top-q share of a unit-mean Pareto mixture.
double kappa_mixture(const MixtureSpec& mix, double q);

/// Population threshold h(q) with P(X > h) = q, for any supported law.
double population_threshold(const DistributionSpec& spec, double q);

/// Population share above a frozen cut h: E[X 1{X > h}] / E[X].
/// Requires a finite mean (Pareto alphas > 1).
double population_kappa_h(const DistributionSpec& spec, double h);

/// Population top-q share for any supported law.
double population_kappa_q(const DistributionSpec& spec, double q);

}  // namespace kappa
