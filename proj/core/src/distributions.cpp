#include "kappa/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "kappa/error.hpp"
#include "kappa/rng.hpp"

namespace kappa {

namespace {

void require_probability_open(double q, const char* what) {
  if (!(q > 0.0 && q < 1.0)) {
    std::ostringstream os;
    os << what << ": q must lie in (0,1), got " << q;
    throw DomainError(os.str());
  }
}

void require_finite_mean_alpha(double alpha, const char* what) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    std::ostringstream os;
    os << what << ": alpha must be > 1 (finite mean), got " << alpha;
    throw DomainError(os.str());
  }
}

double mixture_survival(const MixtureSpec& mix, double h) {
  double tail = 0.0;
  for (std::size_t i = 0; i < mix.components.size(); ++i) {
    const auto& c = mix.components[i];
    tail += mix.weights[i] * (h <= c.x_min ? 1.0 : std::pow(c.x_min / h, c.alpha));
  }
  return tail;
}

// Unit-mean mixture, so the share above h is the weighted sum of component shares.
double mixture_kappa_h(const MixtureSpec& mix, double h) {
  double share = 0.0;
  for (std::size_t i = 0; i < mix.components.size(); ++i) {
    const auto& c = mix.components[i];
    share += mix.weights[i] * (h <= c.x_min ? 1.0 : std::pow(c.x_min / h, c.alpha - 1.0));
  }
  return share;
}

double normal_survival(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

// z with P(Z > z) = p, by bisection on the complementary error function.
double normal_upper_quantile(double p) {
  double lo = -40.0;
  double hi = 40.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (normal_survival(mid) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void fill_pareto(const ParetoParams& p, Xoshiro256& rng, std::span<double> out) {
  for (double& x : out) x = pareto_from_uniform(p, uniform_open01(rng));
}

void fill_lognormal(const LognormalParams& p, Xoshiro256& rng, std::span<double> out) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::size_t i = 0;
  while (i < out.size()) {
    const double radius = std::sqrt(-2.0 * std::log(uniform_open01(rng)));
    const double angle = kTwoPi * uniform_open01(rng);
    out[i++] = std::exp(p.mu + p.sigma * radius * std::cos(angle));
    if (i < out.size()) out[i++] = std::exp(p.mu + p.sigma * radius * std::sin(angle));
  }
}

void fill_mixture(const MixtureSpec& m, Xoshiro256& rng, std::span<double> out) {
  std::vector<double> cumulative(m.weights.size());
  std::partial_sum(m.weights.begin(), m.weights.end(), cumulative.begin());
  const std::size_t last = cumulative.size() - 1;
  for (double& x : out) {
    const double u = uniform_open01(rng);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t pick = std::min<std::size_t>(it - cumulative.begin(), last);
    const auto& c = m.components[pick];
    x = pareto_from_uniform(c, uniform_open01(rng));
  }
}

}  // namespace

double unit_mean_x_min(double alpha) {
  require_finite_mean_alpha(alpha, "unit_mean_x_min");
  return (alpha - 1.0) / alpha;
}

MixtureSpec MixtureSpec::unit_mean(std::vector<double> weights, std::span<const double> alphas) {
  MixtureSpec mix;
  mix.weights = std::move(weights);
  mix.components.reserve(alphas.size());
  for (double a : alphas) mix.components.push_back({a, unit_mean_x_min(a)});
  validate(mix);
  return mix;
}

void validate(const ParetoParams& p) {
  require_finite_mean_alpha(p.alpha, "pareto");
  if (!(p.x_min > 0.0) || !std::isfinite(p.x_min)) {
    throw DomainError("pareto: x_min must be > 0, got " + std::to_string(p.x_min));
  }
}

void validate(const LognormalParams& p) {
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma) || !std::isfinite(p.mu)) {
    throw DomainError("lognormal: sigma must be > 0 and mu finite");
  }
}

void validate(const MixtureSpec& m) {
  if (m.components.empty()) throw DomainError("mixture: at least one component required");
  if (m.weights.size() != m.components.size()) {
    throw DomainError("mixture: weights and components differ in length");
  }
  double total = 0.0;
  for (double w : m.weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("mixture: weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("mixture: weights must sum to 1, got " + std::to_string(total));
  }
  for (const auto& c : m.components) {
    validate(c);
    const double expected = (c.alpha - 1.0) / c.alpha;
    if (std::abs(c.x_min - expected) > 1e-12 * expected) {
      throw DomainError("mixture: components must be unit-mean (x_min = (alpha-1)/alpha)");
    }
  }
}

void validate(const DistributionSpec& spec) {
  std::visit([](const auto& p) { validate(p); }, spec);
}

std::string describe(const DistributionSpec& spec) {
  std::ostringstream os;
  os.precision(10);
  std::visit(
      [&os](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ParetoParams>) {
          os << "pareto(alpha=" << p.alpha << ", x_min=" << p.x_min << ")";
        } else if constexpr (std::is_same_v<T, LognormalParams>) {
          os << "lognormal(mu=" << p.mu << ", sigma=" << p.sigma << ")";
        } else {
          os << "mixture(";
          for (std::size_t i = 0; i < p.components.size(); ++i) {
            if (i) os << ", ";
            os << p.weights[i] << "*alpha=" << p.components[i].alpha;
          }
          os << ")";
        }
      },
      spec);
  return os.str();
}

Sample::Sample(std::vector<double> values, std::uint64_t seed, std::optional<DistributionSpec> spec)
    : values_(std::move(values)), seed_(seed), spec_(std::move(spec)) {
  if (values_.empty()) throw DomainError("sample: at least one value required");
  for (double v : values_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError("sample: values must be positive and finite");
    }
  }
}

Sample Sample::scaled(double c) const {
  if (!(c > 0.0)) throw DomainError("sample: scale factor must be > 0");
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return Sample(std::move(v), seed_);
}

Sample Sample::with_appended(double y) const {
  std::vector<double> v(values_);
  v.push_back(y);
  return Sample(std::move(v), seed_);
}

void fill_sample(const DistributionSpec& spec, std::uint64_t seed, std::span<double> out) {
  Xoshiro256 rng(seed);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ParetoParams>) {
          fill_pareto(p, rng, out);
        } else if constexpr (std::is_same_v<T, LognormalParams>) {
          fill_lognormal(p, rng, out);
        } else {
          fill_mixture(p, rng, out);
        }
      },
      spec);
}

Sample sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sample: n must be >= 1");
  validate(spec);
  std::vector<double> values(n);
  fill_sample(spec, seed, values);
  return Sample(std::move(values), seed, spec);
}

double theoretical_threshold(const ParetoParams& params, double q) {
  validate(params);
  require_probability_open(q, "theoretical_threshold");
  return params.x_min * std::pow(q, -1.0 / params.alpha);
}

double kappa_pareto(double alpha, double q) {
  require_finite_mean_alpha(alpha, "kappa_pareto");
  if (!(q > 0.0 && q <= 1.0)) {
    throw DomainError("kappa_pareto: q must lie in (0,1], got " + std::to_string(q));
  }
  return std::pow(q, (alpha - 1.0) / alpha);
}

double kappa_cut_pareto(double alpha, double lambda, double mean, double q) {
  require_finite_mean_alpha(alpha, "kappa_cut_pareto");
  require_probability_open(q, "kappa_cut_pareto");
  if (!(lambda > 0.0) || !(mean > 0.0)) {
    throw DomainError("kappa_cut_pareto: lambda and mean must be > 0");
  }
  const double value = alpha / (alpha - 1.0) * (lambda / mean) * std::pow(q, (alpha - 1.0) / alpha);
  if (value > 1.0) {
    std::ostringstream os;
    os << "kappa_cut_pareto: share " << value << " exceeds 1; mean " << mean
       << " is incompatible with the tail at q=" << q;
    throw InconsistencyError(os.str());
  }
  return value;
}

double kappa_second_derivative(double alpha, double q) {
  require_finite_mean_alpha(alpha, "kappa_second_derivative");
  require_probability_open(q, "kappa_second_derivative");
  const double log_q = std::log(q);
  const double a2 = alpha * alpha;
  return std::pow(q, (alpha - 1.0) / alpha) * log_q * (log_q - 2.0 * alpha) / (a2 * a2);
}

double mixture_threshold(const MixtureSpec& mix, double q) {
  validate(mix);
  require_probability_open(q, "kappa_mixture");

  double lo = std::numeric_limits<double>::infinity();
  for (const auto& c : mix.components) lo = std::min(lo, c.x_min);

  // Grow the upper end until the tail mass drops to q.
  double hi = 2.0 * lo;
  int doublings = 0;
  while (mixture_survival(mix, hi) > q) {
    hi *= 2.0;
    if (++doublings > 4000 || !std::isfinite(hi)) {
      throw NumericError("kappa_mixture: could not bracket the threshold for q=" + std::to_string(q));
    }
  }

  for (int it = 0; it < 400 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mixture_survival(mix, mid) > q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (hi - lo > 1e-12 * hi) throw NumericError("kappa_mixture: bisection did not converge");
  return 0.5 * (lo + hi);
}

double kappa_mixture(const MixtureSpec& mix, double q) {
  return mixture_kappa_h(mix, mixture_threshold(mix, q));
}

double population_threshold(const DistributionSpec& spec, double q) {
  validate(spec);
  require_probability_open(q, "population_threshold");
  return std::visit(
      [q](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ParetoParams>) {
          return theoretical_threshold(p, q);
        } else if constexpr (std::is_same_v<T, LognormalParams>) {
          return std::exp(p.mu + p.sigma * normal_upper_quantile(q));
        } else {
          return mixture_threshold(p, q);
        }
      },
      spec);
}

double population_kappa_h(const DistributionSpec& spec, double h) {
  validate(spec);
  if (!(h > 0.0)) throw DomainError("population_kappa_h: h must be > 0");
  return std::visit(
      [h](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ParetoParams>) {
          return h <= p.x_min ? 1.0 : std::pow(p.x_min / h, p.alpha - 1.0);
        } else if constexpr (std::is_same_v<T, LognormalParams>) {
          return normal_survival((std::log(h) - p.mu - p.sigma * p.sigma) / p.sigma);
        } else {
          return mixture_kappa_h(p, h);
        }
      },
      spec);
}

double population_kappa_q(const DistributionSpec& spec, double q) {
  if (const auto* p = std::get_if<ParetoParams>(&spec)) {
    validate(*p);
    require_probability_open(q, "population_kappa_q");
    return kappa_pareto(p->alpha, q);
  }
  return population_kappa_h(spec, population_threshold(spec, q));
}

}  // namespace kappa
