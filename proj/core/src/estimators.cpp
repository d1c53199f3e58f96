#include "kappa/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <vector>

#include "kappa/error.hpp"

namespace kappa {

namespace {

struct TailSums {
  double above;
  double total;
};

TailSums tail_sums(std::span<const double> values, double h) {
  TailSums sums{0.0, 0.0};
  for (double x : values) {
    sums.total += x;
    if (x > h) sums.above += x;
  }
  return sums;
}

double sample_mean(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

void require_q(double q, const char* what) {
  if (!(q > 0.0 && q < 1.0)) {
    std::ostringstream os;
    os << what << ": q must lie in (0,1), got " << q;
    throw DomainError(os.str());
  }
}

}  // namespace

std::string_view to_string(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::NaiveQ: return "naive_q";
    case EstimatorKind::FrozenH: return "frozen_h";
    case EstimatorKind::PlugIn: return "plug_in";
    case EstimatorKind::StochasticAlpha: return "stochastic_alpha";
    case EstimatorKind::MinAlpha: return "min_alpha";
  }
  return "unknown";
}

std::string_view to_string(TailMethod method) noexcept {
  return method == TailMethod::Hill ? "hill" : "pareto_mle";
}

std::size_t top_count(std::size_t n, double q) {
  require_q(q, "top_count");
  const double t = q * static_cast<double>(n);
  const double nearest = std::nearbyint(t);
  const double k = std::abs(t - nearest) <= 1e-9 * std::max(1.0, t) ? nearest : std::floor(t);
  if (k < 1.0) {
    std::ostringstream os;
    os << "quantile below resolution: q*n = " << t << " < 1 (q=" << q << ", n=" << n << ")";
    throw DomainError(os.str());
  }
  return static_cast<std::size_t>(k);
}

TopShare top_share_inplace(std::span<double> values, double q) {
  const std::size_t n = values.size();
  const std::size_t k = top_count(n, q);
  const double total = std::accumulate(values.begin(), values.end(), 0.0);

  const auto cut = values.begin() + static_cast<std::ptrdiff_t>(n - k - 1);
  std::nth_element(values.begin(), cut, values.end());
  std::sort(cut + 1, values.end(), std::greater<>());
  const double top = std::accumulate(cut + 1, values.end(), 0.0);
  return {top / total, *cut, total};
}

double frozen_share(std::span<const double> values, double h) {
  const auto sums = tail_sums(values, h);
  return sums.above / sums.total;
}

double empirical_threshold(const Sample& sample, double q) {
  const std::size_t n = sample.size();
  const std::size_t k = top_count(n, q);
  std::vector<double> scratch(sample.values().begin(), sample.values().end());
  const auto cut = scratch.begin() + static_cast<std::ptrdiff_t>(n - k - 1);
  std::nth_element(scratch.begin(), cut, scratch.end());
  return *cut;
}

KappaEstimate kappa_hat_q(const Sample& sample, double q) {
  std::vector<double> scratch(sample.values().begin(), sample.values().end());
  const auto share = top_share_inplace(scratch, q);
  return {share.value, share.threshold, q, sample.size(), EstimatorKind::NaiveQ, false};
}

KappaEstimate kappa_hat_h(const Sample& sample, double h) {
  if (!(h > 0.0)) throw DomainError("kappa_hat_h: h must be > 0");
  return {frozen_share(sample.values(), h), h, std::nullopt, sample.size(), EstimatorKind::FrozenH,
          false};
}

TailFit hill_estimator(const Sample& sample, std::optional<std::size_t> k) {
  const std::size_t n = sample.size();
  std::size_t used = 0;
  if (k) {
    used = *k;
    if (used < 2 || used >= n) {
      std::ostringstream os;
      os << "hill_estimator: k must satisfy 2 <= k < n, got k=" << used << ", n=" << n;
      throw DomainError(os.str());
    }
  } else {
    if (n < 3) throw DomainError("hill_estimator: need at least 3 observations");
    const double c = std::cbrt(static_cast<double>(n));
    used = static_cast<std::size_t>(std::floor(c * c + 1e-9));
    used = std::clamp<std::size_t>(used, 2, n - 1);
  }

  std::vector<double> v(sample.values().begin(), sample.values().end());
  std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(used + 1), v.end(),
                    std::greater<>());
  const double anchor = v[used];
  double log_excess = 0.0;
  for (std::size_t i = 0; i < used; ++i) log_excess += std::log(v[i] / anchor);
  if (!(log_excess > 0.0)) {
    throw NumericError("hill_estimator: top order statistics are tied; exponent is unbounded");
  }
  const double alpha = static_cast<double>(used) / log_excess;
  const double lambda =
      anchor * std::pow(static_cast<double>(used) / static_cast<double>(n), 1.0 / alpha);
  return {alpha, lambda, used, n, TailMethod::Hill};
}

TailFit pareto_mle(const Sample& sample, double x_min) {
  if (!(x_min > 0.0)) throw DomainError("pareto_mle: x_min must be > 0");
  double log_excess = 0.0;
  for (double x : sample.values()) {
    if (x < x_min) {
      std::ostringstream os;
      os << "pareto_mle: value " << x << " lies below x_min=" << x_min;
      throw DomainError(os.str());
    }
    log_excess += std::log(x / x_min);
  }
  if (!(log_excess > 0.0)) {
    throw NumericError("pareto_mle: all values equal x_min; exponent is unbounded");
  }
  const std::size_t n = sample.size();
  return {static_cast<double>(n) / log_excess, x_min, n, n, TailMethod::ParetoMle};
}

KappaEstimate plugin_kappa(const TailFit& fit, double mean_hat, double q) {
  if (!(fit.alpha_hat > 1.0)) {
    std::ostringstream os;
    os << "plugin_kappa: infinite-mean fit, alpha_hat=" << fit.alpha_hat << " <= 1";
    throw DomainError(os.str());
  }
  require_q(q, "plugin_kappa");
  if (!(mean_hat > 0.0) || !(fit.lambda_hat > 0.0)) {
    throw DomainError("plugin_kappa: mean_hat and lambda_hat must be > 0");
  }
  const double a = fit.alpha_hat;
  double value = a / (a - 1.0) * (fit.lambda_hat / mean_hat) * std::pow(q, (a - 1.0) / a);
  const bool clamped = value > 1.0;
  if (clamped) value = 1.0;
  return {value, fit.lambda_hat * std::pow(q, -1.0 / a), q, fit.n, EstimatorKind::PlugIn, clamped};
}

KappaEstimate plugin_kappa(const TailFit& fit, const Sample& sample, double q) {
  return plugin_kappa(fit, sample_mean(sample.values()), q);
}

KappaEstimate stochastic_alpha_kappa(std::span<const double> alphas, std::span<const double> weights,
                                     double q) {
  if (alphas.empty()) throw DomainError("stochastic_alpha_kappa: no exponents given");
  if (alphas.size() != weights.size()) {
    throw DomainError("stochastic_alpha_kappa: alphas and weights differ in length");
  }
  require_q(q, "stochastic_alpha_kappa");
  double total_weight = 0.0;
  double value = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw DomainError("stochastic_alpha_kappa: weights must be >= 0");
    total_weight += weights[i];
    value += weights[i] * kappa_pareto(alphas[i], q);
  }
  if (std::abs(total_weight - 1.0) > 1e-12) {
    throw DomainError("stochastic_alpha_kappa: weights must sum to 1");
  }
  return {value, std::nullopt, q, alphas.size(), EstimatorKind::StochasticAlpha, false};
}

KappaEstimate min_alpha_kappa(std::span<const double> alphas, double q) {
  if (alphas.empty()) throw DomainError("min_alpha_kappa: no exponents given");
  require_q(q, "min_alpha_kappa");
  for (double a : alphas) (void)kappa_pareto(a, q);
  const double lowest = *std::min_element(alphas.begin(), alphas.end());
  return {kappa_pareto(lowest, q), std::pow(q, -1.0 / lowest), q, alphas.size(),
          EstimatorKind::MinAlpha, false};
}

double kappa_h_appended(const Sample& sample, double h, double y) {
  if (!(h > 0.0) || !(y > 0.0)) throw DomainError("kappa_h_appended: h and y must be > 0");
  const auto sums = tail_sums(sample.values(), h);
  return (sums.above + (y > h ? y : 0.0)) / (sums.total + y);
}

double kappa_h_appended_second_derivative(const Sample& sample, double h, double y) {
  if (!(h > 0.0) || !(y > 0.0)) throw DomainError("kappa_h_appended: h and y must be > 0");
  if (y == h) throw DomainError("kappa_h_appended: not differentiable at y = h");
  const auto sums = tail_sums(sample.values(), h);
  const double denom = sums.total + y;
  const double cube = denom * denom * denom;
  return y > h ? -2.0 * (sums.total - sums.above) / cube : 2.0 * sums.above / cube;
}

}  // namespace kappa
