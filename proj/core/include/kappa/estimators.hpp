#pragma once

// Sample-based concentration estimators and tail-exponent fits.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "kappa/distributions.hpp"

namespace kappa {

enum class EstimatorKind { NaiveQ, FrozenH, PlugIn, StochasticAlpha, MinAlpha };
enum class TailMethod { Hill, ParetoMle };

std::string_view to_string(EstimatorKind kind) noexcept;
std::string_view to_string(TailMethod method) noexcept;

/// Output of every concentration estimator.
///
/// `threshold` is the cut the share was measured above: the empirical
/// threshold for NaiveQ, the frozen h for FrozenH, lambda * q^(-1/alpha) for
/// PlugIn and the unit-scale Pareto cut for MinAlpha. It is empty for
/// StochasticAlpha, which averages over several cuts. `n` is the sample size,
/// or the number of exponents for the model-averaged kinds.
struct KappaEstimate {
  double value = 0.0;
  std::optional<double> threshold;
  std::optional<double> q;
  std::size_t n = 0;
  EstimatorKind kind = EstimatorKind::NaiveQ;
  bool clamped = false;
};

struct TailFit {
  double alpha_hat = 0.0;
  double lambda_hat = 0.0;
  std::size_t k_used = 0;
  std::size_t n = 0;
  TailMethod method = TailMethod::Hill;
};

/// floor(q * n), robust to q * n landing a few ulps below an integer.
/// Throws DomainError unless q in (0,1) and q * n >= 1.
std::size_t top_count(std::size_t n, double q);

/// hat h(q) = inf{h : #{x > h} <= q n}: the ceil((1-q) n)-th smallest value.
double empirical_threshold(const Sample& sample, double q);

/// Share of the total held by the floor(q n) largest values.
KappaEstimate kappa_hat_q(const Sample& sample, double q);

/// Share of the total held by values strictly above a frozen cut h.
KappaEstimate kappa_hat_h(const Sample& sample, double h);

/// Hill fit on the k largest order statistics. k defaults to floor(n^(2/3)),
/// clamped to [2, n-1].
TailFit hill_estimator(const Sample& sample, std::optional<std::size_t> k = std::nullopt);

/// Maximum likelihood Pareto exponent with known lower bound x_min.
TailFit pareto_mle(const Sample& sample, double x_min);

/// Closed-form tail share evaluated at the fitted (alpha, lambda). Values
/// above 1 are clamped and flagged. Throws DomainError if alpha_hat <= 1.
KappaEstimate plugin_kappa(const TailFit& fit, double mean_hat, double q);

/// plugin_kappa with the sample mean as mean_hat.
KappaEstimate plugin_kappa(const TailFit& fit, const Sample& sample, double q);

/// sum_i w_i * kappa_pareto(alpha_i, q).
KappaEstimate stochastic_alpha_kappa(std::span<const double> alphas, std::span<const double> weights,
                                     double q);

/// kappa_pareto at the smallest exponent.
KappaEstimate min_alpha_kappa(std::span<const double> alphas, double q);

// In-place kernels used by the Monte Carlo engine.

struct TopShare {
  double value;
  double threshold;
  double total;
};

/// kappa_hat_q over a scratch buffer. Reorders `values`. The total is summed
/// in the incoming order and the top block in descending order, so the result
/// is independent of the selection algorithm.
TopShare top_share_inplace(std::span<double> values, double q);

/// Sum of values strictly above h, over the sum of all values.
double frozen_share(std::span<const double> values, double h);

// Sensitivity of the frozen-threshold share to one extra observation.

/// kappa_hat_h(sample + {y}), with the cut held at h.
double kappa_h_appended(const Sample& sample, double h, double y);

/// Exact d^2/dy^2 of kappa_h_appended away from y = h:
///   y > h: -2 (S - A) / (S + y)^3   (concave)
///   y < h:  2 A / (S + y)^3         (convex)
/// where S is the base total and A the base sum above h.
double kappa_h_appended_second_derivative(const Sample& sample, double h, double y);

}  // namespace kappa
