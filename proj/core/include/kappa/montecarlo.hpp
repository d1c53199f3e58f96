#pragma once

// Reproducible Monte Carlo experiments on the concentration estimators.
//
// Every run r draws from the stream seeded by derive_run_seed(master_seed, r).
// Runs are distributed over worker threads, each owning one scratch buffer,
// and per-run results are stored by run index and reduced in index order.
// Results are therefore bit-identical for any thread count.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kappa/distributions.hpp"
#include "kappa/rng.hpp"

namespace kappa {

struct McOptions {
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Fills `out` with one sample drawn from the stream seeded by `seed`.
using SamplerFn = std::function<void(std::uint64_t seed, std::span<double> out)>;

SamplerFn make_sampler(const DistributionSpec& spec);

/// Number of workers actually used for `runs` runs.
unsigned resolve_threads(unsigned requested, std::size_t runs);

struct McSummary {
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;  // sample standard deviation across runs
  std::size_t runs = 0;
  std::size_t n = 0;
  double q = 0.0;
  // Present when the law is known: population kappa_q, and the same runs
  // measured above the frozen population threshold h(q).
  std::optional<double> population_kappa;
  std::optional<double> frozen_threshold;
  std::optional<double> frozen_mean;
  std::optional<double> frozen_std;
};

/// Mean, median and sample std of per-run values (runs >= 2).
McSummary summarize(std::span<const double> per_run, std::size_t n, double q);

/// Distribution of kappa_hat_q over `runs` independent samples of size n.
McSummary mc_kappa_bias(const DistributionSpec& spec, double q, std::size_t n, std::size_t runs,
                        std::uint64_t master_seed, McOptions options = {});

/// Same, for an arbitrary sampler; no population values are attached.
McSummary mc_kappa_bias(const SamplerFn& sampler, std::string_view label, double q, std::size_t n,
                        std::size_t runs, std::uint64_t master_seed, McOptions options = {});

struct SuperAddRecord {
  double e_kappa_full = 0.0;        // mean kappa_hat_q on the merged sample
  double weighted_avg_parts = 0.0;  // sum_i w_i * mean kappa_hat_q(part i)
  double gap = 0.0;                 // e_kappa_full - weighted_avg_parts
  double gap_std_error = 0.0;       // from per-run paired differences
  double z_score = 0.0;             // gap / gap_std_error (0 when the error is 0)
  bool identical_laws = true;       // w_i = n_i/n if true, else mean(S_i/S)
  std::size_t runs = 0;
  std::vector<std::size_t> sizes;
  std::vector<double> part_means;
  std::vector<double> weight_means;  // mean realized S_i/S
};

/// Compares kappa_hat_q on merged samples with the weighted average over
/// their parts. Part i of run r uses seed derive_run_seed(derive_run_seed(master, r), i).
SuperAddRecord mc_superadditivity(std::span<const DistributionSpec> specs,
                                  std::span<const std::size_t> sizes, double q, std::size_t runs,
                                  std::uint64_t master_seed, McOptions options = {});

SuperAddRecord mc_superadditivity(std::span<const SamplerFn> samplers, bool identical_laws,
                                  std::span<const std::size_t> sizes, double q, std::size_t runs,
                                  std::uint64_t master_seed, McOptions options = {});

struct ConvergencePoint {
  std::size_t n = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

struct ConvergenceResult {
  double h = 0.0;
  std::vector<ConvergencePoint> points;
  std::optional<double> population_kappa_h;
};

/// Mean frozen-threshold share kappa_hat_h over increasing sample sizes.
ConvergenceResult mc_monotone_convergence(const DistributionSpec& spec, double h,
                                          std::span<const std::size_t> sizes, std::size_t runs,
                                          std::uint64_t master_seed, McOptions options = {});

struct ScalingPoint {
  double n = 0.0;
  double bias = 0.0;
};

struct ScalingFit {
  double c_hat = 0.0;
  double exponent_hat = 0.0;
  double r_squared = 0.0;
  std::vector<ScalingPoint> points;
};

/// Least squares of ln(bias) on ln(n): bias ~ c * n^(-exponent).
ScalingFit fit_bias_scaling(std::span<const ScalingPoint> points);

struct BucketMean {
  std::size_t bucket = 0;
  double mean_sum = 0.0;
  double mean_kappa = 0.0;
};

struct CorrRecord {
  double pearson = 0.0;
  double spearman = 0.0;
  double pearson_z = 0.0;  // Fisher z statistic
  double spearman_z = 0.0;
  bool degenerate = false;  // a constant series; correlations reported as 0
  std::size_t runs = 0;
  std::vector<BucketMean> bucket_means;  // by quantile bucket of the sample sum
};

/// Dependence between kappa_hat_q and the sample total across runs.
CorrRecord mc_kappa_sum_dependence(const DistributionSpec& spec, double q, std::size_t n,
                                   std::size_t runs, std::uint64_t master_seed,
                                   McOptions options = {}, std::size_t buckets = 10);

CorrRecord mc_kappa_sum_dependence(const SamplerFn& sampler, std::string_view label, double q,
                                   std::size_t n, std::size_t runs, std::uint64_t master_seed,
                                   McOptions options = {}, std::size_t buckets = 10);

/// Pearson correlation; 0 if either series is constant.
double pearson(std::span<const double> x, std::span<const double> y);
/// Spearman rank correlation with average ranks for ties; 0 if either series is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct MixtureBiasRecord {
  double mc_mean = 0.0;
  double population_mixture_kappa = 0.0;
  double weighted_component_kappa = 0.0;  // sum w_i kappa_pareto(alpha_i, q)
  double mean_alpha_kappa = 0.0;          // kappa_pareto(sum w_i alpha_i, q)
  McSummary summary;
};

MixtureBiasRecord mc_mixture_bias(const MixtureSpec& mix, double q, std::size_t n, std::size_t runs,
                                  std::uint64_t master_seed, McOptions options = {});

}  // namespace kappa
