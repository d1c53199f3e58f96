#include "kappa/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "kappa/error.hpp"
#include "kappa/estimators.hpp"

namespace kappa {

namespace {

// Runs `per_run(run_index, scratch)` for every run index. Each worker owns one
// scratch buffer of `buffer_size` doubles. The first failure (lowest run index
// among those observed) is rethrown with context once all workers stop.
template <class PerRun>
void for_each_run(std::size_t runs, std::size_t buffer_size, unsigned threads,
                  std::string_view label, std::size_t n, PerRun&& per_run) {
  const unsigned workers = resolve_threads(threads, runs);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex failure_mutex;
  std::size_t failed_run = std::numeric_limits<std::size_t>::max();
  std::string failure_message;

  auto work = [&] {
    std::vector<double> scratch(buffer_size);
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t run = next.fetch_add(1, std::memory_order_relaxed);
      if (run >= runs) break;
      try {
        per_run(run, std::span<double>(scratch));
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (run < failed_run) {
          failed_run = run;
          failure_message = e.what();
        }
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  if (failed.load()) {
    std::ostringstream os;
    os << "Monte Carlo run failed [" << label << ", n=" << n << ", run=" << failed_run
       << "]: " << failure_message;
    throw McRunError(os.str());
  }
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void require_runs(std::size_t runs, std::size_t minimum, const char* what) {
  if (runs < minimum) {
    std::ostringstream os;
    os << what << ": runs must be >= " << minimum << ", got " << runs;
    throw DomainError(os.str());
  }
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double fisher_z(double r, std::size_t count) {
  if (count <= 3) return 0.0;
  const double clipped = std::clamp(r, -1.0 + 1e-15, 1.0 - 1e-15);
  return std::atanh(clipped) * std::sqrt(static_cast<double>(count - 3));
}

}  // namespace

SamplerFn make_sampler(const DistributionSpec& spec) {
  validate(spec);
  return [spec](std::uint64_t seed, std::span<double> out) { fill_sample(spec, seed, out); };
}

unsigned resolve_threads(unsigned requested, std::size_t runs) {
  unsigned t = requested;
  if (t == 0) t = std::max(1u, std::thread::hardware_concurrency());
  if (runs < t) t = static_cast<unsigned>(std::max<std::size_t>(runs, 1));
  return t;
}

McSummary summarize(std::span<const double> per_run, std::size_t n, double q) {
  require_runs(per_run.size(), 2, "summarize");
  McSummary s;
  s.runs = per_run.size();
  s.n = n;
  s.q = q;
  s.mean = mean_of(per_run);
  s.std = sample_std(per_run, s.mean);

  std::vector<double> sorted(per_run.begin(), per_run.end());
  const std::size_t mid = sorted.size() / 2;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid), sorted.end());
  s.median = sorted[mid];
  if (sorted.size() % 2 == 0) {
    const double lower = *std::max_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid));
    s.median = 0.5 * (lower + s.median);
  }
  return s;
}

McSummary mc_kappa_bias(const SamplerFn& sampler, std::string_view label, double q, std::size_t n,
                        std::size_t runs, std::uint64_t master_seed, McOptions options) {
  require_runs(runs, 2, "mc_kappa_bias");
  (void)top_count(n, q);

  std::vector<double> kappas(runs);
  for_each_run(runs, n, options.threads, label, n, [&](std::size_t run, std::span<double> buf) {
    sampler(derive_run_seed(master_seed, run), buf);
    kappas[run] = top_share_inplace(buf, q).value;
  });
  return summarize(kappas, n, q);
}

McSummary mc_kappa_bias(const DistributionSpec& spec, double q, std::size_t n, std::size_t runs,
                        std::uint64_t master_seed, McOptions options) {
  validate(spec);
  require_runs(runs, 2, "mc_kappa_bias");
  (void)top_count(n, q);
  const double h = population_threshold(spec, q);
  const std::string label = describe(spec);

  std::vector<double> kappas(runs);
  std::vector<double> frozen(runs);
  for_each_run(runs, n, options.threads, label, n, [&](std::size_t run, std::span<double> buf) {
    fill_sample(spec, derive_run_seed(master_seed, run), buf);
    frozen[run] = frozen_share(buf, h);
    kappas[run] = top_share_inplace(buf, q).value;
  });

  McSummary s = summarize(kappas, n, q);
  s.population_kappa = population_kappa_q(spec, q);
  s.frozen_threshold = h;
  s.frozen_mean = mean_of(frozen);
  s.frozen_std = sample_std(frozen, *s.frozen_mean);
  return s;
}

SuperAddRecord mc_superadditivity(std::span<const SamplerFn> samplers, bool identical_laws,
                                  std::span<const std::size_t> sizes, double q, std::size_t runs,
                                  std::uint64_t master_seed, McOptions options) {
  require_runs(runs, 2, "mc_superadditivity");
  if (samplers.empty() || samplers.size() != sizes.size()) {
    throw DomainError("mc_superadditivity: need one size per part and at least one part");
  }
  const std::size_t parts = sizes.size();
  std::vector<std::size_t> offsets(parts + 1, 0);
  for (std::size_t i = 0; i < parts; ++i) {
    (void)top_count(sizes[i], q);
    offsets[i + 1] = offsets[i] + sizes[i];
  }
  const std::size_t total_n = offsets.back();
  (void)top_count(total_n, q);

  std::vector<double> full(runs);
  std::vector<double> part_kappa(parts * runs);
  std::vector<double> part_weight(parts * runs);

  // Scratch layout: [0, total_n) holds the merged sample, [total_n, 2 total_n)
  // a copy that the merged estimate reorders.
  for_each_run(runs, 2 * total_n, options.threads, "superadditivity", total_n,
               [&](std::size_t run, std::span<double> buf) {
                 const std::uint64_t run_seed = derive_run_seed(master_seed, run);
                 auto merged = buf.first(total_n);
                 for (std::size_t i = 0; i < parts; ++i) {
                   samplers[i](derive_run_seed(run_seed, i), merged.subspan(offsets[i], sizes[i]));
                 }
                 auto copy = buf.subspan(total_n, total_n);
                 std::copy(merged.begin(), merged.end(), copy.begin());
                 const auto whole = top_share_inplace(copy, q);
                 full[run] = whole.value;
                 for (std::size_t i = 0; i < parts; ++i) {
                   const auto share = top_share_inplace(merged.subspan(offsets[i], sizes[i]), q);
                   part_kappa[i * runs + run] = share.value;
                   part_weight[i * runs + run] = share.total / whole.total;
                 }
               });

  SuperAddRecord rec;
  rec.identical_laws = identical_laws;
  rec.runs = runs;
  rec.sizes.assign(sizes.begin(), sizes.end());
  rec.e_kappa_full = mean_of(full);

  std::vector<double> coeff(parts);
  for (std::size_t i = 0; i < parts; ++i) {
    std::span<const double> kappa_i(part_kappa.data() + i * runs, runs);
    std::span<const double> weight_i(part_weight.data() + i * runs, runs);
    rec.part_means.push_back(mean_of(kappa_i));
    rec.weight_means.push_back(mean_of(weight_i));
    coeff[i] = static_cast<double>(sizes[i]) / static_cast<double>(total_n);
  }
  rec.weighted_avg_parts = 0.0;
  for (std::size_t i = 0; i < parts; ++i) {
    rec.weighted_avg_parts += (identical_laws ? coeff[i] : rec.weight_means[i]) * rec.part_means[i];
  }
  rec.gap = rec.e_kappa_full - rec.weighted_avg_parts;

  // Paired per-run differences; realized S_i/S weights for mixed laws.
  std::vector<double> diff(runs);
  for (std::size_t r = 0; r < runs; ++r) {
    double rhs = 0.0;
    for (std::size_t i = 0; i < parts; ++i) {
      const double w = identical_laws ? coeff[i] : part_weight[i * runs + r];
      rhs += w * part_kappa[i * runs + r];
    }
    diff[r] = full[r] - rhs;
  }
  rec.gap_std_error = sample_std(diff, mean_of(diff)) / std::sqrt(static_cast<double>(runs));
  rec.z_score = rec.gap_std_error > 0.0 ? rec.gap / rec.gap_std_error : 0.0;
  return rec;
}

SuperAddRecord mc_superadditivity(std::span<const DistributionSpec> specs,
                                  std::span<const std::size_t> sizes, double q, std::size_t runs,
                                  std::uint64_t master_seed, McOptions options) {
  std::vector<SamplerFn> samplers;
  samplers.reserve(specs.size());
  bool identical = true;
  for (const auto& spec : specs) {
    samplers.push_back(make_sampler(spec));
    identical = identical && spec == specs.front();
  }
  return mc_superadditivity(samplers, identical, sizes, q, runs, master_seed, options);
}

ConvergenceResult mc_monotone_convergence(const DistributionSpec& spec, double h,
                                          std::span<const std::size_t> sizes, std::size_t runs,
                                          std::uint64_t master_seed, McOptions options) {
  validate(spec);
  require_runs(runs, 2, "mc_monotone_convergence");
  if (!(h > 0.0)) throw DomainError("mc_monotone_convergence: h must be > 0");
  if (sizes.size() < 3) throw DomainError("mc_monotone_convergence: need at least 3 sizes");
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    if (sizes[j] == 0 || (j > 0 && sizes[j] <= sizes[j - 1])) {
      throw DomainError("mc_monotone_convergence: sizes must be positive and strictly increasing");
    }
  }

  ConvergenceResult result;
  result.h = h;
  result.population_kappa_h = population_kappa_h(spec, h);
  const std::string label = describe(spec);
  std::vector<double> shares(runs);
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    const std::size_t n = sizes[j];
    const std::uint64_t size_seed = derive_run_seed(master_seed, j);
    for_each_run(runs, n, options.threads, label, n, [&](std::size_t run, std::span<double> buf) {
      fill_sample(spec, derive_run_seed(size_seed, run), buf);
      shares[run] = frozen_share(buf, h);
    });
    const double mean = mean_of(shares);
    result.points.push_back({n, mean, sample_std(shares, mean) / std::sqrt(static_cast<double>(runs))});
  }
  return result;
}

ScalingFit fit_bias_scaling(std::span<const ScalingPoint> points) {
  if (points.size() < 3) throw DomainError("fit_bias_scaling: need at least 3 points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].bias > 0.0)) {
      std::ostringstream os;
      os << "fit_bias_scaling: bias at n=" << points[i].n << " is " << points[i].bias
         << "; the estimator is expected to sit below the population value";
      throw DomainError(os.str());
    }
    if (!(points[i].n > 0.0)) throw DomainError("fit_bias_scaling: n must be > 0");
    for (std::size_t j = 0; j < i; ++j) {
      if (points[j].n == points[i].n) throw DomainError("fit_bias_scaling: n values must be distinct");
    }
  }

  const auto m = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += std::log(p.n);
    my += std::log(p.bias);
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    const double dx = std::log(p.n) - mx;
    const double dy = std::log(p.bias) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;

  ScalingFit fit;
  fit.exponent_hat = -slope;
  fit.c_hat = std::exp(intercept);
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.points.assign(points.begin(), points.end());
  return fit;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

CorrRecord mc_kappa_sum_dependence(const SamplerFn& sampler, std::string_view label, double q,
                                   std::size_t n, std::size_t runs, std::uint64_t master_seed,
                                   McOptions options, std::size_t buckets) {
  require_runs(runs, 100, "mc_kappa_sum_dependence");
  if (buckets < 2 || buckets > runs) throw DomainError("mc_kappa_sum_dependence: need 2 <= buckets <= runs");
  (void)top_count(n, q);

  std::vector<double> kappas(runs);
  std::vector<double> sums(runs);
  for_each_run(runs, n, options.threads, label, n, [&](std::size_t run, std::span<double> buf) {
    sampler(derive_run_seed(master_seed, run), buf);
    const auto share = top_share_inplace(buf, q);
    kappas[run] = share.value;
    sums[run] = share.total;
  });

  CorrRecord rec;
  rec.runs = runs;
  const auto [kmin, kmax] = std::minmax_element(kappas.begin(), kappas.end());
  const auto [smin, smax] = std::minmax_element(sums.begin(), sums.end());
  rec.degenerate = *kmin == *kmax || *smin == *smax;
  if (!rec.degenerate) {
    rec.pearson = pearson(sums, kappas);
    rec.spearman = spearman(sums, kappas);
    rec.pearson_z = fisher_z(rec.pearson, runs);
    rec.spearman_z = fisher_z(rec.spearman, runs);
  }

  std::vector<std::size_t> order(runs);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sums[a] < sums[b]; });
  for (std::size_t b = 0; b < buckets; ++b) {
    const std::size_t lo = b * runs / buckets;
    const std::size_t hi = (b + 1) * runs / buckets;
    double ks = 0.0, ss = 0.0;
    for (std::size_t t = lo; t < hi; ++t) {
      ks += kappas[order[t]];
      ss += sums[order[t]];
    }
    const auto count = static_cast<double>(hi - lo);
    rec.bucket_means.push_back({b, ss / count, ks / count});
  }
  return rec;
}

CorrRecord mc_kappa_sum_dependence(const DistributionSpec& spec, double q, std::size_t n,
                                   std::size_t runs, std::uint64_t master_seed, McOptions options,
                                   std::size_t buckets) {
  return mc_kappa_sum_dependence(make_sampler(spec), describe(spec), q, n, runs, master_seed, options,
                                 buckets);
}

MixtureBiasRecord mc_mixture_bias(const MixtureSpec& mix, double q, std::size_t n, std::size_t runs,
                                  std::uint64_t master_seed, McOptions options) {
  validate(mix);
  MixtureBiasRecord rec;
  rec.summary = mc_kappa_bias(DistributionSpec{mix}, q, n, runs, master_seed, options);
  rec.mc_mean = rec.summary.mean;
  rec.population_mixture_kappa = kappa_mixture(mix, q);

  std::vector<double> alphas;
  double mean_alpha = 0.0;
  for (std::size_t i = 0; i < mix.components.size(); ++i) {
    alphas.push_back(mix.components[i].alpha);
    mean_alpha += mix.weights[i] * mix.components[i].alpha;
  }
  rec.weighted_component_kappa = stochastic_alpha_kappa(alphas, mix.weights, q).value;
  rec.mean_alpha_kappa = kappa_pareto(mean_alpha, q);
  return rec;
}

}  // namespace kappa
