#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "kappa/distributions.hpp"
#include "kappa/error.hpp"
#include "kappa/estimators.hpp"
#include "kappa/montecarlo.hpp"

namespace kappa {
namespace {

const DistributionSpec kPareto11 = ParetoParams{1.1, 1.0};

SamplerFn constant_sampler(double value) {
  return [value](std::uint64_t, std::span<double> out) { std::fill(out.begin(), out.end(), value); };
}

TEST(ResolveThreads, Bounds) {
  EXPECT_EQ(resolve_threads(4, 100), 4u);
  EXPECT_EQ(resolve_threads(8, 3), 3u);
  EXPECT_GE(resolve_threads(0, 100), 1u);
}

TEST(Summarize, MeanMedianStd) {
  const std::vector<double> v{1, 2, 3, 4};
  const auto s = summarize(v, 10, 0.1);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(5.0 / 3.0));
  const std::vector<double> odd{5, 1, 3};
  EXPECT_DOUBLE_EQ(summarize(odd, 10, 0.1).median, 3.0);
  const std::vector<double> one{1.0};
  EXPECT_THROW(summarize(one, 10, 0.1), DomainError);
}

TEST(McKappaBias, IdenticalAcrossThreadCounts) {
  const auto a = mc_kappa_bias(kPareto11, 0.01, 1000, 257, 42, {1});
  for (unsigned t : {2u, 3u, 8u}) {
    const auto b = mc_kappa_bias(kPareto11, 0.01, 1000, 257, 42, {t});
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.median, b.median);
    EXPECT_EQ(a.std, b.std);
    EXPECT_EQ(a.frozen_mean, b.frozen_mean);
  }
  const auto c = mc_kappa_bias(kPareto11, 0.01, 1000, 257, 43, {1});
  EXPECT_NE(a.mean, c.mean);
}

TEST(McKappaBias, ConstantSamplerGivesUniformShare) {
  const auto s = mc_kappa_bias(constant_sampler(3.0), "constant", 0.05, 200, 50, 1, {2});
  EXPECT_DOUBLE_EQ(s.mean, 10.0 / 200.0);
  EXPECT_NEAR(s.std, 0.0, 1e-15);
  EXPECT_EQ(s.median, 10.0 / 200.0);
  EXPECT_FALSE(s.population_kappa.has_value());
}

TEST(McKappaBias, PopulationFieldsAttached) {
  const auto s = mc_kappa_bias(kPareto11, 0.01, 1000, 50, 1, {1});
  EXPECT_NEAR(*s.population_kappa, 0.657933, 1e-6);
  EXPECT_NEAR(*s.frozen_threshold, 65.79332246575679, 1e-9);
  EXPECT_EQ(s.runs, 50u);
  EXPECT_EQ(s.n, 1000u);
}

TEST(McKappaBias, DownwardBiasedForFatTail) {
  const auto s = mc_kappa_bias(kPareto11, 0.01, 1000, 2000, 11, {});
  EXPECT_LT(s.mean, 0.657933);
  EXPECT_LT(s.median, s.mean);
}

TEST(McKappaBias, ThinTailIsNearlyUnbiased) {
  const DistributionSpec thin = ParetoParams{5.0, 1.0};
  const auto s = mc_kappa_bias(thin, 0.01, 10'000, 200, 3, {});
  EXPECT_NEAR(s.mean, kappa_pareto(5.0, 0.01), 0.005);
}

TEST(McKappaBias, Errors) {
  EXPECT_THROW(mc_kappa_bias(kPareto11, 0.01, 10, 100, 1), DomainError);
  EXPECT_THROW(mc_kappa_bias(kPareto11, 0.01, 1000, 1, 1), DomainError);
  EXPECT_THROW(mc_kappa_bias(ParetoParams{0.9, 1.0}, 0.01, 1000, 10, 1), DomainError);
}

TEST(McKappaBias, FailingRunIsReportedWithContext) {
  const SamplerFn bad = [](std::uint64_t seed, std::span<double> out) {
    if (seed == derive_run_seed(9, 5)) throw std::runtime_error("boom");
    std::fill(out.begin(), out.end(), 1.0);
  };
  for (unsigned t : {1u, 4u}) {
    try {
      mc_kappa_bias(bad, "faulty", 0.1, 100, 20, 9, {t});
      FAIL();
    } catch (const McRunError& e) {
      const std::string msg = e.what();
      EXPECT_NE(msg.find("faulty"), std::string::npos);
      EXPECT_NE(msg.find("run=5"), std::string::npos);
      EXPECT_NE(msg.find("boom"), std::string::npos);
    }
  }
}

TEST(SuperAdditivity, SinglePartHasZeroGap) {
  const std::vector<DistributionSpec> specs{kPareto11};
  const std::vector<std::size_t> sizes{500};
  const auto rec = mc_superadditivity(specs, sizes, 0.01, 200, 5, {});
  EXPECT_EQ(rec.gap, 0.0);
  EXPECT_EQ(rec.z_score, 0.0);
  EXPECT_EQ(rec.e_kappa_full, rec.part_means[0]);
}

TEST(SuperAdditivity, MergedEstimateDominates) {
  const std::vector<DistributionSpec> specs{kPareto11, kPareto11};
  const std::vector<std::size_t> sizes{500, 500};
  const auto rec = mc_superadditivity(specs, sizes, 0.01, 3000, 2024, {});
  EXPECT_TRUE(rec.identical_laws);
  EXPECT_GT(rec.gap, 0.0);
  EXPECT_GT(rec.z_score, 3.0);
  EXPECT_NEAR(rec.weight_means[0] + rec.weight_means[1], 1.0, 1e-12);
}

TEST(SuperAdditivity, MixedLawsUseRealizedWeights) {
  const std::vector<DistributionSpec> specs{ParetoParams{1.2, 1.0}, ParetoParams{2.0, 1.0}};
  const std::vector<std::size_t> sizes{400, 600};
  const auto rec = mc_superadditivity(specs, sizes, 0.01, 500, 8, {});
  EXPECT_FALSE(rec.identical_laws);
  EXPECT_NEAR(rec.weighted_avg_parts,
              rec.weight_means[0] * rec.part_means[0] + rec.weight_means[1] * rec.part_means[1], 1e-15);
}

TEST(SuperAdditivity, ThreadIndependentAndValidated) {
  const std::vector<DistributionSpec> specs{kPareto11, kPareto11, kPareto11};
  const std::vector<std::size_t> sizes{100, 200, 300};
  const auto a = mc_superadditivity(specs, sizes, 0.01, 100, 3, {1});
  const auto b = mc_superadditivity(specs, sizes, 0.01, 100, 3, {5});
  EXPECT_EQ(a.gap, b.gap);
  EXPECT_EQ(a.gap_std_error, b.gap_std_error);

  const std::vector<std::size_t> tiny{50, 50};
  const std::vector<DistributionSpec> two{kPareto11, kPareto11};
  EXPECT_THROW(mc_superadditivity(two, tiny, 0.01, 10, 1), DomainError);
  EXPECT_THROW(mc_superadditivity(two, sizes, 0.01, 10, 1), DomainError);
}

TEST(Convergence, MeansRiseTowardPopulationValue) {
  const double h = theoretical_threshold({1.1, 1.0}, 0.01);
  const std::vector<std::size_t> sizes{100, 1000, 10'000};
  const auto res = mc_monotone_convergence(kPareto11, h, sizes, 2000, 77, {});
  ASSERT_EQ(res.points.size(), 3u);
  EXPECT_NEAR(*res.population_kappa_h, 0.657933, 1e-6);
  for (std::size_t j = 0; j < res.points.size(); ++j) {
    EXPECT_LT(res.points[j].mean, *res.population_kappa_h);
    if (j > 0) EXPECT_GT(res.points[j].mean, res.points[j - 1].mean);
  }
}

TEST(Convergence, CutBelowSupportGivesOne) {
  const std::vector<std::size_t> sizes{10, 20, 30};
  const auto res = mc_monotone_convergence(kPareto11, 0.5, sizes, 10, 1, {});
  for (const auto& p : res.points) {
    EXPECT_EQ(p.mean, 1.0);
    EXPECT_EQ(p.std_error, 0.0);
  }
  EXPECT_EQ(*res.population_kappa_h, 1.0);
}

TEST(Convergence, Errors) {
  const std::vector<std::size_t> two{10, 20};
  const std::vector<std::size_t> unordered{10, 30, 20};
  const std::vector<std::size_t> ok{10, 20, 30};
  EXPECT_THROW(mc_monotone_convergence(kPareto11, 2.0, two, 10, 1), DomainError);
  EXPECT_THROW(mc_monotone_convergence(kPareto11, 2.0, unordered, 10, 1), DomainError);
  EXPECT_THROW(mc_monotone_convergence(kPareto11, 0.0, ok, 10, 1), DomainError);
}

TEST(ScalingFitTest, ExactPowerLaw) {
  std::vector<ScalingPoint> pts;
  for (double n : {1e2, 1e3, 1e4, 1e5}) pts.push_back({n, 2.0 * std::pow(n, -0.1)});
  const auto fit = fit_bias_scaling(pts);
  EXPECT_NEAR(fit.c_hat, 2.0, 1e-10);
  EXPECT_NEAR(fit.exponent_hat, 0.1, 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_EQ(fit.points.size(), 4u);
}

TEST(ScalingFitTest, TableBiasPoints) {
  // Least squares on the six reference bias values (kappa minus mean), computed independently.
  const double kappa = 0.657933;
  const std::vector<ScalingPoint> pts{{1e3, kappa - 0.405235}, {1e4, kappa - 0.485916},
                                      {1e5, kappa - 0.539028}, {1e6, kappa - 0.581384},
                                      {1e7, kappa - 0.591506}, {1e8, kappa - 0.606513}};
  const auto fit = fit_bias_scaling(pts);
  EXPECT_NEAR(fit.exponent_hat, 0.13966541, 1e-6);
  EXPECT_NEAR(fit.c_hat, 0.61653541, 1e-6);
  EXPECT_NEAR(fit.r_squared, 0.97850207, 1e-6);
}

TEST(ScalingFitTest, Errors) {
  const std::vector<ScalingPoint> two{{10, 1}, {100, 0.5}};
  const std::vector<ScalingPoint> negative{{10, 1}, {100, -0.5}, {1000, 0.2}};
  const std::vector<ScalingPoint> repeated{{10, 1}, {10, 0.5}, {1000, 0.2}};
  EXPECT_THROW(fit_bias_scaling(two), DomainError);
  EXPECT_THROW(fit_bias_scaling(negative), DomainError);
  EXPECT_THROW(fit_bias_scaling(repeated), DomainError);
}

TEST(Correlation, PearsonSpearmanBasics) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{2, 4, 6, 8, 10};
  const std::vector<double> cubic{1, 8, 27, 64, 125};
  const std::vector<double> flat{3, 3, 3, 3, 3};
  EXPECT_NEAR(pearson(x, y), 1.0, 1e-15);
  EXPECT_NEAR(spearman(x, cubic), 1.0, 1e-15);
  EXPECT_LT(pearson(x, cubic), 1.0);
  EXPECT_EQ(pearson(x, flat), 0.0);
  EXPECT_EQ(spearman(flat, x), 0.0);
  const std::vector<double> ties{1, 1, 2, 2};
  const std::vector<double> rising{1, 2, 3, 4};
  EXPECT_NEAR(spearman(ties, rising), 2.0 / std::sqrt(5.0), 1e-12);
}

TEST(Correlation, DegenerateSampler) {
  const auto rec = mc_kappa_sum_dependence(constant_sampler(2.0), "constant", 0.1, 100, 200, 1, {});
  EXPECT_TRUE(rec.degenerate);
  EXPECT_EQ(rec.pearson, 0.0);
  EXPECT_EQ(rec.spearman, 0.0);
}

TEST(Correlation, PositiveDependenceForFatTail) {
  const auto rec = mc_kappa_sum_dependence(kPareto11, 0.01, 1000, 2000, 6, {});
  EXPECT_FALSE(rec.degenerate);
  EXPECT_GT(rec.spearman, 0.0);
  EXPECT_GT(rec.spearman_z, 5.0);
  ASSERT_EQ(rec.bucket_means.size(), 10u);
  EXPECT_GT(rec.bucket_means.back().mean_kappa, rec.bucket_means.front().mean_kappa);
  for (std::size_t b = 1; b < rec.bucket_means.size(); ++b) {
    EXPECT_GE(rec.bucket_means[b].mean_sum, rec.bucket_means[b - 1].mean_sum);
  }
}

TEST(Correlation, Errors) {
  EXPECT_THROW(mc_kappa_sum_dependence(kPareto11, 0.01, 1000, 50, 1), DomainError);
  EXPECT_THROW(mc_kappa_sum_dependence(kPareto11, 0.01, 1000, 200, 1, {}, 1), DomainError);
}

TEST(MixtureBias, OrderingOfReferenceValues) {
  const auto mix = MixtureSpec::unit_mean({0.5, 0.5}, std::vector{1.2, 1.8});
  const auto rec = mc_mixture_bias(mix, 0.01, 1000, 500, 4, {});
  EXPECT_NEAR(rec.population_mixture_kappa, 0.2977261892722787, 1e-9);
  EXPECT_NEAR(rec.weighted_component_kappa, 0.2966569249313831, 1e-12);
  EXPECT_NEAR(rec.mean_alpha_kappa, 0.2154434690031884, 1e-12);
  EXPECT_GE(rec.population_mixture_kappa, rec.weighted_component_kappa);
  EXPECT_GE(rec.weighted_component_kappa, rec.mean_alpha_kappa);
  EXPECT_LT(rec.mc_mean, rec.population_mixture_kappa);
  EXPECT_EQ(rec.summary.runs, 500u);
}

}  // namespace
}  // namespace kappa
