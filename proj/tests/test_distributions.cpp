#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kappa/distributions.hpp"
#include "kappa/error.hpp"
#include "kappa/rng.hpp"
#include "oracles.hpp"

namespace kappa {
namespace {

TEST(Sample, ParetoValuesRespectLowerBound) {
  const auto s = sample(ParetoParams{1.1, 1.0}, 5, 42);
  ASSERT_EQ(s.size(), 5u);
  for (double v : s.values()) EXPECT_GE(v, 1.0);
  EXPECT_EQ(s.seed(), 42u);
}

TEST(Sample, EmptySampleRejected) {
  EXPECT_THROW(sample(ParetoParams{1.1, 1.0}, 0, 1), DomainError);
  EXPECT_THROW(Sample(std::vector<double>{}), DomainError);
  EXPECT_THROW(Sample(std::vector<double>{1.0, -2.0}), DomainError);
  EXPECT_THROW(Sample(std::vector<double>{1.0, 0.0}), DomainError);
}

TEST(Sample, InvalidParametersRejected) {
  EXPECT_THROW(sample(ParetoParams{1.0, 1.0}, 3, 1), DomainError);
  EXPECT_THROW(sample(ParetoParams{0.5, 1.0}, 3, 1), DomainError);
  EXPECT_THROW(sample(ParetoParams{2.0, 0.0}, 3, 1), DomainError);
  EXPECT_THROW(sample(LognormalParams{0.0, 0.0}, 3, 1), DomainError);
  EXPECT_THROW(sample(MixtureSpec{{0.5, 0.6}, {{1.5, 1.0 / 3.0}, {2.0, 0.5}}}, 3, 1), DomainError);
  EXPECT_THROW(sample(MixtureSpec{{1.0}, {{1.5, 1.0}}}, 3, 1), DomainError);  // not unit mean
  EXPECT_THROW(sample(MixtureSpec{}, 3, 1), DomainError);
}

TEST(Sample, InverseCdfAtQuarter) {
  EXPECT_DOUBLE_EQ(pareto_from_uniform(ParetoParams{2.0, 1.0}, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(pareto_from_uniform(ParetoParams{1.0 + 1e-9, 3.0}, 1.0 - 1e-16), 3.0);
}

TEST(Sample, ParetoIsInverseCdfOfTheProjectStream) {
  const ParetoParams p{1.7, 2.5};
  const auto s = sample(p, 100, 99);
  Xoshiro256 rng(99);
  for (double v : s.values()) EXPECT_EQ(v, p.x_min * std::pow(uniform_open01(rng), -1.0 / p.alpha));
}

TEST(Sample, BitReproducibleGivenSeed) {
  const std::vector<DistributionSpec> specs{ParetoParams{1.1, 1.0}, LognormalParams{0.5, 2.0},
                                            MixtureSpec::unit_mean({0.3, 0.7}, std::vector{1.2, 2.5})};
  for (const auto& spec : specs) {
    const auto a = sample(spec, 1001, 17);
    const auto b = sample(spec, 1001, 17);
    const auto c = sample(spec, 1001, 18);
    ASSERT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    EXPECT_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
  }
}

TEST(Sample, ParetoKolmogorovSmirnov) {
  constexpr std::size_t kN = 1'000'000;
  const ParetoParams p{1.1, 1.0};
  const auto s = sample(p, kN, 12345);
  const double d = oracle::ks_statistic(std::vector<double>(s.values().begin(), s.values().end()),
                                        [&](double x) { return 1.0 - std::pow(p.x_min / x, p.alpha); });
  // 1% critical value of the one-sample KS statistic.
  EXPECT_LT(d, 1.628 / std::sqrt(static_cast<double>(kN)));
}

TEST(Sample, LognormalLogMomentsAndKs) {
  constexpr std::size_t kN = 200'000;
  const LognormalParams p{0.3, 1.7};
  const auto s = sample(p, kN, 5);
  std::vector<double> logs;
  for (double v : s.values()) logs.push_back(std::log(v));
  double m = 0.0, v2 = 0.0;
  for (double x : logs) m += x;
  m /= kN;
  for (double x : logs) v2 += (x - m) * (x - m);
  EXPECT_NEAR(m, 0.3, 5.0 * 1.7 / std::sqrt(kN));
  EXPECT_NEAR(std::sqrt(v2 / (kN - 1)), 1.7, 0.01);
  const double d = oracle::ks_statistic(logs, [&](double x) {
    return 0.5 * std::erfc(-(x - p.mu) / (p.sigma * std::sqrt(2.0)));
  });
  EXPECT_LT(d, 1.628 / std::sqrt(static_cast<double>(kN)));
}

TEST(Sample, MixtureTailMassAtSolvedThreshold) {
  const auto mix = MixtureSpec::unit_mean({0.5, 0.5}, std::vector{1.2, 1.8});
  constexpr std::size_t kN = 1'000'000;
  const auto s = sample(mix, kN, 77);
  const double h = mixture_threshold(mix, 0.01);
  const auto above = std::count_if(s.values().begin(), s.values().end(), [h](double x) { return x > h; });
  EXPECT_NEAR(static_cast<double>(above) / kN, 0.01, 4.0 * std::sqrt(0.01 * 0.99 / kN));
}

TEST(TheoreticalThreshold, Examples) {
  EXPECT_NEAR(theoretical_threshold({1.1, 1.0}, 0.01), 65.79332246575679, 1e-10);
  EXPECT_DOUBLE_EQ(theoretical_threshold({2.0, 1.0}, 0.25), 2.0);
  EXPECT_NEAR(theoretical_threshold({1.7, 3.0}, 1.0 - 1e-12), 3.0, 1e-10);
  EXPECT_THROW(theoretical_threshold({1.1, 1.0}, 0.0), DomainError);
  EXPECT_THROW(theoretical_threshold({1.1, 1.0}, 1.0), DomainError);
}

TEST(KappaPareto, Examples) {
  EXPECT_NEAR(kappa_pareto(1.1, 0.01), 0.657933, 1e-6);
  EXPECT_NEAR(kappa_pareto(2.0, 0.01), 0.1, 1e-15);
  EXPECT_EQ(kappa_pareto(1.37, 1.0), 1.0);
  EXPECT_THROW(kappa_pareto(1.0, 0.01), DomainError);
  EXPECT_THROW(kappa_pareto(0.9, 0.01), DomainError);
  EXPECT_THROW(kappa_pareto(1.5, 0.0), DomainError);
}

TEST(KappaPareto, MonotoneInAlphaAndQ) {
  for (int i = 0; i < 30; ++i) {
    const double a = 1.01 + 0.1 * i;
    for (int j = 1; j < 30; ++j) {
      const double q = j / 30.0;
      EXPECT_GT(kappa_pareto(a, q), kappa_pareto(a + 0.05, q));
      EXPECT_LT(kappa_pareto(a, q), kappa_pareto(a, q + 1.0 / 60.0));
    }
  }
}

TEST(KappaPareto, ConvexInAlpha) {
  for (double q : {0.001, 0.01, 0.1, 0.5}) {
    for (double a1 = 1.05; a1 < 4.0; a1 += 0.25) {
      for (double a2 = 1.05; a2 < 4.0; a2 += 0.25) {
        for (double t = 0.0; t <= 1.0; t += 0.125) {
          const double chord = t * kappa_pareto(a1, q) + (1 - t) * kappa_pareto(a2, q);
          EXPECT_GE(chord + 1e-15, kappa_pareto(t * a1 + (1 - t) * a2, q));
        }
      }
    }
  }
}

TEST(KappaPareto, TwoPointSpreadRaisesShare) {
  for (double q : {0.001, 0.01, 0.2}) {
    for (double center = 1.2; center < 3.0; center += 0.1) {
      for (double delta = 0.01; center - delta > 1.0 && delta < 1.0; delta += 0.05) {
        const double at_center = std::pow(q, 1.0 - 1.0 / center);
        const double spread =
            0.5 * (std::pow(q, 1.0 - 1.0 / (center + delta)) + std::pow(q, 1.0 - 1.0 / (center - delta)));
        EXPECT_LT(at_center, spread);
        EXPECT_NEAR(at_center, kappa_pareto(center, q), 1e-14);
      }
    }
  }
  // Exponent 1.3 with a 0.3 spread, q = 1%: the share rises by about 0.24.
  const double rise = 0.5 * (kappa_pareto(1.6, 0.01) + kappa_pareto(1.0 + 1e-12, 0.01)) - kappa_pareto(1.3, 0.01);
  EXPECT_NEAR(rise, 0.2432, 1e-3);
}

TEST(KappaCutPareto, Examples) {
  const double a = 1.1;
  EXPECT_NEAR(kappa_cut_pareto(a, 1.0, a / (a - 1.0), 0.01), kappa_pareto(a, 0.01), 1e-14);
  EXPECT_NEAR(kappa_cut_pareto(1.5, 1.0, 4.0, 0.01), 0.1615826017523913, 1e-12);
  EXPECT_THROW(kappa_cut_pareto(1.5, 1.0, 0.1, 0.01), InconsistencyError);
  EXPECT_THROW(kappa_cut_pareto(1.0, 1.0, 4.0, 0.01), DomainError);
  EXPECT_THROW(kappa_cut_pareto(1.5, 0.0, 4.0, 0.01), DomainError);
}

TEST(KappaSecondDerivative, MatchesFiniteDifferenceOracle) {
  // Frozen from the central-difference oracle; the closed form must agree.
  const double fd = oracle::second_difference([](double a) { return kappa_pareto(a, 0.01); }, 1.5, 1e-4);
  EXPECT_NEAR(fd, 1.4904688998616613, 1e-6 * 1.49);
  EXPECT_NEAR(kappa_second_derivative(1.5, 0.01), 1.4904688998616613, 1e-12);

  const double fd11 = oracle::second_difference([](double a) { return kappa_pareto(a, 0.01); }, 1.1, 1e-4);
  const double exact = kappa_second_derivative(1.1, 0.01);
  EXPECT_LT(std::abs(fd11 - exact) / exact, 1e-6);
}

TEST(KappaSecondDerivative, PositiveEverywhere) {
  for (double a = 1.001; a < 10.0; a += 0.07) {
    for (double q = 1e-6; q < 1.0; q *= 1.7) EXPECT_GT(kappa_second_derivative(a, q), 0.0) << a << " " << q;
  }
  EXPECT_THROW(kappa_second_derivative(1.0, 0.1), DomainError);
  EXPECT_THROW(kappa_second_derivative(1.5, 1.0), DomainError);
}

TEST(KappaMixture, SingleComponentReducesToPareto) {
  for (double a : {1.1, 1.5, 2.0, 3.7}) {
    for (double q : {0.001, 0.01, 0.3}) {
      const auto mix = MixtureSpec::unit_mean({1.0}, std::vector{a});
      EXPECT_NEAR(kappa_mixture(mix, q), kappa_pareto(a, q), 1e-10);
    }
  }
  EXPECT_NEAR(kappa_mixture(MixtureSpec::unit_mean({1.0}, std::vector{1.1}), 0.01), 0.657933, 1e-6);
}

TEST(KappaMixture, TwoComponentOracle) {
  // Frozen from an independent 30-digit bisection + quadrature of x * density above h.
  const auto mix = MixtureSpec::unit_mean({0.5, 0.5}, std::vector{1.2, 1.8});
  EXPECT_NEAR(mixture_threshold(mix, 0.01), 6.571892747224832, 1e-9);
  const double k = kappa_mixture(mix, 0.01);
  EXPECT_NEAR(k, 0.2977261892722787, 1e-10);
  EXPECT_GE(k, 0.5 * (kappa_pareto(1.2, 0.01) + kappa_pareto(1.8, 0.01)));
}

TEST(KappaMixture, FullPopulationShare) {
  const auto mix = MixtureSpec::unit_mean({0.2, 0.5, 0.3}, std::vector{1.3, 2.0, 4.0});
  EXPECT_NEAR(kappa_mixture(mix, 1.0 - 1e-10), 1.0, 1e-8);
  EXPECT_THROW(kappa_mixture(mix, 1.0), DomainError);
}

TEST(KappaMixture, ChainedConvexityOnRandomMixtures) {
  std::mt19937_64 gen(31337);
  std::uniform_real_distribution<double> alpha_dist(1.05, 4.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 1 + gen() % 4;
    std::vector<double> alphas(m), weights(m);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      alphas[i] = alpha_dist(gen);
      weights[i] = unit(gen) + 0.01;
      total += weights[i];
    }
    for (auto& w : weights) w /= total;
    const double drift = std::accumulate(weights.begin(), weights.end(), 0.0) - 1.0;
    weights.back() -= drift;
    const double q = std::pow(10.0, -3.0 * unit(gen)) * 0.5;

    const auto mix = MixtureSpec::unit_mean(weights, alphas);
    double averaged = 0.0, mean_alpha = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      averaged += weights[i] * kappa_pareto(alphas[i], q);
      mean_alpha += weights[i] * alphas[i];
    }
    const double population = kappa_mixture(mix, q);
    EXPECT_GE(population + 1e-9, averaged) << "trial " << trial;
    EXPECT_GE(averaged + 1e-12, kappa_pareto(mean_alpha, q)) << "trial " << trial;
  }
}

TEST(PopulationValues, ParetoFrozenThreshold) {
  const DistributionSpec p = ParetoParams{1.1, 1.0};
  EXPECT_EQ(population_kappa_h(p, 0.5), 1.0);
  EXPECT_NEAR(population_kappa_h(p, theoretical_threshold({1.1, 1.0}, 0.01)), 0.657933, 1e-6);
  EXPECT_NEAR(population_kappa_q(p, 0.01), kappa_pareto(1.1, 0.01), 0.0);
  EXPECT_THROW(population_kappa_h(p, 0.0), DomainError);
}

TEST(PopulationValues, Lognormal) {
  // Frozen from a 30-digit evaluation of Phi(sigma - z_{1-q}).
  const DistributionSpec ln = LognormalParams{0.0, 1.0};
  EXPECT_NEAR(population_threshold(ln, 0.01), std::exp(2.326347874040841), 1e-9);
  EXPECT_NEAR(population_kappa_q(ln, 0.01), 0.09236224807369394, 1e-10);
  // Location only rescales: the share is unchanged.
  EXPECT_NEAR(population_kappa_q(LognormalParams{3.0, 1.0}, 0.01), 0.09236224807369394, 1e-10);
}

TEST(PopulationValues, MixtureMatchesKappaMixture) {
  const auto mix = MixtureSpec::unit_mean({0.5, 0.5}, std::vector{1.2, 1.8});
  EXPECT_DOUBLE_EQ(population_kappa_q(mix, 0.01), kappa_mixture(mix, 0.01));
  EXPECT_EQ(population_kappa_h(mix, 0.1), 1.0);
}

TEST(Describe, NamesTheLaw) {
  EXPECT_EQ(describe(ParetoParams{1.1, 1.0}), "pareto(alpha=1.1, x_min=1)");
  EXPECT_EQ(describe(LognormalParams{0.0, 2.0}), "lognormal(mu=0, sigma=2)");
  EXPECT_EQ(describe(MixtureSpec::unit_mean({0.5, 0.5}, std::vector{1.2, 1.8})),
            "mixture(0.5*alpha=1.2, 0.5*alpha=1.8)");
}

}  // namespace
}  // namespace kappa
