#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "prl/mixture.hpp"
#include "support.hpp"

using namespace prl;

namespace {

MixtureParams two_field() {
  MixtureParams p;
  p.m = {{0.1, 0.9}, {0.2, 0.8}};
  p.u = {{0.7, 0.3}, {0.6, 0.4}};
  p.pi = 0.1;
  return p;
}

MixtureParams random_params(std::mt19937_64& rng, const std::vector<int>& levels) {
  std::gamma_distribution<double> g(1.0);
  MixtureParams p;
  auto draw = [&](int k) {
    std::vector<double> v(static_cast<std::size_t>(k));
    double s = 0;
    for (double& x : v) s += (x = g(rng) + 1e-3);
    for (double& x : v) x /= s;
    return v;
  };
  for (int k : levels) {
    p.m.push_back(draw(k));
    p.u.push_back(draw(k));
  }
  p.pi = std::uniform_real_distribution<double>(0.01, 0.5)(rng);
  return p;
}

}  // namespace

TEST(Likelihood, SingleField) {
  MixtureParams p;
  p.m = {{0.1, 0.9}};
  p.u = {{0.7, 0.3}};
  EXPECT_NEAR(pattern_log_likelihoods({{2}}, p).log_m, -0.10536, 1e-5);
  EXPECT_NEAR(weight_of_pattern({{1}}, p), -1.94591, 1e-5);
}

TEST(Likelihood, UniformAndProduct) {
  auto uni = MixtureParams::uniform({2});
  EXPECT_DOUBLE_EQ(pattern_log_likelihoods({{1}}, uni).log_m, std::log(0.5));
  EXPECT_DOUBLE_EQ(pattern_log_likelihoods({{2}}, uni).log_m, std::log(0.5));
  EXPECT_NEAR(pattern_log_likelihoods({{2, 2}}, two_field()).log_m, std::log(0.72), 1e-12);
}

TEST(Weights, HandComputed) {
  auto p = two_field();
  EXPECT_NEAR(weight_of_pattern({{2, 2}}, p), 1.79176, 1e-5);
  EXPECT_NEAR(weight_of_pattern({{2, 2}}, p), std::log(3.0) + std::log(2.0), 1e-12);
  auto t = support::table_of({{{1, 1}}, {{1, 2}}, {{2, 1}}, {{2, 2}}}, {2, 2});
  auto w = weight_table(t, p);
  ASSERT_EQ(w.size(), 4u);
  const double expect[4] = {std::log(1.0 / 7) + std::log(1.0 / 3), std::log(1.0 / 7) + std::log(2.0),
                            std::log(3.0) + std::log(1.0 / 3), std::log(3.0) + std::log(2.0)};
  for (int g = 0; g < 4; ++g) {
    EXPECT_NEAR(w.weight[g], expect[g], 1e-12);
    EXPECT_EQ(w.weight[g], w.log_m[g] - w.log_u[g]);
  }
  auto single = support::table_of({{{2, 2}}, {{2, 2}}}, {2, 2});
  EXPECT_EQ(weight_table(single, p).size(), 1u);
}

TEST(Weights, EqualComponentsGiveZero) {
  MixtureParams p;
  p.m = p.u = {{0.2, 0.3, 0.5}, {0.6, 0.4}};
  auto t = support::table_of({{{1, 1}}, {{3, 2}}, {{2, 1}}}, {3, 2});
  for (double w : weight_table(t, p).weight) EXPECT_EQ(w, 0.0);
}

TEST(Weights, ZeroProbabilityIsFloored) {
  MixtureParams p;
  p.m = {{0.0, 1.0}};
  p.u = {{1.0, 0.0}};
  EXPECT_NEAR(weight_of_pattern({{1}}, p), std::log(kProbabilityFloor), 1e-9);
  EXPECT_NEAR(weight_of_pattern({{2}}, p), -std::log(kProbabilityFloor), 1e-9);
  EXPECT_LT(std::abs(weight_of_pattern({{2}}, p)), 23.1);
}

TEST(Weights, LevelOutOfRangeThrows) {
  EXPECT_THROW(pattern_log_likelihoods({{3, 1}}, two_field()), ValidationError);
  EXPECT_THROW(pattern_log_likelihoods({{1}}, two_field()), ValidationError);
}

TEST(WeightsProperty, SwapNegatesAndDifferenceIsExact) {
  std::mt19937_64 rng(21);
  const std::vector<int> levels{4, 4, 2, 3};
  for (int rep = 0; rep < 50; ++rep) {
    auto p = random_params(rng, levels);
    auto s = p.swapped();
    EXPECT_DOUBLE_EQ(s.pi, 1.0 - p.pi);
    for (int i = 0; i < 20; ++i) {
      ComparisonPattern g;
      for (int k : levels) g.levels.push_back(static_cast<std::uint8_t>(1 + rng() % static_cast<unsigned>(k)));
      auto ll = pattern_log_likelihoods(g, p);
      EXPECT_EQ(weight_of_pattern(g, p), ll.log_m - ll.log_u);
      EXPECT_EQ(weight_of_pattern(g, s), -weight_of_pattern(g, p));
    }
  }
}

TEST(Params, Validation) {
  auto p = two_field();
  EXPECT_NO_THROW(p.validate());
  p.m[0] = {0.5, 0.6};
  EXPECT_THROW(p.validate(), ValidationError);
  p = two_field();
  p.pi = 1.5;
  EXPECT_THROW(p.validate(), ValidationError);
  p = two_field();
  p.u.pop_back();
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Params, DefaultInit) {
  auto p = MixtureParams::default_init({4, 2});
  EXPECT_DOUBLE_EQ(p.m[0][3], 0.8);
  EXPECT_NEAR(p.m[0][0], 0.2 / 3, 1e-15);
  EXPECT_DOUBLE_EQ(p.u[0][0], 0.8);
  EXPECT_DOUBLE_EQ(p.m[1][1], 0.8);
  EXPECT_DOUBLE_EQ(p.pi, 0.1);
  p.validate();
  // With a missing level appended the top agreement level is not the last one.
  auto q = MixtureParams::default_init({3}, {2});
  EXPECT_DOUBLE_EQ(q.m[0][1], 0.8);
}

TEST(Params, MarginInitUsesLevelFrequencies) {
  auto t = support::table_of({{{1, 2}}, {{1, 1}}, {{1, 1}}, {{2, 1}}}, {2, 2});
  auto p = margin_init(t);
  EXPECT_DOUBLE_EQ(p.u[0][0], 0.75);
  EXPECT_DOUBLE_EQ(p.u[1][1], 0.25);
  EXPECT_DOUBLE_EQ(p.m[0][1], 0.8);
  auto none = support::table_of({{{1, 1}}}, {2, 2});
  auto q = margin_init(none);
  EXPECT_NEAR(q.u[0][1], kProbabilityFloor, 1e-15);
  q.validate();
}

TEST(Prior, FlatAndFromAlpha) {
  auto f = DirichletPrior::flat({2, 3}, 1.0);
  EXPECT_EQ(f.alpha_m[1], (std::vector<double>{2, 2, 2}));
  EXPECT_NO_THROW(f.validate({2, 3}));
  EXPECT_THROW(f.validate({2, 2}), ValidationError);
  auto a = DirichletPrior::from_alpha({{3, 20}}, {{20, 3}});
  EXPECT_EQ(a.pseudo_m[0], (std::vector<double>{2, 19}));
  EXPECT_EQ(a.pseudo_u[0], (std::vector<double>{19, 2}));
  auto half = DirichletPrior::from_alpha({{0.5, 2}}, {{1, 1}});
  EXPECT_EQ(half.pseudo_m[0], (std::vector<double>{0, 1}));
  auto bad = DirichletPrior::from_alpha({{0, 1}}, {{1, 1}});
  EXPECT_THROW(bad.validate({2}), ValidationError);
}

TEST(Em, EqualComponentsAreAFixedPoint) {
  MixtureParams p;
  p.m = p.u = {{0.3, 0.7}, {0.5, 0.5}};
  p.pi = 0.2;
  auto t = support::table_of({{{1, 1}}, {{2, 2}}, {{2, 1}}, {{2, 2}}}, {2, 2});
  auto r = em_fit(t, p);
  EXPECT_NEAR(r.params.pi, 0.2, 1e-12);
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t h = 0; h < 2; ++h) EXPECT_NEAR(r.params.m[j][h], r.params.u[j][h], 1e-12);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 2);
}

TEST(Em, RecoversWellSeparatedMixture) {
  MixtureParams truth;
  truth.pi = 0.1;
  for (int j = 0; j < 4; ++j) {
    truth.m.push_back({0.05, 0.95});
    truth.u.push_back({0.9, 0.1});
  }
  std::mt19937_64 rng(8);
  auto pats = support::sample_mixture(truth, 100000, rng);
  auto t = support::table_of(pats, {2, 2, 2, 2});
  auto r = em_fit(t, MixtureParams::default_init({2, 2, 2, 2}));
  const double pi = r.params.pi;
  EXPECT_NEAR(std::min(pi, 1.0 - pi), 0.1, 0.02);
}

TEST(Em, AggregatedLikelihoodEqualsPairwise) {
  std::mt19937_64 rng(4);
  auto truth = random_params(rng, {3, 2});
  auto pats = support::sample_mixture(truth, 500, rng);
  auto t = support::table_of(pats, {3, 2});
  auto p = random_params(rng, {3, 2});
  EXPECT_NEAR(mixture_log_likelihood(t, p), oracle::pairwise_log_likelihood(pats, p), 1e-8);
}

TEST(EmProperty, MonotoneAndNormalized) {
  std::mt19937_64 rng(77);
  const std::vector<int> levels{4, 4, 2, 2};
  auto truth = random_params(rng, levels);
  truth.pi = 0.05;
  auto t = support::table_of(support::sample_mixture(truth, 20000, rng), levels);
  for (int rep = 0; rep < 25; ++rep) {
    auto r = em_fit(t, random_params(rng, levels), {1e-8, 300});
    for (std::size_t i = 1; i < r.log_likelihood.size(); ++i)
      EXPECT_GE(r.log_likelihood[i], r.log_likelihood[i - 1] - 1e-9);
    for (std::size_t j = 0; j < levels.size(); ++j) {
      double sm = 0, su = 0;
      for (double x : r.params.m[j]) sm += x;
      for (double x : r.params.u[j]) su += x;
      EXPECT_NEAR(sm, 1.0, 1e-12);
      EXPECT_NEAR(su, 1.0, 1e-12);
    }
  }
}

TEST(Em, RejectsMismatchedInput) {
  auto t = support::table_of({{{1, 1}}}, {2, 2});
  EXPECT_THROW(em_fit(t, MixtureParams::default_init({2})), ValidationError);
  PatternTable empty;
  empty.level_counts = {2};
  EXPECT_THROW(em_fit(empty, MixtureParams::default_init({2})), ValidationError);
}
