#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "oracles.hpp"
#include "prl/mcmc.hpp"
#include "prl/synth.hpp"
#include "support.hpp"

using namespace prl;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// One block over the cells of w that are allowed (all by default); pattern
// ids equal pair indices, so gains can be given per pair.
struct BlockProblem {
  support::MatrixProblem problem;
  PostHocBlocks blocks;

  BlockProblem(const WeightMatrix& w, const std::vector<std::vector<char>>& allowed = {}) : problem(support::matrix_problem(w)) {
    auto weights = pair_weights(problem.table, weight_table(problem.table, problem.params));
    if (!allowed.empty())
      for (std::size_t p = 0; p < weights.size(); ++p)
        if (!allowed[problem.pairs[p].a][problem.pairs[p].b]) weights[p] = kNegInf;
    blocks = connected_components(build_block_graph(problem.pairs, weights, kNegInf));
  }
  BlockChain chain() const { return BlockChain(blocks.blocks.at(0), problem.table.pair_pattern); }
  std::vector<double> gains(const WeightMatrix& w, double theta) const {
    std::vector<double> g;
    for (double x : w.data()) g.push_back(x - theta);
    return g;
  }
};

oracle::Pairs state_of(const BlockChain& c) {
  oracle::Pairs s;
  for (int e : c.links()) s.emplace_back(c.edges()[static_cast<std::size_t>(e)].a, c.edges()[static_cast<std::size_t>(e)].b);
  std::sort(s.begin(), s.end());
  return s;
}

void expect_one_to_one(const BlockChain& c) {
  std::set<std::uint32_t> rows, cols;
  for (int e : c.links()) {
    EXPECT_TRUE(rows.insert(c.edges()[static_cast<std::size_t>(e)].row).second);
    EXPECT_TRUE(cols.insert(c.edges()[static_cast<std::size_t>(e)].col).second);
  }
}

}  // namespace

TEST(MhStep, SinglePairStationaryLaw) {
  WeightMatrix w{{std::log(3.0)}};
  BlockProblem bp(w);
  auto chain = bp.chain();
  const auto gain = bp.gains(w, 0.0);
  SplitMix64 rng(1);
  MoveMix mix;
  long linked = 0;
  const long n = 200000;
  for (long i = 0; i < n; ++i) {
    block_update(chain, gain, mix, rng);
    linked += static_cast<long>(chain.link_count());
  }
  EXPECT_NEAR(static_cast<double>(linked) / n, 0.75, 0.01);
}

TEST(Gibbs, SinglePairProbabilities) {
  for (double g : {0.0, std::log(3.0)}) {
    WeightMatrix w{{g}};
    BlockProblem bp(w);
    auto chain = bp.chain();
    SplitMix64 rng(2);
    long linked = 0;
    const long n = 100000;
    for (long i = 0; i < n; ++i) {
      ASSERT_TRUE(block_gibbs_enumerate(chain, bp.gains(w, 0.0), rng, 64));
      linked += static_cast<long>(chain.link_count());
    }
    EXPECT_NEAR(static_cast<double>(linked) / n, std::exp(g) / (1 + std::exp(g)), 0.01);
  }
}

TEST(MhStep, EqualWeightsUniformOverSevenMatchings) {
  WeightMatrix w(2, 2, 1.5);
  BlockProblem bp(w);
  auto chain = bp.chain();
  ASSERT_EQ(*chain.matching_count(64), 7u);
  const auto gain = bp.gains(w, 1.5);
  SplitMix64 rng(3);
  std::map<oracle::Pairs, long> hist;
  const long n = 210000;
  for (long i = 0; i < n; ++i) {
    block_update(chain, gain, MoveMix{}, rng);
    expect_one_to_one(chain);
    ++hist[state_of(chain)];
  }
  ASSERT_EQ(hist.size(), 7u);
  for (const auto& [s, c] : hist) EXPECT_NEAR(static_cast<double>(c) / n, 1.0 / 7.0, 0.01);
}

TEST(Gibbs, TwoByTwoMatchesEnumeration) {
  WeightMatrix w{{0.5, -1.0}, {1.2, 0.3}};
  BlockProblem bp(w);
  auto chain = bp.chain();
  const auto ms = oracle::partial_matchings(2, 2);
  const auto exact = oracle::matching_posterior(w, ms, 0.2);
  SplitMix64 rng(4);
  std::map<oracle::Pairs, long> hist;
  const long n = 100000;
  for (long i = 0; i < n; ++i) {
    block_gibbs_enumerate(chain, bp.gains(w, 0.2), rng, 64);
    ++hist[state_of(chain)];
  }
  for (std::size_t k = 0; k < ms.size(); ++k) {
    auto key = ms[k];
    std::sort(key.begin(), key.end());
    EXPECT_NEAR(static_cast<double>(hist[key]) / n, exact[k], 0.01);
  }
}

TEST(Gibbs, CapExceededFallsBack) {
  WeightMatrix w(3, 3, 0.0);
  BlockProblem bp(w);
  auto chain = bp.chain();
  SplitMix64 rng(5);
  EXPECT_FALSE(block_gibbs_enumerate(chain, bp.gains(w, 0.0), rng, 10));
  EXPECT_FALSE(chain.matching_count(33).has_value());
  EXPECT_EQ(*chain.matching_count(34), 34u);
}

TEST(MhStep, EmptyAdmissibleSetLeavesStateUnchanged) {
  Block empty;
  BlockChain chain(empty, std::vector<std::uint32_t>{});
  SplitMix64 rng(6);
  EXPECT_FALSE(chain.mh_step(std::vector<double>{}, MoveMix{}, rng).has_value());
  EXPECT_EQ(chain.link_count(), 0u);
}

TEST(MhProperty, AgreesWithGibbsOnSparseBlock) {
  WeightMatrix w{{1.0, 0.4, 0.0}, {0.2, 0.9, -0.5}, {0.0, 0.3, 0.8}};
  const std::vector<std::vector<char>> allowed{{1, 1, 0}, {1, 1, 1}, {0, 1, 1}};
  BlockProblem bp(w, allowed);
  auto mh = bp.chain(), gibbs = bp.chain();
  const auto gain = bp.gains(w, 0.6);
  SplitMix64 r1(7), r2(8);
  std::vector<double> f_mh(mh.edges().size()), f_g(gibbs.edges().size());
  const long n = 200000;
  for (long i = 0; i < n; ++i) {
    for (int k = 0; k < 5; ++k) block_update(mh, gain, MoveMix{}, r1);
    block_gibbs_enumerate(gibbs, gain, r2, 1000);
    for (int e : mh.links()) f_mh[static_cast<std::size_t>(e)] += 1.0 / n;
    for (int e : gibbs.links()) f_g[static_cast<std::size_t>(e)] += 1.0 / n;
    for (int e : mh.links()) {
      const auto& x = mh.edges()[static_cast<std::size_t>(e)];
      EXPECT_TRUE(allowed[x.a][x.b]);
    }
  }
  for (std::size_t e = 0; e < f_mh.size(); ++e) EXPECT_NEAR(f_mh[e], f_g[e], 0.01);
}

TEST(MhStep, ChainLeavesPenalizedStartOnEqualWeights) {
  // Two admissible pairs sharing record a0 with equal weight.
  WeightMatrix w{{2.0, 2.0}};
  BlockProblem bp(w);
  auto chain = bp.chain();
  chain.set_links(std::vector<int>{0});
  SplitMix64 rng(9);
  MoveCounts counts;
  for (int i = 0; i < 200; ++i) block_update(chain, bp.gains(w, 1.0), MoveMix{}, rng, &counts);
  std::int64_t accepted = 0;
  for (auto a : counts.accepted) accepted += a;
  EXPECT_GT(accepted, 0);
  EXPECT_GT(counts.acceptance(MoveType::swap), 0.0);
}

TEST(UpdateParams, EmptyMatchUsesFullCounts) {
  auto t = support::table_of({{{1}}, {{1}}, {{2}}}, {2});
  SufficientStats s = stats_from_linked_patterns(t, std::vector<std::int64_t>(t.size(), 0));
  EXPECT_EQ(s.unlinked[0], (std::vector<std::int64_t>{2, 1}));
  EXPECT_EQ(s.linked[0], (std::vector<std::int64_t>{0, 0}));
  auto prior = DirichletPrior::flat({2}, 0.0);
  SplitMix64 rng(10);
  double mean_u = 0.0, mean_m = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    auto p = update_params(s, prior, 0.1, rng);
    mean_u += p.u[0][0] / n;
    mean_m += p.m[0][0] / n;
  }
  EXPECT_NEAR(mean_u, 3.0 / 5.0, 0.005);
  EXPECT_NEAR(mean_m, 0.5, 0.005);
}

TEST(UpdateParams, PosteriorMeanWithinThreeStandardErrors) {
  SufficientStats s;
  s.linked = {{0, 2}};
  s.unlinked = {{5, 5}};
  auto prior = DirichletPrior::flat({2}, 0.0);  // alpha (1, 1)
  SplitMix64 rng(11);
  const int n = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = update_params(s, prior, 0.1, rng).m[0][1];
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  EXPECT_LT(std::abs(mean - 0.75), 3 * se);
}

TEST(UpdateParams, LargeAlphaConcentrates) {
  SufficientStats s;
  s.linked = {{3, 1}};
  s.unlinked = {{10, 40}};
  DirichletPrior prior;
  prior.alpha_m = {{2e6, 8e6}};
  prior.alpha_u = {{9e6, 1e6}};
  SplitMix64 rng(12);
  auto p = update_params(s, prior, 0.1, rng);
  EXPECT_NEAR(p.m[0][1], 0.8, 1e-3);
  EXPECT_NEAR(p.u[0][0], 0.9, 1e-3);
}

TEST(BayesEstimate, StrictThresholdAndConflicts) {
  PosteriorSummary s;
  s.n_a = 3;
  s.n_b = 3;
  s.pairs = {{0, 0, 0.6, 0}, {1, 1, 0.5, 1}, {2, 1, 0.45, 2}, {2, 2, 0.45, 3}};
  auto m = bayes_estimate(s);
  EXPECT_EQ(m, Matching(3, 3, {{0, 0}}));
  s.pairs = {{0, 0, 0.55, 0}, {0, 1, 0.52, 1}};
  EXPECT_EQ(bayes_estimate(s), Matching(3, 3, {{0, 0}}));
  PosteriorSummary empty;
  EXPECT_TRUE(bayes_estimate(empty).empty());
}

TEST(Sampler, InvariantsOnSyntheticData) {
  SynthConfig c;
  c.n_a = c.n_b = 60;
  c.overlap = 0.5;
  c.errors_per_record = 2;
  c.seed = 4;
  auto ds = generate(c);
  auto schema = synth_schema(c.fields);
  auto pairs = build_candidate_pairs(ds.a, ds.b);
  auto table = aggregate_patterns(pairs, compare_pairs(pairs, ds.a, ds.b, schema), schema);
  auto prior = synth_prior(schema);
  auto fit = penalized_likelihood_fit(table, pairs, prior, 5.0, margin_init(table, schema.agreement_level_counts()));
  auto w = pair_weights(table, weight_table(table, fit.params));
  auto blocks = connected_components(build_block_graph(pairs, w, 0.0));
  std::set<std::pair<std::uint32_t, std::uint32_t>> admissible;
  for (const auto& b : blocks.blocks)
    for (const auto& e : b.edges) admissible.insert({e.a, e.b});

  McmcOptions opts;
  opts.iterations = 300;
  opts.burn_in = 50;
  opts.seed = 77;
  RestrictedSampler sampler(blocks, table, LinkagePrior{5.0, prior}, fit.params, &fit.matching, opts);
  for (int i = 0; i < opts.iterations; ++i) {
    sampler.sweep();
    const auto m = sampler.current_matching();  // throws unless one-to-one
    for (const auto& l : m) EXPECT_TRUE(admissible.count({l.a, l.b}));
    EXPECT_EQ(sampler.linked_stats(), sampler.recount_stats());
  }
  auto s = sampler.summary();
  EXPECT_EQ(s.retained, 250);
  EXPECT_EQ(s.link_trace.size(), 300u);
  for (const auto& p : s.pairs) {
    EXPECT_GE(p.frequency, 0.0);
    EXPECT_LE(p.frequency, 1.0);
  }
  EXPECT_LE(max_record_frequency_sum(s), 1.0 + 2.0 / std::sqrt(static_cast<double>(s.retained)));

  opts.workers = 4;
  auto parallel = run_chain(blocks, table, LinkagePrior{5.0, prior}, fit.params, &fit.matching, opts);
  std::ostringstream x, y;
  write_posterior(x, s);
  write_posterior(y, parallel);
  EXPECT_EQ(x.str(), y.str());
  EXPECT_EQ(s.link_trace, parallel.link_trace);
}

TEST(Sampler, RejectsBadOptions) {
  McmcOptions o;
  o.burn_in = o.iterations;
  EXPECT_THROW(o.validate(), ValidationError);
  o = {};
  o.mix = {0.5, 0.0, 0.5};
  EXPECT_THROW(o.validate(), ValidationError);
  WeightMatrix w{{1.0}};
  BlockProblem bp(w);
  McmcOptions ok;
  EXPECT_THROW(RestrictedSampler(bp.blocks, bp.problem.table, LinkagePrior{std::nan(""), DirichletPrior::flat(bp.problem.table.level_counts)},
                                 bp.problem.params, nullptr, ok),
               ValidationError);
}
