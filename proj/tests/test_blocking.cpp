#include <gtest/gtest.h>

#include <random>
#include <set>

#include "prl/blocking.hpp"
#include "support.hpp"

using namespace prl;

namespace {

CandidatePairSet full_pairs(std::size_t r, std::size_t c) {
  PairGroup g;
  for (std::uint32_t i = 0; i < r; ++i) g.a_members.push_back(i);
  for (std::uint32_t j = 0; j < c; ++j) g.b_members.push_back(j);
  return CandidatePairSet(r, c, {g});
}

// Small 5 x 5 example, zero-based: a1..a5 -> 0..4, b1..b5 -> 0..4.
std::vector<double> example_weights(const CandidatePairSet& pairs) {
  std::vector<double> w(pairs.size(), -3.0);
  for (auto [a, b] : {std::pair{0u, 2u}, {1u, 0u}, {1u, 3u}, {2u, 1u}, {3u, 3u}}) w[*pairs.find(a, b)] = 2.0;
  return w;
}

using Side = std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>;

}  // namespace

TEST(BlockGraph, StrictThreshold) {
  auto pairs = full_pairs(1, 3);
  const std::vector<double> w{1.2, 0.0, -3.1};
  EXPECT_EQ(build_block_graph(pairs, w, 0.0).edges.size(), 1u);
  EXPECT_EQ(build_block_graph(pairs, w, -10.0).edges.size(), 3u);
  EXPECT_EQ(build_block_graph(pairs, w, 5.0).edges.size(), 0u);
  EXPECT_THROW(build_block_graph(pairs, std::vector<double>{1.0}, 0.0), ValidationError);
}

TEST(Components, FiveByFiveExample) {
  auto pairs = full_pairs(5, 5);
  auto blocks = connected_components(build_block_graph(pairs, example_weights(pairs), 0.0));
  ASSERT_EQ(blocks.blocks.size(), 3u);
  std::set<Side> got;
  for (const auto& b : blocks.blocks) got.insert({b.a_members, b.b_members});
  const std::set<Side> want{{{1, 3}, {0, 3}}, {{2}, {1}}, {{0}, {2}}};
  EXPECT_EQ(got, want);
  EXPECT_EQ(blocks.unblocked_a, (std::vector<std::uint32_t>{4}));
  EXPECT_EQ(blocks.unblocked_b, (std::vector<std::uint32_t>{4}));
  // Numbered by smallest A member.
  EXPECT_EQ(blocks.blocks[0].a_members.front(), 0u);
  EXPECT_EQ(blocks.blocks[1].a_members.front(), 1u);
  EXPECT_EQ(blocks.blocks[2].a_members.front(), 2u);
}

TEST(Components, EmptyAndComplete) {
  auto pairs = full_pairs(3, 4);
  std::vector<double> w(pairs.size(), 1.0);
  auto none = connected_components(build_block_graph(pairs, w, 5.0));
  EXPECT_TRUE(none.blocks.empty());
  EXPECT_EQ(none.unblocked_a.size(), 3u);
  EXPECT_EQ(none.unblocked_b.size(), 4u);
  auto all = connected_components(build_block_graph(pairs, w, 0.0));
  ASSERT_EQ(all.blocks.size(), 1u);
  EXPECT_EQ(all.blocks[0].records(), 7u);
  EXPECT_EQ(all.blocks[0].pairs(), 12u);
}

TEST(Diagnostics, Arithmetic) {
  auto pairs = full_pairs(10, 10);
  std::vector<double> w(pairs.size(), -1.0);
  for (std::uint32_t i = 0; i < 5; ++i) w[*pairs.find(i, i)] = 3.0;
  auto blocks = connected_components(build_block_graph(pairs, w, 0.0));
  std::vector<Link> t;
  for (std::uint32_t i = 0; i < 10; ++i) t.push_back({i, i});
  Matching truth(10, 10, t);
  auto d = diagnostics(blocks, 100, &truth);
  EXPECT_DOUBLE_EQ(d.reduction_ratio, 0.95);
  EXPECT_DOUBLE_EQ(*d.pairs_completeness, 0.5);
  EXPECT_EQ(d.n_blocks, 5u);
  EXPECT_DOUBLE_EQ(d.block_pairs.max, 1.0);
  EXPECT_THROW(diagnostics(blocks, 3), ValidationError);

  for (std::uint32_t i = 5; i < 9; ++i) w[*pairs.find(i, i)] = 3.0;
  auto d9 = diagnostics(connected_components(build_block_graph(pairs, w, 0.0)), 100, &truth);
  EXPECT_DOUBLE_EQ(*d9.pairs_completeness, 0.9);
  Matching empty_truth(10, 10);
  EXPECT_FALSE(diagnostics(blocks, 100, &empty_truth).pairs_completeness.has_value());
}

TEST(SelectW0, BudgetCases) {
  auto pairs = full_pairs(5, 5);
  auto w = example_weights(pairs);
  const std::vector<double> grid{-5, 0, 3};
  auto loose = select_w0(pairs, w, 1000, grid);
  EXPECT_TRUE(loose.feasible);
  EXPECT_EQ(loose.w0, -5.0);
  EXPECT_EQ(loose.curve.size(), 3u);
  // Largest block at -5 has 25 pairs, at 0 it has 3, at 3 none.
  auto mid = select_w0(pairs, w, 3, grid);
  EXPECT_EQ(mid.w0, 0.0);
  auto tight = select_w0(pairs, w, 1, {-5.0, -4.0});
  EXPECT_FALSE(tight.feasible);
  EXPECT_EQ(tight.w0, -4.0);
  EXPECT_THROW(select_w0(pairs, w, 1, {}), ValidationError);
}

TEST(BlockingProperty, PartitionAndMonotonicity) {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t na = 5 + rng() % 20, nb = 5 + rng() % 20;
    auto pairs = full_pairs(na, nb);
    std::vector<double> w(pairs.size());
    std::normal_distribution<double> nd(-2.0, 3.0);
    for (double& x : w) x = nd(rng);
    std::vector<Link> t;
    for (std::uint32_t i = 0; i < std::min(na, nb); i += 2) t.push_back({i, i});
    Matching truth(na, nb, t);
    double min_true = 1e300;
    for (const auto& l : truth) min_true = std::min(min_true, w[*pairs.find(l.a, l.b)]);

    std::vector<double> grid{min_true - 1e-6};
    for (double x = -6; x <= 6; x += 0.5) grid.push_back(x);
    auto sel = select_w0(pairs, w, 1, grid, &truth);
    for (std::size_t i = 1; i < sel.curve.size(); ++i) {
      EXPECT_GE(sel.curve[i].reduction_ratio, sel.curve[i - 1].reduction_ratio);
      EXPECT_LE(*sel.curve[i].pairs_completeness, *sel.curve[i - 1].pairs_completeness);
    }
    auto below = connected_components(build_block_graph(pairs, w, min_true - 1e-6));
    EXPECT_EQ(*diagnostics(below, pairs.size(), &truth).pairs_completeness, 1.0);

    auto blocks = connected_components(build_block_graph(pairs, w, 0.5));
    std::vector<int> block_a(na, -1), block_b(nb, -1);
    for (std::size_t k = 0; k < blocks.blocks.size(); ++k) {
      for (auto a : blocks.blocks[k].a_members) {
        EXPECT_EQ(block_a[a], -1);
        block_a[a] = static_cast<int>(k);
      }
      for (auto b : blocks.blocks[k].b_members) {
        EXPECT_EQ(block_b[b], -1);
        block_b[b] = static_cast<int>(k);
      }
      for (const auto& e : blocks.blocks[k].edges) {
        EXPECT_GT(e.weight, 0.5);
        EXPECT_EQ(block_a[e.a], static_cast<int>(k));
        EXPECT_EQ(block_b[e.b], static_cast<int>(k));
      }
    }
    for (auto a : blocks.unblocked_a) EXPECT_EQ(block_a[a], -1);
    for (auto b : blocks.unblocked_b) EXPECT_EQ(block_b[b], -1);
    std::size_t covered_a = blocks.unblocked_a.size(), covered_b = blocks.unblocked_b.size();
    for (const auto& b : blocks.blocks) {
      covered_a += b.a_members.size();
      covered_b += b.b_members.size();
    }
    EXPECT_EQ(covered_a, na);
    EXPECT_EQ(covered_b, nb);
  }
}

TEST(Blocking, CurveCsv) {
  auto pairs = full_pairs(5, 5);
  auto sel = select_w0(pairs, example_weights(pairs), 3, {0.0, 3.0});
  std::ostringstream out;
  write_blocking_curve(out, sel.curve);
  EXPECT_EQ(out.str(), "w0,n_blocks,max_block_pairs,reduction_ratio,pairs_completeness\n0,3,3,0.8,\n3,0,0,1,\n");
}
