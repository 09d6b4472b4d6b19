#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "prl/comparison.hpp"
#include "prl/csv.hpp"
#include "prl/error.hpp"
#include "prl/matching.hpp"
#include "prl/union_find.hpp"

namespace prl {

struct BlockEdge {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  double weight = 0.0;
  std::size_t pair_index = 0;
};

// Candidate pairs whose fitted weight is strictly above w0.
struct BlockGraph {
  std::vector<BlockEdge> edges;
  double w0 = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

inline BlockGraph build_block_graph(const CandidatePairSet& pairs, std::span<const double> pair_weight, double w0) {
  if (pair_weight.size() != pairs.size()) throw ValidationError("one weight per candidate pair required");
  BlockGraph g{{}, w0, pairs.n_a(), pairs.n_b()};
  for (std::size_t p = 0; p < pairs.size(); ++p)
    if (pair_weight[p] > w0) g.edges.push_back({pairs[p].a, pairs[p].b, pair_weight[p], p});
  return g;
}

struct Block {
  std::vector<std::uint32_t> a_members;  // sorted
  std::vector<std::uint32_t> b_members;  // sorted
  std::vector<BlockEdge> edges;          // admissible pairs, in graph order

  std::size_t records() const { return a_members.size() + b_members.size(); }
  std::size_t pairs() const { return edges.size(); }
};

struct PostHocBlocks {
  std::vector<Block> blocks;
  std::vector<std::uint32_t> unblocked_a;
  std::vector<std::uint32_t> unblocked_b;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double w0 = 0.0;

  std::size_t retained_pairs() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.pairs();
    return n;
  }
};

// Connected components of the bipartite graph; A record a is node a and B
// record b is node n_a + b. Blocks are numbered by their smallest A member.
inline PostHocBlocks connected_components(const BlockGraph& g) {
  UnionFind uf(g.n_a + g.n_b);
  for (const auto& e : g.edges) uf.unite(e.a, g.n_a + e.b);

  PostHocBlocks out;
  out.n_a = g.n_a;
  out.n_b = g.n_b;
  out.w0 = g.w0;
  std::vector<char> touched(g.n_a + g.n_b, 0);
  for (const auto& e : g.edges) touched[e.a] = touched[g.n_a + e.b] = 1;

  std::vector<int> block_of_root(g.n_a + g.n_b, -1);
  for (std::uint32_t a = 0; a < g.n_a; ++a) {
    if (!touched[a]) {
      out.unblocked_a.push_back(a);
      continue;
    }
    auto root = uf.find(a);
    if (block_of_root[root] < 0) {
      block_of_root[root] = static_cast<int>(out.blocks.size());
      out.blocks.emplace_back();
    }
    out.blocks[static_cast<std::size_t>(block_of_root[root])].a_members.push_back(a);
  }
  for (std::uint32_t b = 0; b < g.n_b; ++b) {
    if (!touched[g.n_a + b]) {
      out.unblocked_b.push_back(b);
      continue;
    }
    out.blocks[static_cast<std::size_t>(block_of_root[uf.find(g.n_a + b)])].b_members.push_back(b);
  }
  for (const auto& e : g.edges) out.blocks[static_cast<std::size_t>(block_of_root[uf.find(e.a)])].edges.push_back(e);
  return out;
}

struct SizeQuantiles {
  double min = 0, median = 0, q90 = 0, max = 0;
};

struct BlockingDiagnostics {
  double w0 = 0.0;
  std::size_t n_blocks = 0;
  std::size_t candidate_pairs = 0;
  std::size_t retained_pairs = 0;
  SizeQuantiles block_pairs;
  SizeQuantiles block_records;
  double reduction_ratio = 0.0;
  std::optional<double> pairs_completeness;
};

namespace detail {

// Quantile by the nearest-rank rule on sorted values.
inline double nearest_rank(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

inline SizeQuantiles quantiles(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return {};
  return {v.front(), nearest_rank(v, 0.5), nearest_rank(v, 0.9), v.back()};
}

}  // namespace detail

// Reduction ratio 1 - retained/candidates; pairs completeness is the share of
// true links retained as admissible pairs.
inline BlockingDiagnostics diagnostics(const PostHocBlocks& blocks, std::size_t candidate_count,
                                       const Matching* truth = nullptr) {
  BlockingDiagnostics d;
  d.w0 = blocks.w0;
  d.n_blocks = blocks.blocks.size();
  d.candidate_pairs = candidate_count;
  d.retained_pairs = blocks.retained_pairs();
  if (candidate_count < d.retained_pairs) throw ValidationError("candidate count below retained pair count");
  std::vector<double> pairs, records;
  for (const auto& b : blocks.blocks) {
    pairs.push_back(static_cast<double>(b.pairs()));
    records.push_back(static_cast<double>(b.records()));
  }
  d.block_pairs = detail::quantiles(std::move(pairs));
  d.block_records = detail::quantiles(std::move(records));
  d.reduction_ratio = candidate_count == 0 ? 0.0
                                            : 1.0 - static_cast<double>(d.retained_pairs) / static_cast<double>(candidate_count);
  if (truth) {
    std::vector<Link> retained;
    for (const auto& b : blocks.blocks)
      for (const auto& e : b.edges) retained.push_back({e.a, e.b});
    std::sort(retained.begin(), retained.end());
    std::size_t hit = 0;
    for (const auto& l : *truth) {
      if (l.a >= blocks.n_a || l.b >= blocks.n_b) throw ValidationError("truth link references an unknown record");
      if (std::binary_search(retained.begin(), retained.end(), l)) ++hit;
    }
    if (!truth->empty()) d.pairs_completeness = static_cast<double>(hit) / static_cast<double>(truth->size());
  }
  return d;
}

struct W0Selection {
  double w0 = 0.0;
  bool feasible = true;  // false: no grid value met the budget, w0 is the largest grid value
  std::vector<BlockingDiagnostics> curve;  // one entry per grid value, ascending w0
};

// Smallest grid w0 whose largest block has at most `max_block_pairs`
// admissible pairs, together with the diagnostics curve over the whole grid.
inline W0Selection select_w0(const CandidatePairSet& pairs, std::span<const double> pair_weight,
                             std::size_t max_block_pairs, std::vector<double> grid, const Matching* truth = nullptr) {
  if (grid.empty()) throw ValidationError("w0 grid is empty");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  W0Selection s;
  std::optional<double> chosen;
  for (double w0 : grid) {
    auto blocks = connected_components(build_block_graph(pairs, pair_weight, w0));
    auto d = diagnostics(blocks, pairs.size(), truth);
    if (!chosen && d.block_pairs.max <= static_cast<double>(max_block_pairs)) chosen = w0;
    s.curve.push_back(std::move(d));
  }
  s.feasible = chosen.has_value();
  s.w0 = chosen.value_or(grid.back());
  return s;
}

// Columns block_id,side,record_index.
inline void write_blocks(std::ostream& out, const PostHocBlocks& blocks) {
  csv::Writer w(out);
  w.row("block_id", "side", "record_index");
  for (std::size_t k = 0; k < blocks.blocks.size(); ++k) {
    for (auto a : blocks.blocks[k].a_members) w.row(k, "A", a);
    for (auto b : blocks.blocks[k].b_members) w.row(k, "B", b);
  }
}

// Columns block_id,a_index,b_index,weight.
inline void write_block_edges(std::ostream& out, const PostHocBlocks& blocks) {
  csv::Writer w(out);
  w.row("block_id", "a_index", "b_index", "weight");
  for (std::size_t k = 0; k < blocks.blocks.size(); ++k)
    for (const auto& e : blocks.blocks[k].edges) w.row(k, e.a, e.b, e.weight);
}

// Columns w0,n_blocks,max_block_pairs,reduction_ratio,pairs_completeness.
inline void write_blocking_curve(std::ostream& out, std::span<const BlockingDiagnostics> curve) {
  csv::Writer w(out);
  w.row("w0", "n_blocks", "max_block_pairs", "reduction_ratio", "pairs_completeness");
  for (const auto& d : curve) {
    w.cell(d.w0).cell(d.n_blocks).cell(d.block_pairs.max).cell(d.reduction_ratio);
    if (d.pairs_completeness)
      w.cell(*d.pairs_completeness);
    else
      w.empty();
    w.end_row();
  }
}

}  // namespace prl
