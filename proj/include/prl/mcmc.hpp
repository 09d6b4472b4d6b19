#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <tuple>
#include <vector>

#include "prl/blocking.hpp"
#include "prl/comparison.hpp"
#include "prl/csv.hpp"
#include "prl/error.hpp"
#include "prl/matching.hpp"
#include "prl/mixture.hpp"
#include "prl/parallel.hpp"
#include "prl/rng.hpp"

namespace prl {

enum class MoveType : int { add = 0, drop = 1, swap = 2 };

// Proposal probabilities of the three move types. Types that are impossible
// in the current state are removed and the rest renormalized.
struct MoveMix {
  double add = 0.4;
  double drop = 0.4;
  double swap = 0.2;

  void validate() const {
    if (!(add >= 0 && drop >= 0 && swap >= 0) || !(add + drop + swap > 0))
      throw ValidationError("move mix must be nonnegative with a positive total");
    if ((add > 0) != (drop > 0)) throw ValidationError("add and drop moves must both be enabled or both disabled");
  }
  double operator[](MoveType t) const { return t == MoveType::add ? add : t == MoveType::drop ? drop : swap; }
};

struct MoveCounts {
  std::array<std::int64_t, 3> proposed{};
  std::array<std::int64_t, 3> accepted{};

  MoveCounts& operator+=(const MoveCounts& o) {
    for (int i = 0; i < 3; ++i) {
      proposed[i] += o.proposed[i];
      accepted[i] += o.accepted[i];
    }
    return *this;
  }
  double acceptance(MoveType t) const {
    auto i = static_cast<int>(t);
    return proposed[i] ? static_cast<double>(accepted[i]) / static_cast<double>(proposed[i]) : 0.0;
  }
};

// Prior p(C) proportional to exp(-theta L) together with Dirichlet priors on m and u.
struct LinkagePrior {
  double theta = 0.0;
  DirichletPrior dirichlet;
};

// Links of one post-hoc block and the moves that change them. The target is
// p(C | m, u) proportional to exp(sum_links gain(pattern)), gain = w - theta,
// over one-to-one matchings inside the block's admissible pairs.
class BlockChain {
 public:
  struct Edge {
    std::uint32_t row = 0;  // local A index
    std::uint32_t col = 0;  // local B index
    std::uint32_t pattern = 0;
    std::size_t pair_index = 0;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
  };

  BlockChain(const Block& block, std::span<const std::uint32_t> pair_pattern) {
    auto local = [](const std::vector<std::uint32_t>& members, std::uint32_t x) {
      return static_cast<std::uint32_t>(std::lower_bound(members.begin(), members.end(), x) - members.begin());
    };
    edges_of_row_.resize(block.a_members.size());
    edges_of_col_.resize(block.b_members.size());
    for (const auto& e : block.edges) {
      Edge x{local(block.a_members, e.a), local(block.b_members, e.b), pair_pattern[e.pair_index], e.pair_index, e.a, e.b};
      const int id = static_cast<int>(edges_.size());
      edges_.push_back(x);
      edges_of_row_[x.row].push_back(id);
      edges_of_col_[x.col].push_back(id);
    }
    for (auto& v : edges_of_row_)
      std::sort(v.begin(), v.end(), [this](int x, int y) { return edges_[x].col < edges_[y].col; });
    row_link_.assign(edges_of_row_.size(), -1);
    col_link_.assign(edges_of_col_.size(), -1);
    link_pos_.assign(edges_.size(), -1);
    hits_.assign(edges_.size(), 0);
  }

  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& links() const { return links_; }
  std::size_t link_count() const { return links_.size(); }
  std::span<const std::int64_t> hits() const { return hits_; }

  // Replaces the current links. Edge ids must form a one-to-one set.
  void set_links(std::span<const int> edge_ids) {
    for (int e : std::vector<int>(links_)) unlink(e);
    for (int e : edge_ids) {
      if (!free(e)) throw ValidationError("initial block links are not one-to-one");
      link(e);
    }
  }

  // Initializes from a matching, keeping only links that are admissible here.
  void set_links(const Matching& m) {
    std::vector<int> ids;
    for (std::size_t e = 0; e < edges_.size(); ++e)
      if (m.contains({edges_[e].a, edges_[e].b})) ids.push_back(static_cast<int>(e));
    set_links(ids);
  }

  void record() {
    for (int e : links_) ++hits_[static_cast<std::size_t>(e)];
  }

  // Adds the patterns of current links into a per-pattern histogram.
  void add_linked_patterns(std::span<std::int64_t> hist) const {
    for (int e : links_) ++hist[edges_[static_cast<std::size_t>(e)].pattern];
  }

  // One Metropolis-Hastings add/drop/swap move. Returns the proposed type,
  // or nothing when no move is possible.
  template <class Rng>
  std::optional<MoveType> mh_step(std::span<const double> gain, const MoveMix& mix, Rng& rng, MoveCounts* counts = nullptr) {
    const auto here = neighborhood(mix);
    if (here.total <= 0.0) return std::nullopt;

    double pick = uniform01(rng) * here.total;
    int chosen = -1;
    for (int t = 0; t < 3; ++t) {
      if (here.weight[t] <= 0.0) continue;
      chosen = t;
      if (pick < here.weight[t]) break;
      pick -= here.weight[t];
    }
    const auto type = static_cast<MoveType>(chosen);

    Move move;
    if (type == MoveType::add) {
      move.add[0] = nth_addable(uniform_index(rng, here.options[0]));
    } else if (type == MoveType::drop) {
      move.remove[0] = links_[uniform_index(rng, here.options[1])];
    } else {
      std::vector<Move> swaps;
      visit_swaps([&](const Move& m) { swaps.push_back(m); });
      move = swaps[uniform_index(rng, swaps.size())];
    }

    double delta = 0.0;
    for (int e : move.add)
      if (e >= 0) delta += gain[edges_[static_cast<std::size_t>(e)].pattern];
    for (int e : move.remove)
      if (e >= 0) delta -= gain[edges_[static_cast<std::size_t>(e)].pattern];

    apply(move);
    const auto there = neighborhood(mix);
    const MoveType reverse = type == MoveType::add ? MoveType::drop : type == MoveType::drop ? MoveType::add : MoveType::swap;
    const auto t = static_cast<int>(type);
    const auto r = static_cast<int>(reverse);
    const double log_forward = std::log(here.weight[t] / here.total) - std::log(static_cast<double>(here.options[t]));
    const double log_backward = std::log(there.weight[r] / there.total) - std::log(static_cast<double>(there.options[r]));
    const double log_ratio = delta + log_backward - log_forward;

    if (counts) ++counts->proposed[t];
    if (log_ratio >= 0.0 || uniform01(rng) < std::exp(log_ratio)) {
      if (counts) ++counts->accepted[t];
    } else {
      revert(move);
    }
    return type;
  }

  // Number of partial matchings over the admissible pairs, or nothing when
  // it exceeds `cap`.
  std::optional<std::size_t> matching_count(std::size_t cap) {
    prepare_enumeration(cap);
    if (!enumeration_) return std::nullopt;
    return enumeration_->offsets.size() - 1;
  }

  // Draws the block's links exactly from their conditional distribution by
  // enumerating all partial matchings. Returns false (state untouched) when
  // there are more than `cap` of them.
  template <class Rng>
  bool gibbs_step(std::span<const double> gain, Rng& rng, std::size_t cap) {
    prepare_enumeration(cap);
    if (!enumeration_) return false;
    const auto& en = *enumeration_;
    const std::size_t n = en.offsets.size() - 1;
    std::vector<double> logw(n, 0.0);
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = en.offsets[k]; i < en.offsets[k + 1]; ++i)
        logw[k] += gain[edges_[static_cast<std::size_t>(en.edges[i])].pattern];
      hi = std::max(hi, logw[k]);
    }
    double total = 0.0;
    for (double& x : logw) {
      x = std::exp(x - hi);
      total += x;
    }
    double pick = uniform01(rng) * total;
    std::size_t chosen = n - 1;
    for (std::size_t k = 0; k < n; ++k) {
      if (pick < logw[k]) {
        chosen = k;
        break;
      }
      pick -= logw[k];
    }
    set_links(std::span<const int>(en.edges.data() + en.offsets[chosen], en.offsets[chosen + 1] - en.offsets[chosen]));
    return true;
  }

  // All partial matchings as edge-id lists (for exact reference distributions).
  std::vector<std::vector<int>> enumerate_matchings(std::size_t cap) {
    prepare_enumeration(cap);
    std::vector<std::vector<int>> out;
    if (!enumeration_) return out;
    for (std::size_t k = 0; k + 1 < enumeration_->offsets.size(); ++k)
      out.emplace_back(enumeration_->edges.begin() + static_cast<std::ptrdiff_t>(enumeration_->offsets[k]),
                       enumeration_->edges.begin() + static_cast<std::ptrdiff_t>(enumeration_->offsets[k + 1]));
    return out;
  }

 private:
  struct Move {
    std::array<int, 2> remove{-1, -1};
    std::array<int, 2> add{-1, -1};
  };
  struct Neighborhood {
    std::array<std::size_t, 3> options{};
    std::array<double, 3> weight{};
    double total = 0.0;
  };
  struct Enumeration {
    std::vector<int> edges;
    std::vector<std::size_t> offsets{0};
  };

  bool free(int e) const {
    const auto& x = edges_[static_cast<std::size_t>(e)];
    return row_link_[x.row] < 0 && col_link_[x.col] < 0;
  }
  void link(int e) {
    const auto& x = edges_[static_cast<std::size_t>(e)];
    row_link_[x.row] = e;
    col_link_[x.col] = e;
    link_pos_[static_cast<std::size_t>(e)] = static_cast<int>(links_.size());
    links_.push_back(e);
  }
  void unlink(int e) {
    const auto& x = edges_[static_cast<std::size_t>(e)];
    row_link_[x.row] = -1;
    col_link_[x.col] = -1;
    const int pos = link_pos_[static_cast<std::size_t>(e)];
    const int last = links_.back();
    links_[static_cast<std::size_t>(pos)] = last;
    link_pos_[static_cast<std::size_t>(last)] = pos;
    links_.pop_back();
    link_pos_[static_cast<std::size_t>(e)] = -1;
  }
  void apply(const Move& m) {
    for (int e : m.remove)
      if (e >= 0) unlink(e);
    for (int e : m.add)
      if (e >= 0) link(e);
  }
  void revert(const Move& m) {
    for (int e : m.add)
      if (e >= 0) unlink(e);
    for (int e : m.remove)
      if (e >= 0) link(e);
  }

  std::size_t addable_count() const {
    std::size_t n = 0;
    for (std::size_t e = 0; e < edges_.size(); ++e) n += free(static_cast<int>(e));
    return n;
  }
  int nth_addable(std::size_t k) const {
    for (std::size_t e = 0; e < edges_.size(); ++e)
      if (free(static_cast<int>(e)) && k-- == 0) return static_cast<int>(e);
    return -1;
  }

  int find_edge(std::uint32_t row, std::uint32_t col) const {
    const auto& v = edges_of_row_[row];
    auto it = std::lower_bound(v.begin(), v.end(), col, [this](int e, std::uint32_t c) { return edges_[static_cast<std::size_t>(e)].col < c; });
    return it != v.end() && edges_[static_cast<std::size_t>(*it)].col == col ? *it : -1;
  }

  // Swap neighbors of the current state: move one end of a link to a free
  // record, or exchange the partners of two links. Each neighbor is visited
  // exactly once, and the reverse move is a swap neighbor of the result.
  template <class Visit>
  void visit_swaps(Visit&& visit) const {
    std::vector<int> ordered(links_);
    std::sort(ordered.begin(), ordered.end());
    for (int e : ordered) {
      const auto& x = edges_[static_cast<std::size_t>(e)];
      for (int f : edges_of_row_[x.row])
        if (f != e && col_link_[edges_[static_cast<std::size_t>(f)].col] < 0) visit(Move{{e, -1}, {f, -1}});
      for (int f : edges_of_col_[x.col])
        if (f != e && row_link_[edges_[static_cast<std::size_t>(f)].row] < 0) visit(Move{{e, -1}, {f, -1}});
    }
    for (std::size_t i = 0; i < ordered.size(); ++i)
      for (std::size_t k = i + 1; k < ordered.size(); ++k) {
        const auto& x = edges_[static_cast<std::size_t>(ordered[i])];
        const auto& y = edges_[static_cast<std::size_t>(ordered[k])];
        const int f1 = find_edge(x.row, y.col);
        if (f1 < 0) continue;
        const int f2 = find_edge(y.row, x.col);
        if (f2 < 0) continue;
        visit(Move{{ordered[i], ordered[k]}, {f1, f2}});
      }
  }

  Neighborhood neighborhood(const MoveMix& mix) const {
    Neighborhood n;
    n.options[0] = addable_count();
    n.options[1] = links_.size();
    visit_swaps([&](const Move&) { ++n.options[2]; });
    const std::array<double, 3> p{mix.add, mix.drop, mix.swap};
    for (int t = 0; t < 3; ++t) {
      n.weight[t] = n.options[t] > 0 ? p[t] : 0.0;
      n.total += n.weight[t];
    }
    return n;
  }

  void prepare_enumeration(std::size_t cap) {
    if (enumeration_ || (enumeration_failed_ && cap <= failed_cap_)) return;
    if (edges_.size() + 1 > cap) {
      enumeration_failed_ = true;
      failed_cap_ = std::max(failed_cap_, cap);
      return;
    }
    Enumeration en;
    std::vector<int> current;
    std::vector<char> col_used(edges_of_col_.size(), 0);
    bool overflow = false;
    auto dfs = [&](auto&& self, std::size_t row) -> void {
      if (overflow) return;
      if (row == edges_of_row_.size()) {
        if (en.offsets.size() - 1 >= cap) {
          overflow = true;
          return;
        }
        en.edges.insert(en.edges.end(), current.begin(), current.end());
        en.offsets.push_back(en.edges.size());
        return;
      }
      self(self, row + 1);
      for (int e : edges_of_row_[row]) {
        const auto col = edges_[static_cast<std::size_t>(e)].col;
        if (col_used[col]) continue;
        col_used[col] = 1;
        current.push_back(e);
        self(self, row + 1);
        current.pop_back();
        col_used[col] = 0;
      }
    };
    dfs(dfs, 0);
    if (overflow) {
      enumeration_failed_ = true;
      failed_cap_ = std::max(failed_cap_, cap);
      return;
    }
    enumeration_ = std::move(en);
  }

  std::vector<Edge> edges_;
  std::vector<std::vector<int>> edges_of_row_;
  std::vector<std::vector<int>> edges_of_col_;
  std::vector<int> row_link_;
  std::vector<int> col_link_;
  std::vector<int> links_;
  std::vector<int> link_pos_;
  std::vector<std::int64_t> hits_;
  std::optional<Enumeration> enumeration_;
  bool enumeration_failed_ = false;
  std::size_t failed_cap_ = 0;
};

template <class Rng>
std::optional<MoveType> block_update(BlockChain& block, std::span<const double> gain, const MoveMix& mix, Rng& rng,
                                     MoveCounts* counts = nullptr) {
  return block.mh_step(gain, mix, rng, counts);
}

template <class Rng>
bool block_gibbs_enumerate(BlockChain& block, std::span<const double> gain, Rng& rng, std::size_t cap) {
  return block.gibbs_step(gain, rng, cap);
}

// Per-field level counts among linked and unlinked candidate pairs.
struct SufficientStats {
  std::vector<std::vector<std::int64_t>> linked;
  std::vector<std::vector<std::int64_t>> unlinked;

  bool operator==(const SufficientStats&) const = default;
};

inline SufficientStats stats_from_linked_patterns(const PatternTable& table, std::span<const std::int64_t> linked_hist) {
  SufficientStats s;
  s.unlinked = table.level_totals();
  for (int k : table.level_counts) s.linked.emplace_back(static_cast<std::size_t>(k), 0);
  for (std::size_t g = 0; g < table.size(); ++g) {
    if (linked_hist[g] == 0) continue;
    for (std::size_t j = 0; j < table.fields(); ++j) {
      const auto h = static_cast<std::size_t>(table.patterns[g][j] - 1);
      s.linked[j][h] += linked_hist[g];
      s.unlinked[j][h] -= linked_hist[g];
    }
  }
  return s;
}

// Conjugate draw: m_j ~ Dir(alpha_mj + linked_j), u_j ~ Dir(alpha_uj + unlinked_j).
template <class Rng>
MixtureParams update_params(const SufficientStats& stats, const DirichletPrior& prior, double pi, Rng& rng) {
  MixtureParams p;
  p.pi = pi;
  for (std::size_t j = 0; j < stats.linked.size(); ++j) {
    std::vector<double> am(prior.alpha_m[j]), au(prior.alpha_u[j]);
    for (std::size_t h = 0; h < am.size(); ++h) {
      am[h] += static_cast<double>(stats.linked[j][h]);
      au[h] += static_cast<double>(stats.unlinked[j][h]);
    }
    p.m.push_back(sample_dirichlet(std::span<const double>(am), rng));
    p.u.push_back(sample_dirichlet(std::span<const double>(au), rng));
  }
  return p;
}

struct McmcOptions {
  int iterations = 1000;
  int burn_in = 100;
  std::uint64_t seed = 1;
  MoveMix mix;
  // Blocks with at most this many partial matchings are updated by exact
  // enumeration; larger blocks by Metropolis-Hastings.
  std::size_t gibbs_cap = 64;
  int moves_per_sweep = 1;
  bool update_params = true;
  int workers = 1;

  void validate() const {
    if (iterations <= 0) throw ValidationError("mcmc iterations must be positive");
    if (burn_in < 0 || burn_in >= iterations) throw ValidationError("mcmc burn_in must satisfy 0 <= burn_in < iterations");
    if (moves_per_sweep < 1) throw ValidationError("moves_per_sweep must be >= 1");
    mix.validate();
  }
};

struct PairFrequency {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  double frequency = 0.0;
  std::size_t pair_index = 0;
};

struct PosteriorSummary {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  // Link frequency over retained sweeps for every admissible pair.
  std::vector<PairFrequency> pairs;
  // Total links after every sweep, burn-in included.
  std::vector<std::size_t> link_trace;
  int iterations = 0;
  int burn_in = 0;
  std::int64_t retained = 0;
  std::uint64_t seed = 0;
  double theta = 0.0;
  double w0 = 0.0;
  MoveCounts moves;
  std::size_t gibbs_blocks = 0;
  std::size_t mh_blocks = 0;
  MixtureParams final_params;
};

// Sampler over (C, m, u) with C restricted to post-hoc block pairs. Each
// sweep updates every block given (m, u), in parallel, then (m, u) given C.
// Random streams depend only on (seed, block, sweep), so the output does not
// depend on the worker count.
class RestrictedSampler {
 public:
  RestrictedSampler(const PostHocBlocks& blocks, const PatternTable& table, LinkagePrior prior, MixtureParams init,
                    const Matching* init_matching, McmcOptions options)
      : table_(table), prior_(std::move(prior)), params_(std::move(init)), options_(options) {
    options_.validate();
    params_.validate();
    if (!std::isfinite(prior_.theta)) throw ValidationError("theta must be finite");
    if (params_.level_counts() != table.level_counts) throw ValidationError("parameters do not match the pattern table");
    if (options_.update_params) prior_.dirichlet.validate(table.level_counts);
    n_a_ = blocks.n_a;
    n_b_ = blocks.n_b;
    w0_ = blocks.w0;
    chains_.reserve(blocks.blocks.size());
    use_gibbs_.reserve(blocks.blocks.size());
    for (const auto& b : blocks.blocks) {
      chains_.emplace_back(b, table.pair_pattern);
      if (init_matching) chains_.back().set_links(*init_matching);
      use_gibbs_.push_back(chains_.back().matching_count(options_.gibbs_cap).has_value());
    }
    block_moves_.resize(chains_.size());
  }

  void sweep() {
    const auto weights = weight_table(table_, params_);
    std::vector<double> gain(weights.size());
    for (std::size_t g = 0; g < gain.size(); ++g) gain[g] = weights.weight[g] - prior_.theta;
    const bool keep = sweep_ >= options_.burn_in;
    parallel_for(chains_.size(), options_.workers, [&](std::size_t k) {
      SplitMix64 rng(derive_seed(options_.seed, k, static_cast<std::uint64_t>(sweep_)));
      if (use_gibbs_[k]) {
        chains_[k].gibbs_step(gain, rng, options_.gibbs_cap);
      } else {
        for (int i = 0; i < options_.moves_per_sweep; ++i) chains_[k].mh_step(gain, options_.mix, rng, &block_moves_[k]);
      }
      if (keep) chains_[k].record();
    });
    std::size_t links = 0;
    for (const auto& c : chains_) links += c.link_count();
    link_trace_.push_back(links);
    if (keep) ++retained_;
    if (options_.update_params) {
      SplitMix64 rng(derive_seed(options_.seed, label_hash("params"), static_cast<std::uint64_t>(sweep_)));
      params_ = update_params(linked_stats(), prior_.dirichlet, params_.pi, rng);
    }
    ++sweep_;
  }

  PosteriorSummary run() {
    while (sweep_ < options_.iterations) sweep();
    return summary();
  }

  PosteriorSummary summary() const {
    PosteriorSummary s;
    s.n_a = n_a_;
    s.n_b = n_b_;
    s.link_trace = link_trace_;
    s.iterations = sweep_;
    s.burn_in = options_.burn_in;
    s.retained = retained_;
    s.seed = options_.seed;
    s.theta = prior_.theta;
    s.w0 = w0_;
    s.final_params = params_;
    for (std::size_t k = 0; k < chains_.size(); ++k) {
      s.moves += block_moves_[k];
      (use_gibbs_[k] ? s.gibbs_blocks : s.mh_blocks)++;
      const auto& c = chains_[k];
      for (std::size_t e = 0; e < c.edges().size(); ++e) {
        const auto& x = c.edges()[e];
        const double f = retained_ ? static_cast<double>(c.hits()[e]) / static_cast<double>(retained_) : 0.0;
        s.pairs.push_back({x.a, x.b, f, x.pair_index});
      }
    }
    std::sort(s.pairs.begin(), s.pairs.end(),
              [](const PairFrequency& x, const PairFrequency& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
    return s;
  }

  // Statistics from the per-block pattern histograms of the current links.
  SufficientStats linked_stats() const {
    std::vector<std::int64_t> hist(table_.size(), 0);
    for (const auto& c : chains_) c.add_linked_patterns(hist);
    return stats_from_linked_patterns(table_, hist);
  }

  // Same statistics recounted from the current matching via the pair patterns.
  SufficientStats recount_stats() const {
    std::vector<std::int64_t> hist(table_.size(), 0);
    for (const auto& l : current_matching_pairs()) ++hist[table_.pair_pattern[l]];
    return stats_from_linked_patterns(table_, hist);
  }

  Matching current_matching() const {
    std::vector<Link> links;
    for (const auto& c : chains_)
      for (int e : c.links()) links.push_back({c.edges()[static_cast<std::size_t>(e)].a, c.edges()[static_cast<std::size_t>(e)].b});
    return Matching(n_a_, n_b_, std::move(links));
  }

  const MixtureParams& params() const { return params_; }
  const std::vector<BlockChain>& chains() const { return chains_; }
  int sweeps_done() const { return sweep_; }

 private:
  std::vector<std::size_t> current_matching_pairs() const {
    std::vector<std::size_t> out;
    for (const auto& c : chains_)
      for (int e : c.links()) out.push_back(c.edges()[static_cast<std::size_t>(e)].pair_index);
    return out;
  }

  const PatternTable& table_;
  LinkagePrior prior_;
  MixtureParams params_;
  McmcOptions options_;
  std::size_t n_a_ = 0;
  std::size_t n_b_ = 0;
  double w0_ = 0.0;
  std::vector<BlockChain> chains_;
  std::vector<char> use_gibbs_;
  std::vector<MoveCounts> block_moves_;
  std::vector<std::size_t> link_trace_;
  std::int64_t retained_ = 0;
  int sweep_ = 0;
};

inline PosteriorSummary run_chain(const PostHocBlocks& blocks, const PatternTable& table, const LinkagePrior& prior,
                                  const MixtureParams& init, const Matching* init_matching, const McmcOptions& options) {
  return RestrictedSampler(blocks, table, prior, init, init_matching, options).run();
}

// Links every pair whose posterior link frequency exceeds 0.5. Should Monte
// Carlo error put two pairs sharing a record above 0.5, the more frequent wins.
inline Matching bayes_estimate(const PosteriorSummary& summary) {
  std::vector<PairFrequency> over;
  for (const auto& p : summary.pairs)
    if (p.frequency > 0.5) over.push_back(p);
  std::stable_sort(over.begin(), over.end(), [](const PairFrequency& x, const PairFrequency& y) { return x.frequency > y.frequency; });
  std::vector<char> used_a(summary.n_a, 0), used_b(summary.n_b, 0);
  std::vector<Link> links;
  for (const auto& p : over) {
    if (used_a[p.a] || used_b[p.b]) continue;
    used_a[p.a] = used_b[p.b] = 1;
    links.push_back({p.a, p.b});
  }
  return Matching(summary.n_a, summary.n_b, std::move(links));
}

// Largest per-record sum of link frequencies, over both files.
inline double max_record_frequency_sum(const PosteriorSummary& summary) {
  std::vector<double> sa(summary.n_a, 0.0), sb(summary.n_b, 0.0);
  for (const auto& p : summary.pairs) {
    sa[p.a] += p.frequency;
    sb[p.b] += p.frequency;
  }
  double hi = 0.0;
  for (double x : sa) hi = std::max(hi, x);
  for (double x : sb) hi = std::max(hi, x);
  return hi;
}

// Columns a_index,b_index,frequency.
inline void write_posterior(std::ostream& out, const PosteriorSummary& s) {
  csv::Writer w(out);
  w.row("a_index", "b_index", "frequency");
  for (const auto& p : s.pairs) w.row(p.a, p.b, p.frequency);
}

// Columns iteration,L.
inline void write_link_trace(std::ostream& out, const PosteriorSummary& s) {
  csv::Writer w(out);
  w.row("iteration", "L");
  for (std::size_t i = 0; i < s.link_trace.size(); ++i) w.row(i, s.link_trace[i]);
}

}  // namespace prl
