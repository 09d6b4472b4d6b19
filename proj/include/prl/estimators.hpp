#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "prl/assignment.hpp"
#include "prl/comparison.hpp"
#include "prl/error.hpp"
#include "prl/matching.hpp"
#include "prl/mixture.hpp"
#include "prl/parallel.hpp"

namespace prl {

enum class Decision { non_link, indeterminate, link };

inline const char* to_string(Decision d) {
  switch (d) {
    case Decision::link: return "link";
    case Decision::non_link: return "non-link";
    default: return "indeterminate";
  }
}

struct FSDecision {
  std::vector<Decision> decisions;
  double lambda = 0.0;
  double mu = 0.0;

  std::size_t count(Decision d) const {
    return static_cast<std::size_t>(std::count(decisions.begin(), decisions.end(), d));
  }
};

// w > lambda links, w < mu rejects, anything in [mu, lambda] is indeterminate.
inline FSDecision fs_decide(std::span<const double> weights, double lambda, double mu) {
  if (lambda < mu) throw ValidationError("fs_decide: lambda must be >= mu");
  FSDecision out{{}, lambda, mu};
  out.decisions.reserve(weights.size());
  for (double w : weights)
    out.decisions.push_back(w > lambda ? Decision::link : w < mu ? Decision::non_link : Decision::indeterminate);
  return out;
}

inline WeightMatrix group_matrix(const PairGroup& g, std::span<const double> pair_weight) {
  WeightMatrix m(g.a_members.size(), g.b_members.size());
  for (std::size_t i = 0; i < g.a_members.size(); ++i)
    for (std::size_t j = 0; j < g.b_members.size(); ++j) m(i, j) = pair_weight[g.offset + i * g.b_members.size() + j];
  return m;
}

// Pair indices of an assignment solved on one group's matrix.
inline void collect_links(const PairGroup& g, const Assignment& a, std::vector<std::size_t>& out) {
  for (std::size_t i = 0; i < a.row_to_col.size(); ++i)
    if (a.row_to_col[i] >= 0) out.push_back(g.offset + i * g.b_members.size() + static_cast<std::size_t>(a.row_to_col[i]));
}

inline Matching matching_from_pairs(const CandidatePairSet& pairs, std::span<const std::size_t> pair_indices) {
  std::vector<Link> links;
  links.reserve(pair_indices.size());
  for (auto p : pair_indices) links.push_back({pairs[p].a, pairs[p].b});
  return Matching(pairs.n_a(), pairs.n_b(), std::move(links));
}

struct LsapThresholdResult {
  Matching assignment;  // complete LSAP solution
  Matching matching;    // after deleting links with weight <= mu
};

// Stages two and three of EM+LSAP for given pair weights: a complete LSAP
// per candidate group, then deletion of the assigned links with w <= mu.
inline LsapThresholdResult lsap_then_threshold(const CandidatePairSet& pairs, std::span<const double> pair_weight,
                                               double mu, int workers = 1) {
  if (pair_weight.size() != pairs.size()) throw ValidationError("one weight per candidate pair required");
  const auto& groups = pairs.groups();
  std::vector<std::vector<std::size_t>> per_group(groups.size());
  parallel_for(groups.size(), workers, [&](std::size_t k) {
    collect_links(groups[k], solve_lsap(group_matrix(groups[k], pair_weight)), per_group[k]);
  });
  std::vector<std::size_t> all, kept;
  for (const auto& v : per_group)
    for (auto p : v) {
      all.push_back(p);
      if (pair_weight[p] > mu) kept.push_back(p);
    }
  return {matching_from_pairs(pairs, all), matching_from_pairs(pairs, kept)};
}

struct EmLsapResult {
  EmResult em;
  WeightTable weights;
  Matching assignment;
  Matching matching;
};

inline EmLsapResult em_lsap_estimate(const PatternTable& table, const CandidatePairSet& pairs, MixtureParams init,
                                     double mu, const EmOptions& em_options = {}, int workers = 1) {
  EmLsapResult r;
  r.em = em_fit(table, std::move(init), em_options);
  r.weights = weight_table(table, r.em.params);
  auto lt = lsap_then_threshold(pairs, pair_weights(table, r.weights), mu, workers);
  r.assignment = std::move(lt.assignment);
  r.matching = std::move(lt.matching);
  return r;
}

struct PenalizedOptions {
  int max_outer = 50;
  // When false (m, u) stay at their initial values and only the C-step runs.
  bool update_params = true;
  int workers = 1;
};

struct PenalizedFitResult {
  Matching matching;
  std::vector<std::size_t> link_pairs;
  MixtureParams params;
  // Penalized objective (including pseudocount terms) after every outer iteration.
  std::vector<double> objective;
  double theta = 0.0;
  int iterations = 0;
  bool converged = false;
  // Per-group solver state for warm starts.
  std::vector<LsapHint> hints;
};

// Number of linked pairs showing each pattern.
inline std::vector<std::int64_t> linked_pattern_counts(const PatternTable& table, std::span<const std::size_t> link_pairs) {
  std::vector<std::int64_t> h(table.size(), 0);
  for (auto p : link_pairs) ++h[table.pair_pattern[p]];
  return h;
}

// sum_ab log u_ab + C_ab (w_ab - theta) + sum_jh n_mjh log m_jh + n_ujh log u_jh,
// with log probabilities floored as in the weights.
inline double penalized_objective(const PatternTable& table, const MixtureParams& params, const DirichletPrior& prior,
                                  double theta, std::span<const std::int64_t> linked_hist) {
  const auto wt = weight_table(table, params);
  double obj = 0.0;
  for (std::size_t g = 0; g < table.size(); ++g)
    obj += static_cast<double>(table.counts[g]) * wt.log_u[g] + static_cast<double>(linked_hist[g]) * (wt.weight[g] - theta);
  for (std::size_t j = 0; j < params.fields(); ++j)
    for (std::size_t h = 0; h < params.m[j].size(); ++h) {
      if (prior.pseudo_m[j][h] > 0.0) obj += prior.pseudo_m[j][h] * floored_log(params.m[j][h]);
      if (prior.pseudo_u[j][h] > 0.0) obj += prior.pseudo_u[j][h] * floored_log(params.u[j][h]);
    }
  return obj;
}

// Closed-form maximizer of the penalized objective in (m, u) for fixed links.
// A distribution with zero total mass (no links and no pseudocounts) keeps
// its previous value.
inline MixtureParams penalized_m_step(const PatternTable& table, const DirichletPrior& prior,
                                      std::span<const std::int64_t> linked_hist, const MixtureParams& previous) {
  MixtureParams next;
  std::int64_t links = 0;
  for (auto c : linked_hist) links += c;
  next.pi = table.total_pairs > 0 ? static_cast<double>(links) / static_cast<double>(table.total_pairs) : 0.0;
  const auto totals = table.level_totals();
  for (std::size_t j = 0; j < table.fields(); ++j) {
    const auto k = static_cast<std::size_t>(table.level_counts[j]);
    std::vector<double> linked(k, 0.0);
    for (std::size_t g = 0; g < table.size(); ++g)
      linked[static_cast<std::size_t>(table.patterns[g][j] - 1)] += static_cast<double>(linked_hist[g]);
    std::vector<double> mj(k), uj(k);
    double sm = 0.0, su = 0.0;
    for (std::size_t h = 0; h < k; ++h) {
      mj[h] = prior.pseudo_m[j][h] + linked[h];
      uj[h] = prior.pseudo_u[j][h] + (static_cast<double>(totals[j][h]) - linked[h]);
      sm += mj[h];
      su += uj[h];
    }
    if (sm > 0.0) {
      for (double& x : mj) x /= sm;
    } else {
      mj = previous.m[j];
    }
    if (su > 0.0) {
      for (double& x : uj) x /= su;
    } else {
      uj = previous.u[j];
    }
    next.m.push_back(std::move(mj));
    next.u.push_back(std::move(uj));
  }
  return next;
}

// Soft-thresholded LSAP per candidate group at fixed weights.
inline std::vector<std::size_t> penalized_c_step(const CandidatePairSet& pairs, std::span<const double> pair_weight,
                                                 double theta, std::vector<LsapHint>& hints, int workers = 1) {
  const auto& groups = pairs.groups();
  hints.resize(groups.size());
  std::vector<std::vector<std::size_t>> per_group(groups.size());
  parallel_for(groups.size(), workers, [&](std::size_t k) {
    auto a = solve_thresholded(group_matrix(groups[k], pair_weight), theta, hints[k]);
    collect_links(groups[k], a, per_group[k]);
    hints[k] = warm_start_hint(a);
  });
  std::vector<std::size_t> links;
  for (const auto& v : per_group) links.insert(links.end(), v.begin(), v.end());
  std::sort(links.begin(), links.end());
  return links;
}

// Alternating maximization of the penalized likelihood: C-step by
// soft-thresholded LSAP, then closed-form (m, u) with pseudocounts. Starts
// from the empty matching, or from `warm` (its links and solver state) when
// given; stops once the link set repeats.
inline PenalizedFitResult penalized_likelihood_fit(const PatternTable& table, const CandidatePairSet& pairs,
                                                   const DirichletPrior& prior, double theta, MixtureParams init,
                                                   const PenalizedOptions& options = {},
                                                   const PenalizedFitResult* warm = nullptr) {
  if (!std::isfinite(theta)) throw ValidationError("theta must be finite");
  init.validate();
  if (init.level_counts() != table.level_counts) throw ValidationError("parameters do not match the pattern table");
  prior.validate(table.level_counts);
  if (table.pair_pattern.size() != pairs.size()) throw ValidationError("pattern table does not cover the candidate pairs");

  PenalizedFitResult r;
  r.theta = theta;
  r.params = std::move(init);
  std::vector<std::size_t> previous;
  if (warm) {
    previous = warm->link_pairs;
    r.hints = warm->hints;
  }
  for (int it = 0; it < options.max_outer; ++it) {
    const auto w = pair_weights(table, weight_table(table, r.params));
    auto links = penalized_c_step(pairs, w, theta, r.hints, options.workers);
    const auto hist = linked_pattern_counts(table, links);
    if (options.update_params) r.params = penalized_m_step(table, prior, hist, r.params);
    r.objective.push_back(penalized_objective(table, r.params, prior, theta, hist));
    ++r.iterations;
    const bool same = links == previous;
    previous = std::move(links);
    if (same) {
      r.converged = true;
      break;
    }
  }
  r.link_pairs = previous;
  r.matching = matching_from_pairs(pairs, r.link_pairs);
  return r;
}

// Runs the alternation from each start and keeps the fit with the highest
// final objective; earlier starts win ties. One start can settle on a local
// optimum when it overrates a rare comparison level, since the links it
// admits first then pull u for that level towards zero.
inline PenalizedFitResult penalized_fit_multistart(const PatternTable& table, const CandidatePairSet& pairs,
                                                   const DirichletPrior& prior, double theta,
                                                   const std::vector<MixtureParams>& starts,
                                                   const PenalizedOptions& options = {}) {
  if (starts.empty()) throw ValidationError("no starting parameters");
  std::optional<PenalizedFitResult> best;
  for (const auto& s : starts) {
    auto fit = penalized_likelihood_fit(table, pairs, prior, theta, s, options);
    if (!best || fit.objective.back() > best->objective.back()) best = std::move(fit);
  }
  return std::move(*best);
}

// Margin start plus the EM fit from the agreement start.
inline std::vector<MixtureParams> default_penalized_starts(const PatternTable& table, const std::vector<int>& agreement,
                                                           double pi = 0.1, const EmOptions& em = {}) {
  return {margin_init(table, agreement, pi),
          em_fit(table, MixtureParams::default_init(table.level_counts, agreement, pi), em).params};
}

struct SweepPoint {
  double theta = 0.0;
  std::size_t link_count = 0;
  Matching matching;
  MixtureParams params;
  int iterations = 0;
};

// One penalized fit per grid value, in grid order, each warm-started from
// the previous fit's parameters, links and solver state.
inline std::vector<SweepPoint> theta_sweep(const PatternTable& table, const CandidatePairSet& pairs,
                                           const DirichletPrior& prior, std::span<const double> theta_grid,
                                           const MixtureParams& init, const PenalizedOptions& options = {}) {
  if (theta_grid.empty()) throw ValidationError("theta grid is empty");
  std::vector<SweepPoint> out;
  std::optional<PenalizedFitResult> last;
  for (double theta : theta_grid) {
    if (!std::isfinite(theta)) throw ValidationError("theta grid values must be finite");
    auto fit = penalized_likelihood_fit(table, pairs, prior, theta, last ? last->params : init, options,
                                        last ? &*last : nullptr);
    out.push_back({theta, fit.matching.size(), fit.matching, fit.params, fit.iterations});
    last = std::move(fit);
  }
  return out;
}

}  // namespace prl
