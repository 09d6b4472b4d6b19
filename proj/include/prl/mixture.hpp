#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "prl/comparison.hpp"
#include "prl/csv.hpp"
#include "prl/error.hpp"

namespace prl {

// Probabilities below this are clamped before taking logs, which caps
// |log m - log u| per field at about 23.
inline constexpr double kProbabilityFloor = 1e-10;

inline double floored_log(double p) { return std::log(std::max(p, kProbabilityFloor)); }

// Per-field level distributions given match (m) and non-match (u), and the
// match proportion pi of the independent-pairs mixture.
struct MixtureParams {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> u;
  double pi = 0.1;

  std::size_t fields() const { return m.size(); }

  std::vector<int> level_counts() const {
    std::vector<int> k;
    for (const auto& mj : m) k.push_back(static_cast<int>(mj.size()));
    return k;
  }

  void validate(double tol = 1e-9) const {
    if (m.size() != u.size() || m.empty()) throw ValidationError("m and u must cover the same nonempty field set");
    auto check = [tol](const std::vector<double>& v, const char* name, std::size_t j) {
      double s = 0.0;
      for (double x : v) {
        if (!(x >= 0.0)) throw ValidationError(std::string(name) + " has a negative or NaN entry in field " + std::to_string(j));
        s += x;
      }
      if (std::abs(s - 1.0) > tol)
        throw ValidationError(std::string(name) + " does not sum to 1 in field " + std::to_string(j));
    };
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (m[j].size() != u[j].size() || m[j].size() < 2)
        throw ValidationError("field " + std::to_string(j) + ": m and u need the same number (>= 2) of levels");
      check(m[j], "m", j);
      check(u[j], "u", j);
    }
    if (!(pi >= 0.0 && pi <= 1.0)) throw ValidationError("pi must lie in [0,1]");
  }

  // Exchanging the components negates every weight.
  MixtureParams swapped() const { return {u, m, 1.0 - pi}; }

  static MixtureParams uniform(const std::vector<int>& levels, double pi = 0.1) {
    MixtureParams p;
    p.pi = pi;
    for (int k : levels) {
      p.m.emplace_back(static_cast<std::size_t>(k), 1.0 / k);
      p.u.emplace_back(static_cast<std::size_t>(k), 1.0 / k);
    }
    return p;
  }

  // m puts 0.8 on the top agreement level, u puts 0.8 on the lowest level;
  // the remaining 0.2 is spread evenly. `agreement` gives the top agreement
  // level per field (it differs from the level count when a missing level is
  // appended); empty means the last level.
  static MixtureParams default_init(const std::vector<int>& levels, const std::vector<int>& agreement = {},
                                    double pi = 0.1) {
    MixtureParams p;
    p.pi = pi;
    for (std::size_t j = 0; j < levels.size(); ++j) {
      const int k = levels[j];
      const int top = agreement.empty() ? k : agreement[j];
      std::vector<double> mj(static_cast<std::size_t>(k), 0.2 / (k - 1));
      std::vector<double> uj(static_cast<std::size_t>(k), 0.2 / (k - 1));
      mj[top - 1] = 0.8;
      uj[0] = 0.8;
      p.m.push_back(std::move(mj));
      p.u.push_back(std::move(uj));
    }
    return p;
  }
};

// The agreement-concentrated m of default_init with u set to the level
// frequencies over all candidate pairs, which are almost all non-matches.
// Levels never observed get the probability floor.
inline MixtureParams margin_init(const PatternTable& table, const std::vector<int>& agreement = {}, double pi = 0.1) {
  if (table.total_pairs <= 0) throw ValidationError("margin_init needs a nonempty pattern table");
  auto p = MixtureParams::default_init(table.level_counts, agreement, pi);
  const auto totals = table.level_totals();
  for (std::size_t j = 0; j < p.u.size(); ++j) {
    double sum = 0.0;
    for (std::size_t h = 0; h < p.u[j].size(); ++h) {
      p.u[j][h] = std::max(static_cast<double>(totals[j][h]) / static_cast<double>(table.total_pairs), kProbabilityFloor);
      sum += p.u[j][h];
    }
    for (double& x : p.u[j]) x /= sum;
  }
  return p;
}

// Dirichlet concentrations (sampler) and additive pseudocounts (penalized
// M-step), per field and level.
struct DirichletPrior {
  std::vector<std::vector<double>> alpha_m;
  std::vector<std::vector<double>> alpha_u;
  std::vector<std::vector<double>> pseudo_m;
  std::vector<std::vector<double>> pseudo_u;

  void validate(const std::vector<int>& levels) const {
    auto check = [&](const std::vector<std::vector<double>>& v, const char* name, bool strict) {
      if (v.size() != levels.size()) throw ValidationError(std::string(name) + ": wrong number of fields");
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (static_cast<int>(v[j].size()) != levels[j])
          throw ValidationError(std::string(name) + ": wrong number of levels in field " + std::to_string(j));
        for (double x : v[j])
          if (strict ? !(x > 0.0) : !(x >= 0.0) || !std::isfinite(x))
            throw ValidationError(std::string(name) + (strict ? " must be positive" : " must be nonnegative"));
      }
    };
    check(alpha_m, "alpha_m", true);
    check(alpha_u, "alpha_u", true);
    check(pseudo_m, "pseudocounts m", false);
    check(pseudo_u, "pseudocounts u", false);
  }

  // Every cell gets the same pseudocount; Dirichlet concentrations are the
  // matching pseudocount + 1, so the Dirichlet mode is the penalized M-step.
  static DirichletPrior flat(const std::vector<int>& levels, double pseudocount = 1.0) {
    DirichletPrior p;
    for (int k : levels) {
      const auto n = static_cast<std::size_t>(k);
      p.pseudo_m.emplace_back(n, pseudocount);
      p.pseudo_u.emplace_back(n, pseudocount);
      p.alpha_m.emplace_back(n, pseudocount + 1.0);
      p.alpha_u.emplace_back(n, pseudocount + 1.0);
    }
    return p;
  }

  // Pseudocounts alpha - 1 (clamped at 0): the posterior mode under these
  // Dirichlets is the penalized-likelihood M-step with these pseudocounts.
  static DirichletPrior from_alpha(std::vector<std::vector<double>> alpha_m,
                                   std::vector<std::vector<double>> alpha_u) {
    DirichletPrior p;
    auto to_pseudo = [](const std::vector<std::vector<double>>& a) {
      auto n = a;
      for (auto& v : n)
        for (double& x : v) x = std::max(0.0, x - 1.0);
      return n;
    };
    p.pseudo_m = to_pseudo(alpha_m);
    p.pseudo_u = to_pseudo(alpha_u);
    p.alpha_m = std::move(alpha_m);
    p.alpha_u = std::move(alpha_u);
    return p;
  }
};

struct PatternLogLikelihood {
  double log_m = 0.0;
  double log_u = 0.0;
};

inline PatternLogLikelihood pattern_log_likelihoods(const ComparisonPattern& pattern, const MixtureParams& params) {
  if (pattern.size() != params.fields()) throw ValidationError("pattern length does not match parameters");
  PatternLogLikelihood ll;
  for (std::size_t j = 0; j < pattern.size(); ++j) {
    const int h = pattern[j];
    if (h < 1 || h > static_cast<int>(params.m[j].size()))
      throw ValidationError("level " + std::to_string(h) + " out of range in field " + std::to_string(j));
    ll.log_m += floored_log(params.m[j][h - 1]);
    ll.log_u += floored_log(params.u[j][h - 1]);
  }
  return ll;
}

inline double weight_of_pattern(const ComparisonPattern& pattern, const MixtureParams& params) {
  auto ll = pattern_log_likelihoods(pattern, params);
  return ll.log_m - ll.log_u;
}

struct WeightTable {
  std::vector<double> log_m;
  std::vector<double> log_u;
  std::vector<double> weight;

  std::size_t size() const { return weight.size(); }
};

inline WeightTable weight_table(const PatternTable& table, const MixtureParams& params) {
  WeightTable w;
  for (const auto& p : table.patterns) {
    auto ll = pattern_log_likelihoods(p, params);
    w.log_m.push_back(ll.log_m);
    w.log_u.push_back(ll.log_u);
    w.weight.push_back(ll.log_m - ll.log_u);
  }
  return w;
}

// Weight of every candidate pair, via its pattern.
inline std::vector<double> pair_weights(const PatternTable& table, const WeightTable& weights) {
  std::vector<double> out;
  out.reserve(table.pair_pattern.size());
  for (auto g : table.pair_pattern) out.push_back(weights.weight[g]);
  return out;
}

// Columns level_1..level_d,count,log_m,log_u,weight.
inline void write_weight_table(std::ostream& out, const PatternTable& table, const WeightTable& w) {
  csv::Writer wr(out);
  for (std::size_t j = 0; j < table.fields(); ++j) wr.cell("level_" + std::to_string(j + 1));
  wr.row("count", "log_m", "log_u", "weight");
  for (std::size_t g = 0; g < table.size(); ++g) {
    for (std::size_t j = 0; j < table.fields(); ++j) wr.cell(table.patterns[g][j]);
    wr.row(table.counts[g], w.log_m[g], w.log_u[g], w.weight[g]);
  }
}

struct EmOptions {
  double tol = 1e-6;
  int max_iter = 1000;
};

struct EmResult {
  MixtureParams params;
  // Observed-data log likelihood of the initial value and after every iteration.
  std::vector<double> log_likelihood;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Unfloored log m(g) and log u(g); -inf where a factor is exactly zero.
inline void raw_pattern_logs(const ComparisonPattern& p, const MixtureParams& params, double& lm, double& lu) {
  lm = 0.0;
  lu = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    lm += std::log(params.m[j][p[j] - 1]);
    lu += std::log(params.u[j][p[j] - 1]);
  }
}

inline double log_add(double x, double y) {
  if (x == -std::numeric_limits<double>::infinity()) return y;
  if (y == -std::numeric_limits<double>::infinity()) return x;
  const double hi = std::max(x, y);
  return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

}  // namespace detail

// Observed-data log likelihood sum_g count(g) log[pi m(g) + (1 - pi) u(g)].
inline double mixture_log_likelihood(const PatternTable& table, const MixtureParams& params) {
  const double log_pi = std::log(params.pi);
  const double log_1mpi = std::log1p(-params.pi);
  double ll = 0.0;
  for (std::size_t g = 0; g < table.size(); ++g) {
    double lm, lu;
    detail::raw_pattern_logs(table.patterns[g], params, lm, lu);
    ll += static_cast<double>(table.counts[g]) * detail::log_add(log_pi + lm, log_1mpi + lu);
  }
  return ll;
}

// EM for the two-component latent class model on the aggregated pattern
// table (each candidate pair treated as an independent draw).
inline EmResult em_fit(const PatternTable& table, MixtureParams init, const EmOptions& options = {}) {
  init.validate();
  if (table.size() == 0 || table.total_pairs == 0) throw ValidationError("em_fit: empty pattern table");
  if (init.level_counts() != table.level_counts) throw ValidationError("em_fit: parameters do not match the table");

  EmResult result;
  result.params = std::move(init);
  auto& params = result.params;
  result.log_likelihood.push_back(mixture_log_likelihood(table, params));
  const double total = static_cast<double>(table.total_pairs);

  std::vector<double> resp(table.size());
  for (int it = 0; it < options.max_iter; ++it) {
    const double log_pi = std::log(params.pi);
    const double log_1mpi = std::log1p(-params.pi);
    double match_mass = 0.0;
    double nonmatch_mass = 0.0;
    for (std::size_t g = 0; g < table.size(); ++g) {
      double lm, lu;
      detail::raw_pattern_logs(table.patterns[g], params, lm, lu);
      const double a = log_pi + lm;
      const double b = log_1mpi + lu;
      const double denom = detail::log_add(a, b);
      resp[g] = a == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(a - denom);
      match_mass += resp[g] * static_cast<double>(table.counts[g]);
      nonmatch_mass += (1.0 - resp[g]) * static_cast<double>(table.counts[g]);
    }

    MixtureParams next;
    next.pi = match_mass / total;
    for (std::size_t j = 0; j < table.fields(); ++j) {
      const auto k = static_cast<std::size_t>(table.level_counts[j]);
      std::vector<double> mj(k, 0.0), uj(k, 0.0);
      for (std::size_t g = 0; g < table.size(); ++g) {
        const double c = static_cast<double>(table.counts[g]);
        const auto h = static_cast<std::size_t>(table.patterns[g][j] - 1);
        mj[h] += resp[g] * c;
        uj[h] += (1.0 - resp[g]) * c;
      }
      // A component with no mass keeps its previous distribution.
      if (match_mass > 0.0) {
        for (double& x : mj) x /= match_mass;
      } else {
        mj = params.m[j];
      }
      if (nonmatch_mass > 0.0) {
        for (double& x : uj) x /= nonmatch_mass;
      } else {
        uj = params.u[j];
      }
      next.m.push_back(std::move(mj));
      next.u.push_back(std::move(uj));
    }
    params = std::move(next);
    ++result.iterations;
    const double ll = mixture_log_likelihood(table, params);
    const double gain = ll - result.log_likelihood.back();
    result.log_likelihood.push_back(ll);
    if (std::abs(gain) < options.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace prl
