#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "prl/blocking.hpp"
#include "prl/comparison.hpp"
#include "prl/csv.hpp"
#include "prl/error.hpp"
#include "prl/estimators.hpp"
#include "prl/matching.hpp"
#include "prl/mcmc.hpp"
#include "prl/mixture.hpp"
#include "prl/names.hpp"
#include "prl/parallel.hpp"
#include "prl/records.hpp"
#include "prl/rng.hpp"

namespace prl {

enum class SynthFieldKind { given_name, family_name, categorical };

struct SynthField {
  std::string name;
  SynthFieldKind kind = SynthFieldKind::categorical;
  int categories = 2;  // categorical only
  // Value of rank r (1-based) drawn with weight 1/(r + rank_offset)^zipf_exponent;
  // exponent 0 is uniform.
  double zipf_exponent = 0;
  double rank_offset = 0;

  bool is_string() const { return kind != SynthFieldKind::categorical; }
};

inline std::vector<SynthField> default_synth_fields() {
  return {{"given_name", SynthFieldKind::given_name, 0, 1.0, 30.0},
          {"family_name", SynthFieldKind::family_name, 0, 1.0, 60.0},
          {"age", SynthFieldKind::categorical, 80, 0.0, 0.0},
          {"occupation", SynthFieldKind::categorical, 25, 0.5, 0.0}};
}

struct SynthConfig {
  std::size_t n_a = 500;
  std::size_t n_b = 500;
  // Share of A records with a corrupted copy in B.
  double overlap = 0.5;
  // Fields corrupted in every copied record.
  int errors_per_record = 1;
  std::vector<SynthField> fields = default_synth_fields();
  std::uint64_t seed = 1;
  // A corrupted string gets 1..max_string_edits single-character edits,
  // the count drawn uniformly.
  int max_string_edits = 2;

  std::size_t true_matches() const { return static_cast<std::size_t>(std::llround(overlap * static_cast<double>(n_a))); }

  void validate() const {
    if (fields.empty()) throw ValidationError("synth: no fields");
    if (!(overlap >= 0.0 && overlap <= 1.0)) throw ValidationError("synth: overlap must lie in [0,1]");
    const double exact = overlap * static_cast<double>(n_a);
    if (std::abs(exact - std::round(exact)) > 1e-9) throw ValidationError("synth: overlap * n_a must be an integer");
    if (true_matches() > n_b) throw ValidationError("synth: more true matches than B records");
    if (max_string_edits < 1) throw ValidationError("synth: max_string_edits must be >= 1");
    if (errors_per_record < 0 || errors_per_record > static_cast<int>(fields.size()))
      throw ValidationError("synth: errors_per_record must be between 0 and the field count");
    for (const auto& f : fields) {
      if (f.kind == SynthFieldKind::categorical && f.categories < 2)
        throw ValidationError("synth: categorical field '" + f.name + "' needs >= 2 categories");
      if (!(f.zipf_exponent >= 0.0) || !(f.rank_offset >= 0.0))
        throw ValidationError("synth: field '" + f.name + "' needs nonnegative zipf_exponent and rank_offset");
    }
  }
};

struct CorruptionEntry {
  std::uint32_t b_index = 0;
  std::uint32_t source_a = 0;
  std::vector<int> fields;
};

struct GroundTruth {
  Matching links;
  std::vector<CorruptionEntry> corruption;
};

struct SynthDataset {
  RecordFile a;
  RecordFile b;
  GroundTruth truth;
};

namespace detail {

inline std::vector<double> zipf_weights(std::size_t n, double s, double offset) {
  std::vector<double> w(n);
  for (std::size_t r = 0; r < n; ++r) w[r] = 1.0 / std::pow(static_cast<double>(r + 1) + offset, s);
  return w;
}

class FieldSampler {
 public:
  explicit FieldSampler(const SynthField& f) : field_(f) {
    switch (f.kind) {
      case SynthFieldKind::given_name:
        dist_ = make(zipf_weights(names::given.size(), f.zipf_exponent, f.rank_offset));
        break;
      case SynthFieldKind::family_name:
        dist_ = make(zipf_weights(names::family.size(), f.zipf_exponent, f.rank_offset));
        break;
      case SynthFieldKind::categorical:
        dist_ = make(zipf_weights(static_cast<std::size_t>(f.categories), f.zipf_exponent, f.rank_offset));
        break;
    }
  }

  template <class Rng>
  std::string draw(Rng& rng) {
    const auto i = dist_(rng);
    switch (field_.kind) {
      case SynthFieldKind::given_name: return std::string(names::given[i]);
      case SynthFieldKind::family_name: return std::string(names::family[i]);
      default: return std::to_string(i + 1);
    }
  }

  // A value different from `value`: 1..max_edits single-character edits
  // (substitution, insertion or deletion, chosen uniformly) for names, a
  // different uniformly drawn category otherwise.
  template <class Rng>
  std::string corrupt(const std::string& value, Rng& rng, int max_edits) const {
    if (field_.kind == SynthFieldKind::categorical) {
      const int current = std::stoi(value);
      int next = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(field_.categories - 1))) + 1;
      if (next >= current) ++next;
      return std::to_string(next);
    }
    const auto edits = 1 + uniform_index(rng, static_cast<std::size_t>(max_edits));
    std::string s;
    do {
      s = value;
      for (std::size_t k = 0; k < edits; ++k) edit(s, rng);
    } while (s == value);
    return s;
  }

 private:
  template <class Rng>
  static void edit(std::string& s, Rng& rng) {
    auto letter = [&] { return static_cast<char>('a' + uniform_index(rng, 26)); };
    int op = static_cast<int>(uniform_index(rng, 3));
    if (op != 1 && s.empty()) op = 1;
    if (op == 2 && s.size() == 1) op = 0;
    if (op == 0) {  // substitution
      const auto pos = uniform_index(rng, s.size());
      char c = letter();
      while (c == s[pos]) c = letter();
      s[pos] = c;
    } else if (op == 1) {  // insertion
      s.insert(s.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, s.size() + 1)), letter());
    } else {  // deletion
      s.erase(s.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, s.size())));
    }
  }

  static std::discrete_distribution<std::size_t> make(const std::vector<double>& w) {
    return std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }

  SynthField field_;
  std::discrete_distribution<std::size_t> dist_;
};

}  // namespace detail

// File A holds n_a fresh records. File B holds a corrupted copy of
// overlap * n_a randomly chosen A records (exactly errors_per_record fields
// changed in each) plus fresh records, in random order.
inline SynthDataset generate(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(derive_seed(config.seed, "synth"));
  std::vector<detail::FieldSampler> samplers;
  std::vector<std::string> header;
  for (const auto& f : config.fields) {
    samplers.emplace_back(f);
    header.push_back(f.name);
  }
  auto fresh = [&] {
    std::vector<std::string> row;
    for (auto& s : samplers) row.push_back(s.draw(rng));
    return row;
  };

  std::vector<std::vector<std::string>> rows_a;
  for (std::size_t i = 0; i < config.n_a; ++i) rows_a.push_back(fresh());

  std::vector<std::uint32_t> sources(config.n_a);
  std::iota(sources.begin(), sources.end(), 0u);
  std::shuffle(sources.begin(), sources.end(), rng);
  sources.resize(config.true_matches());

  struct Pending {
    std::vector<std::string> row;
    std::optional<std::uint32_t> source;
    std::vector<int> corrupted;
  };
  std::vector<Pending> pending;
  std::vector<int> field_ids(config.fields.size());
  std::iota(field_ids.begin(), field_ids.end(), 0);
  for (auto a : sources) {
    Pending p{rows_a[a], a, {}};
    std::shuffle(field_ids.begin(), field_ids.end(), rng);
    p.corrupted.assign(field_ids.begin(), field_ids.begin() + config.errors_per_record);
    std::sort(p.corrupted.begin(), p.corrupted.end());
    for (int j : p.corrupted) {
      auto& cell = p.row[static_cast<std::size_t>(j)];
      cell = samplers[static_cast<std::size_t>(j)].corrupt(cell, rng, config.max_string_edits);
    }
    pending.push_back(std::move(p));
  }
  while (pending.size() < config.n_b) pending.push_back({fresh(), std::nullopt, {}});
  std::shuffle(pending.begin(), pending.end(), rng);

  SynthDataset ds;
  std::vector<std::vector<std::string>> rows_b;
  std::vector<Link> links;
  for (std::uint32_t b = 0; b < pending.size(); ++b) {
    rows_b.push_back(pending[b].row);
    if (pending[b].source) {
      links.push_back({*pending[b].source, b});
      ds.truth.corruption.push_back({b, *pending[b].source, pending[b].corrupted});
    }
  }
  ds.a = make_record_file(FileId::A, header, std::move(rows_a));
  ds.b = make_record_file(FileId::B, header, std::move(rows_b));
  ds.truth.links = Matching(config.n_a, config.n_b, std::move(links));
  return ds;
}

// Concatenates independent datasets, tagging every record with its source
// dataset in a new "block" column that serves as a traditional blocking key.
inline SynthDataset stack_datasets(const std::vector<SynthDataset>& parts) {
  if (parts.empty()) throw ValidationError("stack_datasets: nothing to stack");
  std::vector<std::string> header = parts.front().a.header;
  header.push_back("block");
  std::vector<std::vector<std::string>> rows_a, rows_b;
  std::vector<Link> links;
  SynthDataset out;
  std::uint32_t off_a = 0, off_b = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& p = parts[k];
    if (p.a.header != parts.front().a.header) throw ValidationError("stack_datasets: headers differ");
    auto copy = [&](const RecordFile& f, std::vector<std::vector<std::string>>& rows) {
      for (const auto& r : f.records) {
        std::vector<std::string> row;
        for (const auto& v : r.fields) row.push_back(v.value_or(""));
        row.push_back(std::to_string(k));
        rows.push_back(std::move(row));
      }
    };
    copy(p.a, rows_a);
    copy(p.b, rows_b);
    for (const auto& l : p.truth.links) links.push_back({l.a + off_a, l.b + off_b});
    for (auto c : p.truth.corruption) {
      c.b_index += off_b;
      c.source_a += off_a;
      out.truth.corruption.push_back(std::move(c));
    }
    off_a += static_cast<std::uint32_t>(p.a.size());
    off_b += static_cast<std::uint32_t>(p.b.size());
  }
  LoadOptions opts;
  opts.blocking_column = "block";
  out.a = make_record_file(FileId::A, header, std::move(rows_a), opts);
  out.b = make_record_file(FileId::B, header, std::move(rows_b), opts);
  out.truth.links = Matching(off_a, off_b, std::move(links));
  return out;
}

// Discretized Levenshtein (four levels) for names, exact agreement otherwise.
inline ComparisonSchema synth_schema(const std::vector<SynthField>& fields) {
  std::vector<FieldComparator> cmp;
  for (std::size_t j = 0; j < fields.size(); ++j) {
    FieldComparator f;
    f.column = fields[j].name;
    f.column_index = j;
    if (fields[j].is_string()) {
      f.kind = ComparatorKind::levenshtein;
      f.cut_points = ComparisonSchema::four_level_cuts();
    }
    cmp.push_back(std::move(f));
  }
  return ComparisonSchema(std::move(cmp));
}

// m ~ Dir(1, 2, 5, 10) for four-level name comparisons and Dir(1, 2) for
// exact comparisons; u ~ Dir(1, ..., 1).
inline DirichletPrior synth_prior(const ComparisonSchema& schema) {
  std::vector<std::vector<double>> am, au;
  for (const auto& f : schema.fields()) {
    const auto k = static_cast<std::size_t>(f.levels());
    std::vector<double> m(k, 1.0);
    if (f.kind == ComparatorKind::levenshtein && f.agreement_levels() == 4)
      m = {1.0, 2.0, 5.0, 10.0};
    else
      m[static_cast<std::size_t>(f.agreement_levels() - 1)] = 2.0;
    m.resize(k, 1.0);
    am.push_back(std::move(m));
    au.emplace_back(k, 1.0);
  }
  return DirichletPrior::from_alpha(std::move(am), std::move(au));
}

struct ScoreReport {
  std::optional<double> precision;
  std::optional<double> recall;
  std::size_t estimated_links = 0;
  std::size_t true_links = 0;
  std::size_t correct_links = 0;
};

inline ScoreReport score(const Matching& estimate, const Matching& truth) {
  for (const auto& l : estimate)
    if (l.a >= truth.n_a() || l.b >= truth.n_b()) throw ValidationError("estimate link out of range");
  ScoreReport r;
  r.estimated_links = estimate.size();
  r.true_links = truth.size();
  r.correct_links = intersection_size(estimate, truth);
  if (r.estimated_links) r.precision = static_cast<double>(r.correct_links) / static_cast<double>(r.estimated_links);
  if (r.true_links) r.recall = static_cast<double>(r.correct_links) / static_cast<double>(r.true_links);
  return r;
}

// Penalty used for an overlap share when none is configured: 0 for full
// overlap, 5 around one half, 7 for low overlap.
inline double default_theta_for_overlap(double overlap) {
  if (overlap >= 0.75) return 0.0;
  if (overlap >= 0.3) return 5.0;
  return 7.0;
}

struct Scenario {
  double overlap = 0.5;
  int errors_per_record = 1;
};

struct ExperimentConfig {
  std::vector<Scenario> grid;
  int replicates = 1;
  std::uint64_t seed = 1;
  std::size_t n = 500;
  std::vector<SynthField> fields = default_synth_fields();
  int max_string_edits = 2;
  std::optional<double> theta;  // unset: default_theta_for_overlap
  double mu = 0.0;
  EmOptions em;
  PenalizedOptions penalized;
  bool run_mcmc = true;
  double w0 = 0.0;
  McmcOptions mcmc;
  int workers = 1;
};

struct ExperimentRow {
  double overlap = 0.0;
  int errors_per_record = 0;
  int replicate = 0;
  std::string estimator;
  ScoreReport score;
  double wall_time_ms = 0.0;
  std::string error;
  // Bayes rows: largest per-record posterior frequency sum and sample count.
  std::optional<double> max_frequency_sum;
  std::int64_t retained_samples = 0;
};

inline std::vector<std::string> experiment_estimators(const ExperimentConfig& c) {
  std::vector<std::string> e{"em_lsap", "penalized"};
  if (c.run_mcmc) e.push_back("bayes");
  return e;
}

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

inline std::vector<ExperimentRow> run_replicate(const ExperimentConfig& cfg, const Scenario& sc, int replicate,
                                                std::uint64_t seed) {
  using clock = std::chrono::steady_clock;
  std::vector<ExperimentRow> rows;
  auto row = [&](const std::string& name) {
    ExperimentRow r;
    r.overlap = sc.overlap;
    r.errors_per_record = sc.errors_per_record;
    r.replicate = replicate;
    r.estimator = name;
    return r;
  };
  try {
    SynthConfig sc_cfg{cfg.n, cfg.n, sc.overlap, sc.errors_per_record, cfg.fields, seed, cfg.max_string_edits};
    const auto ds = generate(sc_cfg);
    const auto schema = synth_schema(cfg.fields);
    auto t0 = clock::now();
    const auto pairs = build_candidate_pairs(ds.a, ds.b);
    const auto table = aggregate_patterns(pairs, compare_pairs(pairs, ds.a, ds.b, schema), schema);
    const double compare_ms = elapsed_ms(t0);
    const auto init = MixtureParams::default_init(schema.level_counts(), schema.agreement_level_counts());
    const auto prior = synth_prior(schema);
    const double theta = cfg.theta.value_or(default_theta_for_overlap(sc.overlap));

    t0 = clock::now();
    auto em = em_lsap_estimate(table, pairs, init, cfg.mu, cfg.em);
    auto r_em = row("em_lsap");
    r_em.score = score(em.matching, ds.truth.links);
    r_em.wall_time_ms = compare_ms + elapsed_ms(t0);
    rows.push_back(std::move(r_em));

    t0 = clock::now();
    auto pen = penalized_fit_multistart(table, pairs, prior, theta,
                                        default_penalized_starts(table, schema.agreement_level_counts(), 0.1, cfg.em),
                                        cfg.penalized);
    auto r_pen = row("penalized");
    r_pen.score = score(pen.matching, ds.truth.links);
    r_pen.wall_time_ms = compare_ms + elapsed_ms(t0);
    const double pen_ms = r_pen.wall_time_ms;
    rows.push_back(std::move(r_pen));

    if (cfg.run_mcmc) {
      t0 = clock::now();
      const auto weights = pair_weights(table, weight_table(table, pen.params));
      const auto blocks = connected_components(build_block_graph(pairs, weights, cfg.w0));
      auto opts = cfg.mcmc;
      opts.seed = derive_seed(seed, "mcmc");
      opts.workers = 1;
      const auto summary = run_chain(blocks, table, LinkagePrior{theta, prior}, pen.params, &pen.matching, opts);
      auto r_b = row("bayes");
      r_b.score = score(bayes_estimate(summary), ds.truth.links);
      r_b.wall_time_ms = pen_ms + elapsed_ms(t0);
      r_b.max_frequency_sum = max_record_frequency_sum(summary);
      r_b.retained_samples = summary.retained;
      rows.push_back(std::move(r_b));
    }
  } catch (const std::exception& e) {
    const auto names = experiment_estimators(cfg);
    for (std::size_t i = rows.size(); i < names.size(); ++i) {
      auto r = row(names[i]);
      r.error = e.what();
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

}  // namespace detail

// For every (scenario, replicate): generate data, compare all pairs, fit
// EM+LSAP and the penalized likelihood, and optionally block and sample for
// the Bayes estimate. Rows come back in scenario, replicate, estimator order.
inline std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg) {
  if (cfg.grid.empty()) throw ValidationError("experiment grid is empty");
  if (cfg.replicates < 1) throw ValidationError("replicates must be >= 1");
  if (cfg.run_mcmc) cfg.mcmc.validate();
  const std::size_t jobs = cfg.grid.size() * static_cast<std::size_t>(cfg.replicates);
  std::vector<std::vector<ExperimentRow>> out(jobs);
  parallel_for(jobs, cfg.workers, [&](std::size_t k) {
    const std::size_t s = k / static_cast<std::size_t>(cfg.replicates);
    const int rep = static_cast<int>(k % static_cast<std::size_t>(cfg.replicates));
    out[k] = detail::run_replicate(cfg, cfg.grid[s], rep, derive_seed(cfg.seed, s, static_cast<std::uint64_t>(rep)));
  });
  std::vector<ExperimentRow> rows;
  for (auto& v : out)
    for (auto& r : v) rows.push_back(std::move(r));
  return rows;
}

// Columns overlap,errors_per_record,replicate,estimator,precision,recall,
// estimated_links,true_links,wall_time_ms,error. Absent ratios are blank.
inline void write_experiment(std::ostream& out, const std::vector<ExperimentRow>& rows, bool include_timing = true) {
  csv::Writer w(out);
  w.cell("overlap").cell("errors_per_record").cell("replicate").cell("estimator").cell("precision").cell("recall");
  w.cell("estimated_links").cell("true_links");
  if (include_timing) w.cell("wall_time_ms");
  w.cell("error");
  w.end_row();
  for (const auto& r : rows) {
    w.cell(r.overlap).cell(r.errors_per_record).cell(r.replicate).cell(r.estimator);
    if (r.score.precision)
      w.cell(*r.score.precision);
    else
      w.empty();
    if (r.score.recall)
      w.cell(*r.score.recall);
    else
      w.empty();
    w.cell(r.score.estimated_links).cell(r.score.true_links);
    if (include_timing) w.cell(r.wall_time_ms);
    w.cell(r.error);
    w.end_row();
  }
}

}  // namespace prl
