#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "prl/blocking.hpp"
#include "prl/comparison.hpp"
#include "prl/config.hpp"
#include "prl/csv.hpp"
#include "prl/error.hpp"
#include "prl/estimators.hpp"
#include "prl/matching.hpp"
#include "prl/mcmc.hpp"
#include "prl/mixture.hpp"
#include "prl/records.hpp"
#include "prl/synth.hpp"

// Batch commands behind the `prl` executable. Each reads its inputs from the
// config and from artifacts earlier commands left in the output directory.
namespace prl::cli {

namespace fs = std::filesystem;

enum class ExitCode : int { ok = 0, validation = 1, runtime = 2 };

struct Artifacts {
  fs::path dir;
  fs::path path(const std::string& name) const { return dir / name; }
  bool has(const std::string& name) const { return fs::exists(path(name)); }
};

namespace detail {

inline std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

inline void write_json(const fs::path& p, const Json& j) {
  auto out = open_out(p);
  out << j.dump(2) << '\n';
}

inline Json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ValidationError("missing upstream artifact " + p.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("malformed artifact " + p.string() + ": " + e.what());
  }
}

inline void require(const Artifacts& art, const std::string& name, const char* producer) {
  if (!art.has(name))
    throw ValidationError("missing upstream artifact " + art.path(name).string() + " (run `prl " + producer + "` first)");
}

inline LoadOptions load_options(const PipelineConfig& c) {
  LoadOptions o;
  o.delimiter = c.input.delimiter;
  o.id_column = c.input.id_column;
  o.blocking_column = c.input.blocking_column;
  return o;
}

inline std::vector<double> link_weights(const CandidatePairSet& pairs, const Matching& m, std::span<const double> pair_weight) {
  std::vector<double> w;
  for (const auto& l : m) {
    auto p = pairs.find(l.a, l.b);
    w.push_back(p ? pair_weight[*p] : std::numeric_limits<double>::quiet_NaN());
  }
  return w;
}

}  // namespace detail

// Candidate pairs and pattern table reloaded from compare artifacts.
struct ComparedData {
  CandidatePairSet pairs;
  PatternTable table;
};

inline ComparedData load_compared(const Artifacts& art, const ComparisonSchema& schema) {
  detail::require(art, "compare.json", "compare");
  detail::require(art, "pairs.csv", "compare");
  detail::require(art, "patterns.csv", "compare");
  const auto meta = detail::read_json(art.path("compare.json"));
  ComparedData d;
  std::vector<PairGroup> groups;
  try {
    for (const auto& g : meta.at("groups"))
      groups.push_back({g.at("key").get<std::string>(), g.at("a_members").get<std::vector<std::uint32_t>>(),
                        g.at("b_members").get<std::vector<std::uint32_t>>(), 0});
    d.pairs = CandidatePairSet(meta.at("n_a").get<std::size_t>(), meta.at("n_b").get<std::size_t>(), std::move(groups));
    d.table.level_counts = meta.at("level_counts").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed compare.json: ") + e.what());
  }
  if (d.table.level_counts != schema.level_counts())
    throw ValidationError("compare artifacts were produced with a different schema; rerun `prl compare`");

  const auto patterns = csv::read_table(art.path("patterns.csv").string());
  const std::size_t dim = d.table.fields();
  if (patterns.header.size() != dim + 1) throw ValidationError("patterns.csv does not match the schema");
  for (const auto& r : patterns.rows) {
    ComparisonPattern p;
    for (std::size_t j = 0; j < dim; ++j) p.levels.push_back(csv::parse_number<std::uint8_t>(r[j]));
    d.table.patterns.push_back(std::move(p));
    d.table.counts.push_back(0);
  }

  const auto pairs = csv::read_table(art.path("pairs.csv").string());
  const auto ca = pairs.column("a_index"), cb = pairs.column("b_index"), cp = pairs.column("pattern_id");
  if (!ca || !cb || !cp) throw ValidationError("pairs.csv lacks a_index/b_index/pattern_id");
  if (pairs.rows.size() != d.pairs.size()) throw ValidationError("pairs.csv disagrees with compare.json");
  for (std::size_t i = 0; i < pairs.rows.size(); ++i) {
    const auto& r = pairs.rows[i];
    const auto a = csv::parse_number<std::uint32_t>(r[*ca]);
    const auto b = csv::parse_number<std::uint32_t>(r[*cb]);
    const auto g = csv::parse_number<std::uint32_t>(r[*cp]);
    if (d.pairs[i].a != a || d.pairs[i].b != b) throw ValidationError("pairs.csv disagrees with compare.json");
    if (g >= d.table.size()) throw ValidationError("pairs.csv references an unknown pattern");
    d.table.pair_pattern.push_back(g);
    ++d.table.counts[g];
  }
  d.table.total_pairs = static_cast<std::int64_t>(d.pairs.size());
  return d;
}

inline MixtureParams load_params(const Artifacts& art) {
  detail::require(art, "params.json", "fit");
  return params_from_json(detail::read_json(art.path("params.json")));
}

// compare: patterns.csv, pairs.csv, compare.json, config.json.
inline void cmd_compare(const PipelineConfig& c, std::ostream& log = std::cerr) {
  c.validate();
  c.require_inputs();
  auto schema = c.schema();
  const Artifacts art{c.out};
  fs::create_directories(art.dir);
  const auto opts = detail::load_options(c);
  const auto fa = load_records(c.input.file_a, FileId::A, opts);
  const auto fb = load_records(c.input.file_b, FileId::B, opts);
  if (fa.header != fb.header) throw ValidationError("files A and B must share the same header");
  schema.bind(fa.header);
  if (fa.size() == 0 || fb.size() == 0) log << "warning: file " << (fa.size() == 0 ? "A" : "B") << " has no records\n";

  const auto pairs = build_candidate_pairs(fa, fb, c.input.blocking_column);
  const auto per_pair = compare_pairs(pairs, fa, fb, schema, c.workers);
  const auto table = aggregate_patterns(pairs, per_pair, schema);

  {
    auto out = detail::open_out(art.path("patterns.csv"));
    write_pattern_table(out, table);
  }
  {
    auto out = detail::open_out(art.path("pairs.csv"));
    csv::Writer w(out);
    w.row("group", "a_index", "b_index", "pattern_id");
    for (std::size_t k = 0; k < pairs.groups().size(); ++k) {
      const auto& g = pairs.groups()[k];
      for (std::size_t i = g.offset; i < g.offset + g.pair_count(); ++i)
        w.row(k, pairs[i].a, pairs[i].b, table.pair_pattern[i]);
    }
  }
  Json groups = Json::array();
  for (const auto& g : pairs.groups())
    groups.push_back({{"key", g.key}, {"a_members", g.a_members}, {"b_members", g.b_members}});
  detail::write_json(art.path("compare.json"), {{"n_a", fa.size()},
                                                {"n_b", fb.size()},
                                                {"level_counts", table.level_counts},
                                                {"pair_count", pairs.size()},
                                                {"pattern_count", table.size()},
                                                {"groups", groups}});
  detail::write_json(art.path("config.json"), to_json(c));
  log << "compared " << pairs.size() << " pairs into " << table.size() << " patterns\n";
}

enum class FitMethod { fs, em_lsap, penlik, theta_sweep };

inline FitMethod parse_method(const std::string& s) {
  if (s == "fs") return FitMethod::fs;
  if (s == "em_lsap") return FitMethod::em_lsap;
  if (s == "penlik") return FitMethod::penlik;
  if (s == "theta_sweep") return FitMethod::theta_sweep;
  throw ValidationError("unknown fit method '" + s + "' (fs, em_lsap, penlik, theta_sweep)");
}

// fit: params.json, weights.csv, fit.json and, by method, matching.csv,
// fs_decisions.csv or theta_sweep.csv.
inline void cmd_fit(const PipelineConfig& c, FitMethod method, std::ostream& log = std::cerr) {
  c.validate();
  if (c.fields.empty()) throw ValidationError("schema.fields is empty");
  const auto schema = c.schema();
  const Artifacts art{c.out};
  const auto data = load_compared(art, schema);
  const bool penalized = method == FitMethod::penlik || method == FitMethod::theta_sweep;
  const auto starts = penalized ? c.penalized_starts(schema, data.table)
                                 : std::vector<MixtureParams>{c.initial_params(schema, data.table, false)};
  const auto& init = starts.front();
  const auto& pairs = data.pairs;
  const auto& table = data.table;

  auto write_params = [&](const MixtureParams& p) {
    detail::write_json(art.path("params.json"), to_json(p));
    auto out = detail::open_out(art.path("weights.csv"));
    write_weight_table(out, table, weight_table(table, p));
  };
  auto write_links = [&](const std::string& name, const Matching& m, const MixtureParams& p) {
    const auto w = pair_weights(table, weight_table(table, p));
    auto out = detail::open_out(art.path(name));
    const auto lw = detail::link_weights(pairs, m, w);
    write_matching(out, m, lw);
  };

  Json meta;
  switch (method) {
    case FitMethod::fs: {
      const auto em = em_fit(table, init, c.estimator.em);
      const auto w = pair_weights(table, weight_table(table, em.params));
      const auto dec = fs_decide(w, c.estimator.lambda, c.estimator.mu);
      write_params(em.params);
      auto out = detail::open_out(art.path("fs_decisions.csv"));
      csv::Writer wr(out);
      wr.row("a_index", "b_index", "weight", "decision");
      for (std::size_t i = 0; i < pairs.size(); ++i) wr.row(pairs[i].a, pairs[i].b, w[i], to_string(dec.decisions[i]));
      meta = {{"method", "fs"},
              {"lambda", c.estimator.lambda},
              {"mu", c.estimator.mu},
              {"links", dec.count(Decision::link)},
              {"indeterminate", dec.count(Decision::indeterminate)},
              {"non_links", dec.count(Decision::non_link)},
              {"em_iterations", em.iterations},
              {"em_converged", em.converged},
              {"log_likelihood", em.log_likelihood}};
      log << "fs: " << dec.count(Decision::link) << " links, " << dec.count(Decision::indeterminate)
          << " indeterminate\n";
      break;
    }
    case FitMethod::em_lsap: {
      const auto r = em_lsap_estimate(table, pairs, init, c.estimator.mu, c.estimator.em, c.workers);
      write_params(r.em.params);
      write_links("matching.csv", r.matching, r.em.params);
      meta = {{"method", "em_lsap"},
              {"mu", c.estimator.mu},
              {"links", r.matching.size()},
              {"em_iterations", r.em.iterations},
              {"em_converged", r.em.converged},
              {"log_likelihood", r.em.log_likelihood}};
      log << "em_lsap: " << r.matching.size() << " links\n";
      break;
    }
    case FitMethod::penlik: {
      const auto prior = c.prior(schema.level_counts());
      const auto r = penalized_fit_multistart(table, pairs, prior, c.estimator.theta, starts, c.penalized_options());
      write_params(r.params);
      write_links("matching.csv", r.matching, r.params);
      meta = {{"method", "penlik"},
              {"theta", r.theta},
              {"links", r.matching.size()},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"objective", r.objective}};
      log << "penlik: " << r.matching.size() << " links after " << r.iterations << " iterations\n";
      break;
    }
    case FitMethod::theta_sweep: {
      const auto prior = c.prior(schema.level_counts());
      const auto sweep = theta_sweep(table, pairs, prior, c.estimator.theta_grid, init, c.penalized_options());
      auto out = detail::open_out(art.path("theta_sweep.csv"));
      csv::Writer wr(out);
      wr.row("theta", "links", "iterations");
      Json pts = Json::array();
      for (const auto& p : sweep) {
        wr.row(p.theta, p.link_count, p.iterations);
        pts.push_back({{"theta", p.theta}, {"links", p.link_count}, {"params", to_json(p.params)}});
      }
      meta = {{"method", "theta_sweep"}, {"points", pts}};
      log << "theta_sweep: " << sweep.size() << " grid points\n";
      break;
    }
  }
  detail::write_json(art.path("fit.json"), meta);
}

inline std::optional<Matching> load_truth(const PipelineConfig& c, std::size_t n_a, std::size_t n_b) {
  if (!c.input.truth) return std::nullopt;
  return read_matching(*c.input.truth, n_a, n_b);
}

// block: blocks.csv, block_edges.csv, block_curve.csv, block.json.
inline PostHocBlocks cmd_block(const PipelineConfig& c, std::ostream& log = std::cerr) {
  c.validate();
  if (c.fields.empty()) throw ValidationError("schema.fields is empty");
  const auto schema = c.schema();
  const Artifacts art{c.out};
  const auto data = load_compared(art, schema);
  const auto params = load_params(art);
  if (params.level_counts() != data.table.level_counts) throw ValidationError("params.json does not match the schema");
  const auto w = pair_weights(data.table, weight_table(data.table, params));
  const auto truth = load_truth(c, data.pairs.n_a(), data.pairs.n_b());
  const Matching* tp = truth ? &*truth : nullptr;

  double w0 = c.blocking.w0;
  bool feasible = true;
  std::vector<BlockingDiagnostics> curve;
  if (c.blocking.max_block_pairs) {
    auto sel = select_w0(data.pairs, w, *c.blocking.max_block_pairs, c.blocking.w0_grid, tp);
    w0 = sel.w0;
    feasible = sel.feasible;
    curve = std::move(sel.curve);
    if (!feasible) log << "warning: no w0 in the grid meets the block budget; using " << w0 << "\n";
  } else {
    auto grid = c.blocking.w0_grid;
    grid.push_back(w0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (double g : grid)
      curve.push_back(diagnostics(connected_components(build_block_graph(data.pairs, w, g)), data.pairs.size(), tp));
  }
  auto blocks = connected_components(build_block_graph(data.pairs, w, w0));
  const auto d = diagnostics(blocks, data.pairs.size(), tp);
  {
    auto out = detail::open_out(art.path("blocks.csv"));
    write_blocks(out, blocks);
  }
  {
    auto out = detail::open_out(art.path("block_edges.csv"));
    write_block_edges(out, blocks);
  }
  {
    auto out = detail::open_out(art.path("block_curve.csv"));
    write_blocking_curve(out, curve);
  }
  Json meta = {{"w0", w0},
               {"feasible", feasible},
               {"n_blocks", d.n_blocks},
               {"candidate_pairs", d.candidate_pairs},
               {"retained_pairs", d.retained_pairs},
               {"reduction_ratio", d.reduction_ratio},
               {"max_block_pairs", d.block_pairs.max},
               {"median_block_pairs", d.block_pairs.median},
               {"q90_block_pairs", d.block_pairs.q90},
               {"unblocked_a", blocks.unblocked_a.size()},
               {"unblocked_b", blocks.unblocked_b.size()}};
  if (d.pairs_completeness) meta["pairs_completeness"] = *d.pairs_completeness;
  detail::write_json(art.path("block.json"), meta);
  log << "block: w0=" << w0 << ", " << d.n_blocks << " blocks, " << d.retained_pairs << " of " << d.candidate_pairs
      << " pairs retained\n";
  return blocks;
}

// mcmc: posterior.csv, ltrace.csv, bayes_matching.csv, mcmc.json. Starts from
// params.json and, when present, matching.csv; blocks at block.json's w0 if
// `prl block` ran, else at blocking.w0.
inline PosteriorSummary cmd_mcmc(const PipelineConfig& c, std::ostream& log = std::cerr) {
  c.validate();
  if (c.fields.empty()) throw ValidationError("schema.fields is empty");
  const auto schema = c.schema();
  const Artifacts art{c.out};
  const auto data = load_compared(art, schema);
  const auto params = load_params(art);
  if (params.level_counts() != data.table.level_counts) throw ValidationError("params.json does not match the schema");
  double w0 = c.blocking.w0;
  if (art.has("block.json")) w0 = detail::read_json(art.path("block.json")).at("w0").get<double>();
  const auto w = pair_weights(data.table, weight_table(data.table, params));
  const auto blocks = connected_components(build_block_graph(data.pairs, w, w0));
  std::optional<Matching> init;
  if (art.has("matching.csv")) init = read_matching(art.path("matching.csv").string(), data.pairs.n_a(), data.pairs.n_b());
  const auto prior = c.prior(schema.level_counts());
  const auto summary = run_chain(blocks, data.table, LinkagePrior{c.estimator.theta, prior}, params,
                                 init ? &*init : nullptr, c.mcmc_options());
  const auto bayes = bayes_estimate(summary);
  {
    auto out = detail::open_out(art.path("posterior.csv"));
    write_posterior(out, summary);
  }
  {
    auto out = detail::open_out(art.path("ltrace.csv"));
    write_link_trace(out, summary);
  }
  {
    auto out = detail::open_out(art.path("bayes_matching.csv"));
    write_matching(out, bayes, detail::link_weights(data.pairs, bayes, w));
  }
  Json moves;
  for (auto t : {MoveType::add, MoveType::drop, MoveType::swap}) {
    const auto k = static_cast<std::size_t>(t);
    const char* name = t == MoveType::add ? "add" : t == MoveType::drop ? "drop" : "swap";
    moves[name] = {{"proposed", summary.moves.proposed[k]}, {"accepted", summary.moves.accepted[k]}};
  }
  detail::write_json(art.path("mcmc.json"), {{"seed", summary.seed},
                                             {"iterations", summary.iterations},
                                             {"burn_in", summary.burn_in},
                                             {"retained", summary.retained},
                                             {"theta", summary.theta},
                                             {"w0", summary.w0},
                                             {"blocks", blocks.blocks.size()},
                                             {"gibbs_blocks", summary.gibbs_blocks},
                                             {"mh_blocks", summary.mh_blocks},
                                             {"bayes_links", bayes.size()},
                                             {"max_record_frequency_sum", max_record_frequency_sum(summary)},
                                             {"moves", moves},
                                             {"final_params", to_json(summary.final_params)}});
  log << "mcmc: " << summary.retained << " retained sweeps over " << blocks.blocks.size() << " blocks, "
      << bayes.size() << " Bayes-estimate links\n";
  return summary;
}

// eval: with an eval.grid, the synthetic experiment (results.csv); otherwise
// scores matching.csv and bayes_matching.csv against input.truth (score.csv).
inline void cmd_eval(const PipelineConfig& c, std::ostream& log = std::cerr) {
  c.validate();
  const Artifacts art{c.out};
  fs::create_directories(art.dir);
  if (!c.eval.grid.empty()) {
    const auto rows = run_experiment(c.experiment());
    auto out = detail::open_out(art.path("results.csv"));
    write_experiment(out, rows);
    std::size_t failed = 0;
    for (const auto& r : rows)
      if (!r.error.empty()) ++failed;
    if (failed) log << "warning: " << failed << " estimator runs failed; see the error column\n";
    log << "eval: " << rows.size() << " result rows\n";
    return;
  }
  if (!c.input.truth) throw ValidationError("eval needs either eval.grid or input.truth");
  const auto meta = detail::read_json(art.path("compare.json"));
  const auto n_a = meta.at("n_a").get<std::size_t>(), n_b = meta.at("n_b").get<std::size_t>();
  const auto truth = read_matching(*c.input.truth, n_a, n_b);
  auto out = detail::open_out(art.path("score.csv"));
  csv::Writer w(out);
  w.row("estimate", "precision", "recall", "estimated_links", "true_links", "correct_links");
  std::size_t scored = 0;
  for (const char* name : {"matching.csv", "bayes_matching.csv"}) {
    if (!art.has(name)) continue;
    const auto r = score(read_matching(art.path(name).string(), n_a, n_b), truth);
    w.cell(name);
    if (r.precision)
      w.cell(*r.precision);
    else
      w.empty();
    if (r.recall)
      w.cell(*r.recall);
    else
      w.empty();
    w.row(r.estimated_links, r.true_links, r.correct_links);
    ++scored;
  }
  if (!scored) throw ValidationError("no matching.csv or bayes_matching.csv to score (run `prl fit` or `prl mcmc`)");
  log << "eval: scored " << scored << " estimates\n";
}

// synth: A.csv, B.csv, truth.csv, corruption.csv.
inline SynthDataset cmd_synth(const PipelineConfig& c, std::ostream& log = std::cerr) {
  c.validate();
  const Artifacts art{c.out};
  fs::create_directories(art.dir);
  auto ds = generate(c.synth_config());
  {
    auto out = detail::open_out(art.path("A.csv"));
    write_records(out, ds.a);
  }
  {
    auto out = detail::open_out(art.path("B.csv"));
    write_records(out, ds.b);
  }
  {
    auto out = detail::open_out(art.path("truth.csv"));
    write_matching(out, ds.truth.links);
  }
  {
    auto out = detail::open_out(art.path("corruption.csv"));
    csv::Writer w(out);
    w.row("b_index", "a_index", "field");
    for (const auto& e : ds.truth.corruption)
      for (int f : e.fields) w.row(e.b_index, e.source_a, c.synth.fields[static_cast<std::size_t>(f)].name);
  }
  log << "synth: " << ds.a.size() << " + " << ds.b.size() << " records, " << ds.truth.links.size() << " true links\n";
  return ds;
}

}  // namespace prl::cli
