#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "prl/comparison.hpp"
#include "prl/error.hpp"
#include "prl/mcmc.hpp"
#include "prl/mixture.hpp"
#include "prl/rng.hpp"
#include "prl/synth.hpp"

namespace prl {

using Json = nlohmann::json;

struct InputConfig {
  std::string file_a;
  std::string file_b;
  char delimiter = ',';
  std::optional<std::string> id_column;
  std::optional<std::string> blocking_column;
  std::optional<std::string> truth;  // CSV with a_index,b_index
};

struct EstimatorConfig {
  double theta = 0.0;
  std::vector<double> theta_grid{0, 1, 2, 3, 4, 5, 6, 7};
  double lambda = 0.0;
  double mu = 0.0;
  // Either one pseudocount for every cell, explicit per-level pseudocounts,
  // or Dirichlet concentrations (pseudocount = alpha - 1).
  double pseudocount = 1.0;
  std::optional<std::vector<std::vector<double>>> pseudo_m, pseudo_u;
  std::optional<std::vector<std::vector<double>>> alpha_m, alpha_u;
  // "agreement" (default_init), "margins" (margin_init) or "multistart"
  // (margins and the EM fit, best penalized objective wins); unset picks
  // agreement for EM and multistart for the penalized fits.
  std::optional<std::string> init;
  double init_pi = 0.1;
  std::optional<std::vector<std::vector<double>>> init_m, init_u;
  EmOptions em;
  int max_outer = 50;
  bool update_params = true;
};

struct BlockingConfig {
  double w0 = 0.0;
  std::optional<std::size_t> max_block_pairs;  // set: pick w0 from w0_grid
  std::vector<double> w0_grid{-2, -1, 0, 1, 2, 3, 4, 5, 6, 7, 8};
};

struct EvalConfig {
  std::vector<Scenario> grid;
  int replicates = 1;
  std::size_t n = 500;
  std::optional<double> theta;
  bool run_mcmc = true;
};

struct PipelineConfig {
  InputConfig input;
  std::vector<FieldComparator> fields;
  EstimatorConfig estimator;
  BlockingConfig blocking;
  McmcOptions mcmc;
  bool mcmc_seed_set = false;
  SynthConfig synth;
  EvalConfig eval;
  std::string out = "out";
  std::uint64_t seed = 1;
  int workers = 1;

  ComparisonSchema schema() const { return ComparisonSchema(fields); }

  std::uint64_t mcmc_seed() const { return mcmc_seed_set ? mcmc.seed : derive_seed(seed, "mcmc"); }

  // Range checks that do not need input files.
  void validate() const {
    if (workers < 1) throw ValidationError("workers must be >= 1");
    if (!fields.empty()) (void)schema();
    auto finite = [](double x, const char* what) {
      if (!std::isfinite(x)) throw ValidationError(std::string(what) + " must be finite");
    };
    finite(estimator.theta, "theta");
    for (double t : estimator.theta_grid) finite(t, "theta_grid entries");
    finite(estimator.lambda, "lambda");
    finite(estimator.mu, "mu");
    if (estimator.lambda < estimator.mu) throw ValidationError("lambda must be >= mu");
    if (!(estimator.pseudocount >= 0.0)) throw ValidationError("pseudocount must be nonnegative");
    if (estimator.pseudo_m.has_value() != estimator.pseudo_u.has_value())
      throw ValidationError("pseudo_m and pseudo_u must be given together");
    if (estimator.alpha_m.has_value() != estimator.alpha_u.has_value())
      throw ValidationError("alpha_m and alpha_u must be given together");
    if (estimator.pseudo_m && estimator.alpha_m) throw ValidationError("give either pseudocounts or alphas, not both");
    if (estimator.init_m.has_value() != estimator.init_u.has_value())
      throw ValidationError("init_m and init_u must be given together");
    if (!(estimator.init_pi > 0.0 && estimator.init_pi < 1.0)) throw ValidationError("init_pi must lie in (0,1)");
    if (estimator.init && *estimator.init != "agreement" && *estimator.init != "margins" &&
        *estimator.init != "multistart")
      throw ValidationError("estimator.init must be 'agreement', 'margins' or 'multistart'");
    if (estimator.init && estimator.init_m) throw ValidationError("give either estimator.init or init_m/init_u");
    if (!(estimator.em.tol > 0.0)) throw ValidationError("em tol must be positive");
    if (estimator.em.max_iter < 1) throw ValidationError("em max_iter must be >= 1");
    if (estimator.max_outer < 1) throw ValidationError("max_outer must be >= 1");
    if (std::isnan(blocking.w0)) throw ValidationError("w0 must not be NaN");
    if (blocking.max_block_pairs && *blocking.max_block_pairs < 1) throw ValidationError("block budget must be >= 1");
    if (blocking.max_block_pairs && blocking.w0_grid.empty()) throw ValidationError("w0_grid is empty");
    for (double w : blocking.w0_grid)
      if (std::isnan(w)) throw ValidationError("w0_grid entries must not be NaN");
    mcmc.validate();
    synth.validate();
    if (eval.replicates < 1) throw ValidationError("eval replicates must be >= 1");
    if (eval.theta) finite(*eval.theta, "eval theta");
    for (const auto& s : eval.grid) {
      SynthConfig c = synth;
      c.n_a = c.n_b = eval.n;
      c.overlap = s.overlap;
      c.errors_per_record = s.errors_per_record;
      c.validate();
    }
  }

  void require_inputs() const {
    if (input.file_a.empty() || input.file_b.empty()) throw ValidationError("input.file_a and input.file_b are required");
    for (const auto& p : {input.file_a, input.file_b})
      if (!std::filesystem::exists(p)) throw ValidationError("input file not found: " + p);
    if (input.truth && !std::filesystem::exists(*input.truth))
      throw ValidationError("truth file not found: " + *input.truth);
    if (fields.empty()) throw ValidationError("schema.fields is empty");
  }

  DirichletPrior prior(const std::vector<int>& levels) const {
    DirichletPrior p;
    if (estimator.pseudo_m) {
      p.pseudo_m = *estimator.pseudo_m;
      p.pseudo_u = *estimator.pseudo_u;
      p.alpha_m = p.pseudo_m;
      p.alpha_u = p.pseudo_u;
      for (auto* a : {&p.alpha_m, &p.alpha_u})
        for (auto& v : *a)
          for (double& x : v) x += 1.0;
    } else if (estimator.alpha_m) {
      p = DirichletPrior::from_alpha(*estimator.alpha_m, *estimator.alpha_u);
    } else {
      p = DirichletPrior::flat(levels, estimator.pseudocount);
    }
    p.validate(levels);
    return p;
  }

  MixtureParams initial_params(const ComparisonSchema& s, const PatternTable& table, bool penalized) const {
    if (estimator.init_m) {
      MixtureParams p{*estimator.init_m, *estimator.init_u, estimator.init_pi};
      if (p.level_counts() != s.level_counts()) throw ValidationError("init_m/init_u shape does not match the schema");
      p.validate(1e-6);
      return p;
    }
    const std::string kind = estimator.init.value_or(penalized ? "multistart" : "agreement");
    if (kind != "agreement" && table.total_pairs > 0) return margin_init(table, s.agreement_level_counts(), estimator.init_pi);
    return MixtureParams::default_init(s.level_counts(), s.agreement_level_counts(), estimator.init_pi);
  }

  // Starting points for a penalized fit; a theta sweep uses only the first.
  std::vector<MixtureParams> penalized_starts(const ComparisonSchema& s, const PatternTable& table) const {
    const bool multi = !estimator.init_m && estimator.init.value_or("multistart") == "multistart";
    if (!multi || table.total_pairs <= 0) return {initial_params(s, table, true)};
    return default_penalized_starts(table, s.agreement_level_counts(), estimator.init_pi, estimator.em);
  }

  PenalizedOptions penalized_options() const {
    PenalizedOptions o;
    o.max_outer = estimator.max_outer;
    o.update_params = estimator.update_params;
    o.workers = workers;
    return o;
  }

  McmcOptions mcmc_options() const {
    McmcOptions o = mcmc;
    o.seed = mcmc_seed();
    o.workers = workers;
    return o;
  }

  SynthConfig synth_config() const {
    SynthConfig c = synth;
    c.seed = seed;
    return c;
  }

  ExperimentConfig experiment() const {
    ExperimentConfig e;
    e.grid = eval.grid;
    e.replicates = eval.replicates;
    e.seed = seed;
    e.n = eval.n;
    e.fields = synth.fields;
    e.max_string_edits = synth.max_string_edits;
    e.theta = eval.theta;
    e.mu = estimator.mu;
    e.em = estimator.em;
    e.penalized = penalized_options();
    e.penalized.workers = 1;
    e.run_mcmc = eval.run_mcmc;
    e.w0 = blocking.w0;
    e.mcmc = mcmc;
    e.workers = workers;
    return e;
  }
};

namespace detail {

inline void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ValidationError("unknown config key '" + where + "." + it.key() + "'");
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("config key '") + key + "' has the wrong type");
  }
}

template <class T>
void read(const Json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  T v{};
  read(j, key, v);
  out = std::move(v);
}

inline ComparatorKind parse_kind(const std::string& s) {
  if (s == "exact") return ComparatorKind::exact;
  if (s == "levenshtein") return ComparatorKind::levenshtein;
  throw ValidationError("unknown comparator '" + s + "' (expected exact or levenshtein)");
}

inline SynthFieldKind parse_synth_kind(const std::string& s) {
  if (s == "given_name") return SynthFieldKind::given_name;
  if (s == "family_name") return SynthFieldKind::family_name;
  if (s == "categorical") return SynthFieldKind::categorical;
  throw ValidationError("unknown synth field kind '" + s + "'");
}

inline const char* synth_kind_name(SynthFieldKind k) {
  switch (k) {
    case SynthFieldKind::given_name: return "given_name";
    case SynthFieldKind::family_name: return "family_name";
    default: return "categorical";
  }
}

}  // namespace detail

inline PipelineConfig parse_config(const Json& j) {
  using detail::check_keys;
  using detail::read;
  PipelineConfig c;
  check_keys(j, "config", {"input", "schema", "estimator", "blocking", "mcmc", "synth", "eval", "out", "seed", "workers"});
  read(j, "out", c.out);
  read(j, "seed", c.seed);
  read(j, "workers", c.workers);

  if (j.contains("input")) {
    const auto& in = j["input"];
    check_keys(in, "input", {"file_a", "file_b", "delimiter", "id_column", "blocking_column", "truth"});
    read(in, "file_a", c.input.file_a);
    read(in, "file_b", c.input.file_b);
    std::string delim(1, c.input.delimiter);
    read(in, "delimiter", delim);
    if (delim == "\\t") delim = "\t";
    if (delim.size() != 1) throw ValidationError("input.delimiter must be a single character");
    c.input.delimiter = delim[0];
    read(in, "id_column", c.input.id_column);
    read(in, "blocking_column", c.input.blocking_column);
    read(in, "truth", c.input.truth);
  }

  if (j.contains("schema")) {
    const auto& s = j["schema"];
    check_keys(s, "schema", {"fields"});
    if (s.contains("fields")) {
      if (!s["fields"].is_array()) throw ValidationError("schema.fields must be an array");
      for (const auto& f : s["fields"]) {
        check_keys(f, "schema.fields[]", {"column", "comparator", "cut_points", "missing_level"});
        FieldComparator fc;
        read(f, "column", fc.column);
        if (fc.column.empty()) throw ValidationError("schema field without a column name");
        std::string kind = "exact";
        read(f, "comparator", kind);
        fc.kind = detail::parse_kind(kind);
        if (fc.kind == ComparatorKind::levenshtein) fc.cut_points = ComparisonSchema::four_level_cuts();
        read(f, "cut_points", fc.cut_points);
        if (fc.kind == ComparatorKind::exact && f.contains("cut_points"))
          throw ValidationError("field '" + fc.column + "': exact comparators take no cut points");
        read(f, "missing_level", fc.missing_level);
        c.fields.push_back(std::move(fc));
      }
    }
  }

  if (j.contains("estimator")) {
    const auto& e = j["estimator"];
    check_keys(e, "estimator", {"theta", "theta_grid", "lambda", "mu", "pseudocount", "pseudo_m", "pseudo_u", "alpha_m",
                                "alpha_u", "init", "init_pi", "init_m", "init_u", "em_tol", "em_max_iter", "max_outer",
                                "update_params"});
    auto& x = c.estimator;
    read(e, "theta", x.theta);
    read(e, "theta_grid", x.theta_grid);
    read(e, "lambda", x.lambda);
    read(e, "mu", x.mu);
    read(e, "pseudocount", x.pseudocount);
    read(e, "pseudo_m", x.pseudo_m);
    read(e, "pseudo_u", x.pseudo_u);
    read(e, "alpha_m", x.alpha_m);
    read(e, "alpha_u", x.alpha_u);
    read(e, "init", x.init);
    read(e, "init_pi", x.init_pi);
    read(e, "init_m", x.init_m);
    read(e, "init_u", x.init_u);
    read(e, "em_tol", x.em.tol);
    read(e, "em_max_iter", x.em.max_iter);
    read(e, "max_outer", x.max_outer);
    read(e, "update_params", x.update_params);
  }

  if (j.contains("blocking")) {
    const auto& b = j["blocking"];
    check_keys(b, "blocking", {"w0", "max_block_pairs", "w0_grid"});
    read(b, "w0", c.blocking.w0);
    if (b.contains("max_block_pairs") && b["max_block_pairs"].is_number_integer() && b["max_block_pairs"].get<std::int64_t>() < 1)
      throw ValidationError("block budget must be >= 1");
    read(b, "max_block_pairs", c.blocking.max_block_pairs);
    read(b, "w0_grid", c.blocking.w0_grid);
  }

  if (j.contains("mcmc")) {
    const auto& m = j["mcmc"];
    check_keys(m, "mcmc", {"iterations", "burn_in", "seed", "move_mix", "gibbs_cap", "moves_per_sweep", "update_params"});
    read(m, "iterations", c.mcmc.iterations);
    read(m, "burn_in", c.mcmc.burn_in);
    if (m.contains("seed")) {
      read(m, "seed", c.mcmc.seed);
      c.mcmc_seed_set = true;
    }
    if (m.contains("move_mix")) {
      const auto& mm = m["move_mix"];
      check_keys(mm, "mcmc.move_mix", {"add", "drop", "swap"});
      read(mm, "add", c.mcmc.mix.add);
      read(mm, "drop", c.mcmc.mix.drop);
      read(mm, "swap", c.mcmc.mix.swap);
    }
    read(m, "gibbs_cap", c.mcmc.gibbs_cap);
    read(m, "moves_per_sweep", c.mcmc.moves_per_sweep);
    read(m, "update_params", c.mcmc.update_params);
  }

  if (j.contains("synth")) {
    const auto& s = j["synth"];
    check_keys(s, "synth", {"n_a", "n_b", "overlap", "errors_per_record", "max_string_edits", "fields"});
    read(s, "n_a", c.synth.n_a);
    read(s, "n_b", c.synth.n_b);
    read(s, "overlap", c.synth.overlap);
    read(s, "errors_per_record", c.synth.errors_per_record);
    read(s, "max_string_edits", c.synth.max_string_edits);
    if (s.contains("fields")) {
      c.synth.fields.clear();
      for (const auto& f : s["fields"]) {
        check_keys(f, "synth.fields[]", {"name", "kind", "categories", "zipf_exponent", "rank_offset"});
        SynthField sf;
        read(f, "name", sf.name);
        std::string kind = "categorical";
        read(f, "kind", kind);
        sf.kind = detail::parse_synth_kind(kind);
        read(f, "categories", sf.categories);
        read(f, "zipf_exponent", sf.zipf_exponent);
        read(f, "rank_offset", sf.rank_offset);
        c.synth.fields.push_back(std::move(sf));
      }
    }
  }

  if (j.contains("eval")) {
    const auto& e = j["eval"];
    check_keys(e, "eval", {"grid", "replicates", "n", "theta", "run_mcmc"});
    if (e.contains("grid")) {
      for (const auto& g : e["grid"]) {
        check_keys(g, "eval.grid[]", {"overlap", "errors_per_record"});
        Scenario sc;
        read(g, "overlap", sc.overlap);
        read(g, "errors_per_record", sc.errors_per_record);
        c.eval.grid.push_back(sc);
      }
    }
    read(e, "replicates", c.eval.replicates);
    read(e, "n", c.eval.n);
    read(e, "theta", c.eval.theta);
    read(e, "run_mcmc", c.eval.run_mcmc);
  }
  return c;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline Json to_json(const PipelineConfig& c) {
  Json j;
  j["out"] = c.out;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  Json in = {{"file_a", c.input.file_a}, {"file_b", c.input.file_b}, {"delimiter", std::string(1, c.input.delimiter)}};
  if (c.input.id_column) in["id_column"] = *c.input.id_column;
  if (c.input.blocking_column) in["blocking_column"] = *c.input.blocking_column;
  if (c.input.truth) in["truth"] = *c.input.truth;
  j["input"] = in;
  Json fields = Json::array();
  for (const auto& f : c.fields) {
    Json x = {{"column", f.column}, {"comparator", f.kind == ComparatorKind::exact ? "exact" : "levenshtein"},
              {"missing_level", f.missing_level}};
    if (f.kind == ComparatorKind::levenshtein) x["cut_points"] = f.cut_points;
    fields.push_back(std::move(x));
  }
  j["schema"] = {{"fields", fields}};
  const auto& e = c.estimator;
  Json est = {{"theta", e.theta},       {"theta_grid", e.theta_grid}, {"lambda", e.lambda},
              {"mu", e.mu},             {"pseudocount", e.pseudocount}, {"init_pi", e.init_pi},
              {"em_tol", e.em.tol},     {"em_max_iter", e.em.max_iter}, {"max_outer", e.max_outer},
              {"update_params", e.update_params}};
  if (e.pseudo_m) est["pseudo_m"] = *e.pseudo_m, est["pseudo_u"] = *e.pseudo_u;
  if (e.alpha_m) est["alpha_m"] = *e.alpha_m, est["alpha_u"] = *e.alpha_u;
  if (e.init) est["init"] = *e.init;
  if (e.init_m) est["init_m"] = *e.init_m, est["init_u"] = *e.init_u;
  j["estimator"] = est;
  Json blk = {{"w0", c.blocking.w0}, {"w0_grid", c.blocking.w0_grid}};
  if (c.blocking.max_block_pairs) blk["max_block_pairs"] = *c.blocking.max_block_pairs;
  j["blocking"] = blk;
  Json mc = {{"iterations", c.mcmc.iterations},
             {"burn_in", c.mcmc.burn_in},
             {"move_mix", {{"add", c.mcmc.mix.add}, {"drop", c.mcmc.mix.drop}, {"swap", c.mcmc.mix.swap}}},
             {"gibbs_cap", c.mcmc.gibbs_cap},
             {"moves_per_sweep", c.mcmc.moves_per_sweep},
             {"update_params", c.mcmc.update_params}};
  if (c.mcmc_seed_set) mc["seed"] = c.mcmc.seed;
  j["mcmc"] = mc;
  Json sf = Json::array();
  for (const auto& f : c.synth.fields)
    sf.push_back({{"name", f.name}, {"kind", detail::synth_kind_name(f.kind)}, {"categories", f.categories},
                  {"zipf_exponent", f.zipf_exponent}, {"rank_offset", f.rank_offset}});
  j["synth"] = {{"n_a", c.synth.n_a},
                {"n_b", c.synth.n_b},
                {"overlap", c.synth.overlap},
                {"errors_per_record", c.synth.errors_per_record},
                {"max_string_edits", c.synth.max_string_edits},
                {"fields", sf}};
  Json grid = Json::array();
  for (const auto& s : c.eval.grid) grid.push_back({{"overlap", s.overlap}, {"errors_per_record", s.errors_per_record}});
  Json ev = {{"grid", grid}, {"replicates", c.eval.replicates}, {"n", c.eval.n}, {"run_mcmc", c.eval.run_mcmc}};
  if (c.eval.theta) ev["theta"] = *c.eval.theta;
  j["eval"] = ev;
  return j;
}

inline Json to_json(const MixtureParams& p) { return {{"m", p.m}, {"u", p.u}, {"pi", p.pi}}; }

inline MixtureParams params_from_json(const Json& j) {
  try {
    MixtureParams p{j.at("m").get<std::vector<std::vector<double>>>(), j.at("u").get<std::vector<std::vector<double>>>(),
                    j.at("pi").get<double>()};
    p.validate(1e-6);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed parameter JSON: ") + e.what());
  }
}

}  // namespace prl
