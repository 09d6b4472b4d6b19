#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include "prl/cli.hpp"
#include "support.hpp"

using namespace prl;
namespace fs = std::filesystem;

namespace {

Json base_config(const support::TempDir& dir) {
  auto j = Json::parse(R"({
    "input": {"file_a": "A.csv", "file_b": "B.csv", "truth": "truth.csv"},
    "schema": {"fields": [
      {"column": "given_name", "comparator": "levenshtein"},
      {"column": "family_name", "comparator": "levenshtein"},
      {"column": "age"},
      {"column": "occupation"}]},
    "estimator": {"theta": 5.0},
    "mcmc": {"iterations": 300, "burn_in": 50},
    "synth": {"n_a": 80, "n_b": 80, "overlap": 0.5, "errors_per_record": 2}
  })");
  j.merge_patch({{"out", dir.str("out")},
                    {"input",
                     {{"file_a", dir.str("out/A.csv")}, {"file_b", dir.str("out/B.csv")}, {"truth", dir.str("out/truth.csv")}}}});
  return j;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PRL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t data_rows(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n ? n - 1 : 0;
}

}  // namespace

TEST(Config, RejectsUnknownKeys) {
  EXPECT_THROW(parse_config(Json::parse(R"({"estimatr": {}})")), ValidationError);
  EXPECT_THROW(parse_config(Json::parse(R"({"estimator": {"thetaa": 1}})")), ValidationError);
  EXPECT_THROW(parse_config(Json::parse(R"({"mcmc": {"move_mix": {"flip": 1}}})")), ValidationError);
}

TEST(Config, RangeValidation) {
  auto bad = [](const char* text) {
    auto c = parse_config(Json::parse(text));
    c.validate();
  };
  EXPECT_THROW(bad(R"({"mcmc": {"iterations": 10, "burn_in": 10}})"), ValidationError);
  EXPECT_THROW(bad(R"({"blocking": {"max_block_pairs": 0}})"), ValidationError);
  EXPECT_THROW(bad(R"({"estimator": {"lambda": -1, "mu": 1}})"), ValidationError);
  EXPECT_THROW(bad(R"({"schema": {"fields": [{"column": "x", "comparator": "levenshtein", "cut_points": [0, 0.5, 0.4, 1]}]}})"),
               ValidationError);
  EXPECT_THROW(bad(R"({"schema": {"fields": [{"column": "x", "comparator": "jaro"}]}})"), ValidationError);
  EXPECT_THROW(bad(R"({"workers": 0})"), ValidationError);
  EXPECT_THROW(bad(R"({"estimator": {"init": "random"}})"), ValidationError);
  EXPECT_THROW(bad(R"({"synth": {"n_a": 7, "overlap": 0.5}})"), ValidationError);
  EXPECT_NO_THROW(bad(R"({"estimator": {"theta": 2, "alpha_m": [[3, 20]], "alpha_u": [[20, 3]]}})"));
}

TEST(Config, JsonRoundTrip) {
  support::TempDir dir("config_roundtrip");
  auto c = parse_config(base_config(dir));
  auto again = parse_config(to_json(c));
  EXPECT_EQ(to_json(again).dump(), to_json(c).dump());
  EXPECT_EQ(again.fields.size(), 4u);
  EXPECT_EQ(again.fields[0].cut_points, ComparisonSchema::four_level_cuts());
  EXPECT_EQ(again.mcmc_seed(), derive_seed(1, "mcmc"));
}

TEST(Pipeline, EndToEndAndIdempotent) {
  support::TempDir dir("pipeline");
  auto c = parse_config(base_config(dir));
  std::ostringstream log;
  cli::cmd_synth(c, log);
  cli::cmd_compare(c, log);
  const cli::Artifacts art{c.out};
  EXPECT_EQ(data_rows(art.path("pairs.csv").string()), 6400u);

  cli::cmd_fit(c, cli::FitMethod::fs, log);
  EXPECT_EQ(data_rows(art.path("fs_decisions.csv").string()), 6400u);
  cli::cmd_fit(c, cli::FitMethod::em_lsap, log);
  EXPECT_TRUE(art.has("matching.csv"));
  EXPECT_TRUE(art.has("weights.csv"));
  cli::cmd_fit(c, cli::FitMethod::theta_sweep, log);
  EXPECT_EQ(data_rows(art.path("theta_sweep.csv").string()), 8u);
  cli::cmd_fit(c, cli::FitMethod::penlik, log);
  const auto matching = support::read_file(art.path("matching.csv").string());

  c.blocking.max_block_pairs = 50;
  auto blocks = cli::cmd_block(c, log);
  for (const auto& b : blocks.blocks) EXPECT_LE(b.pairs(), 50u);
  EXPECT_TRUE(art.has("block_curve.csv"));
  cli::cmd_mcmc(c, log);
  const auto posterior = support::read_file(art.path("posterior.csv").string());
  cli::cmd_eval(c, log);
  EXPECT_EQ(data_rows(art.path("score.csv").string()), 2u);

  // Same inputs, same seed: same bytes.
  cli::cmd_fit(c, cli::FitMethod::penlik, log);
  EXPECT_EQ(support::read_file(art.path("matching.csv").string()), matching);
  cli::cmd_block(c, log);
  cli::cmd_mcmc(c, log);
  EXPECT_EQ(support::read_file(art.path("posterior.csv").string()), posterior);
}

TEST(Pipeline, PenlikAboveAllWeightsWritesHeaderOnly) {
  support::TempDir dir("pipeline_empty");
  auto c = parse_config(base_config(dir));
  std::ostringstream log;
  cli::cmd_synth(c, log);
  cli::cmd_compare(c, log);
  c.estimator.theta = 1000.0;
  cli::cmd_fit(c, cli::FitMethod::penlik, log);
  EXPECT_EQ(support::read_file(cli::Artifacts{c.out}.path("matching.csv").string()), "a_index,b_index,weight\n");
}

TEST(Pipeline, CensusShapedCompareHasEightPatterns) {
  support::TempDir dir("census_shape");
  std::string a = "surname,sex,education\n", b = a;
  const char* s[] = {"BR", "CS", "MR", "PL"};
  for (int i = 0; i < 34; ++i) a += std::string(s[i % 4]) + "," + (i % 2 ? "M" : "F") + "," + std::to_string(i % 5) + "\n";
  for (int i = 0; i < 45; ++i) b += std::string(s[(i * 3) % 4]) + "," + (i % 3 ? "M" : "F") + "," + std::to_string(i % 7) + "\n";
  support::write_file(dir.str("a.csv"), a);
  support::write_file(dir.str("b.csv"), b);
  Json j = {{"input", {{"file_a", dir.str("a.csv")}, {"file_b", dir.str("b.csv")}}},
            {"schema", {{"fields", {{{"column", "surname"}}, {{"column", "sex"}}, {{"column", "education"}}}}}},
            {"out", dir.str("out")}};
  std::ostringstream log;
  cli::cmd_compare(parse_config(j), log);
  EXPECT_EQ(data_rows(dir.str("out/patterns.csv")), 8u);
  EXPECT_EQ(data_rows(dir.str("out/pairs.csv")), 1530u);
}

TEST(Cli, ExitCodes) {
  support::TempDir dir("cli_exit");
  auto j = base_config(dir);
  support::write_file(dir.str("good.json"), j.dump());
  EXPECT_EQ(run_cli("--config " + dir.str("good.json") + " synth"), 0);
  EXPECT_EQ(run_cli("--config " + dir.str("good.json") + " compare"), 0);
  EXPECT_EQ(run_cli("--config " + dir.str("good.json") + " fit --method penlik"), 0);
  EXPECT_EQ(run_cli("--config " + dir.str("good.json") + " --workers 2 mcmc"), 0);

  auto bad = j;
  bad["schema"]["fields"][0]["cut_points"] = {0.0, 0.5, 0.25, 1.0};
  support::write_file(dir.str("bad.json"), bad.dump());
  EXPECT_EQ(run_cli("--config " + dir.str("bad.json") + " compare"), 1);
  EXPECT_EQ(run_cli("--config " + dir.str("good.json") + " fit --method magic"), 1);
  EXPECT_EQ(run_cli("nosuchcommand"), 1);

  // Missing upstream artifacts.
  auto fresh = j;
  fresh["out"] = dir.str("elsewhere");
  support::write_file(dir.str("fresh.json"), fresh.dump());
  EXPECT_EQ(run_cli("--config " + dir.str("fresh.json") + " mcmc"), 1);

  // Empty B: warning only.
  support::write_file(dir.str("empty_b.csv"), "given_name,family_name,age,occupation\n");
  auto empty = j;
  empty["input"]["file_b"] = dir.str("empty_b.csv");
  empty["out"] = dir.str("empty_out");
  support::write_file(dir.str("empty.json"), empty.dump());
  EXPECT_EQ(run_cli("--config " + dir.str("empty.json") + " compare"), 0);
  EXPECT_EQ(data_rows(dir.str("empty_out/pairs.csv")), 0u);
}

TEST(Cli, EvalGridWritesResults) {
  support::TempDir dir("cli_eval");
  Json j = {{"out", dir.str("out")},
            {"eval", {{"grid", {{{"overlap", 1.0}, {"errors_per_record", 0}}}}, {"n", 20}, {"replicates", 1}}},
            {"mcmc", {{"iterations", 100}, {"burn_in", 10}}}};
  std::ostringstream log;
  cli::cmd_eval(parse_config(j), log);
  const auto text = support::read_file(dir.str("out/results.csv"));
  EXPECT_EQ(data_rows(dir.str("out/results.csv")), 3u);
  EXPECT_NE(text.find("bayes,1,1,20,20"), std::string::npos) << text;
}
