#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "prl/cli.hpp"

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

prl::PipelineConfig resolve(const GlobalFlags& g) {
  prl::PipelineConfig c;
  if (!g.config.empty()) c = prl::load_config(g.config);
  if (g.out) c.out = *g.out;
  if (g.seed) c.seed = *g.seed;
  if (g.workers) c.workers = *g.workers;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  using prl::cli::ExitCode;
  CLI::App app{"Probabilistic record linkage: compare, fit, block, sample, evaluate."};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--config", g.config, "JSON pipeline configuration")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory (overrides config)");
  app.add_option("--seed", g.seed, "Top-level seed (overrides config)");
  app.add_option("--workers", g.workers, "Worker threads (overrides config)")->check(CLI::PositiveNumber);

  auto* compare = app.add_subcommand("compare", "Compare candidate pairs into a pattern table");
  std::string method = "penlik";
  auto* fit = app.add_subcommand("fit", "Estimate parameters and a matching");
  fit->add_option("--method", method, "fs | em_lsap | penlik | theta_sweep")
      ->check(CLI::IsMember({"fs", "em_lsap", "penlik", "theta_sweep"}));
  auto* block = app.add_subcommand("block", "Post-hoc blocking on fitted weights");
  auto* mcmc = app.add_subcommand("mcmc", "Restricted MCMC within post-hoc blocks");
  auto* eval = app.add_subcommand("eval", "Run the synthetic experiment or score estimates");
  auto* synth = app.add_subcommand("synth", "Generate a synthetic pair of files with ground truth");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::validation);
  }

  try {
    const auto c = resolve(g);
    if (compare->parsed()) prl::cli::cmd_compare(c);
    if (fit->parsed()) prl::cli::cmd_fit(c, prl::cli::parse_method(method));
    if (block->parsed()) prl::cli::cmd_block(c);
    if (mcmc->parsed()) prl::cli::cmd_mcmc(c);
    if (eval->parsed()) prl::cli::cmd_eval(c);
    if (synth->parsed()) prl::cli::cmd_synth(c);
  } catch (const prl::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::validation);
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return static_cast<int>(ExitCode::runtime);
  }
  return static_cast<int>(ExitCode::ok);
}
