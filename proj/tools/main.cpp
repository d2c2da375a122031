// Command-line front end. Everything of substance lives in the headers; this
// file parses flags, folds them over the config file, and dispatches.

#include <cstdint>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <rnn2dfa/experiment.hpp>

int main(int argc, char** argv) {
  using namespace rnn2dfa;

  CLI::App app{"learn deterministic machines from recurrent acceptors"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> time_limit;
  std::optional<int> initial_depth;
  std::optional<std::string> out_dir, weights, language, dfa_file;
  std::string method;

  CLI::App* train = app.add_subcommand("train", "train a recurrent acceptor");
  CLI::App* extract =
      app.add_subcommand("extract", "learn a machine by refinement queries");
  CLI::App* baseline = app.add_subcommand(
      "baseline", "run an abstraction or sampling-oracle baseline");
  baseline->add_option("method", method, "quant | kmeans | randsample")
      ->required();
  CLI::App* eval = app.add_subcommand(
      "eval", "compare a saved machine against a network or language");
  eval->add_option("--dfa", dfa_file, "machine file to evaluate");

  for (CLI::App* sc : {train, extract, baseline, eval}) {
    sc->add_option("--config", config_path, "experiment config file (json)");
    sc->add_option("--seed", seed, "master seed; every run demands one");
    sc->add_option("--time-limit", time_limit,
                   "whole-extraction budget in seconds (0 = unlimited)");
    sc->add_option("--initial-depth", initial_depth,
                   "first split depth of the state-space partitioning");
    sc->add_option("--out", out_dir, "output directory");
    sc->add_option("--weights", weights,
                   "weight file (default <out>/weights.json)");
    sc->add_option("--language", language, "target language name");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // asking for help is not an error
  }

  return run_guarded([&]() -> int {
    ExperimentConfig cfg;
    if (!config_path.empty())
      cfg = config_from_json(detail::read_json_file(config_path, "config"));
    if (seed) cfg.seed = *seed;
    if (time_limit) cfg.extract.total_seconds = *time_limit;
    if (initial_depth) cfg.extract.initial_depth = *initial_depth;
    if (out_dir) cfg.out_dir = *out_dir;
    if (weights) cfg.weights_file = *weights;
    if (language) cfg.language = *language;
    if (dfa_file) cfg.eval.dfa_file = *dfa_file;

    if (train->parsed()) return cmd_train(cfg);
    if (extract->parsed()) return cmd_extract(cfg);
    if (baseline->parsed()) return cmd_baseline(cfg, method);
    return cmd_eval(cfg);
  });
}
