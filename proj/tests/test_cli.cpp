#include <catch2/catch_amalgamated.hpp>

#include <rnn2dfa/baselines.hpp>
#include <rnn2dfa/corpus.hpp>
#include <rnn2dfa/experiment.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

using namespace rnn2dfa;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path = fs::temp_directory_path() /
           ("rnn2dfa_cli_" + std::to_string(stamp));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return json::parse(in);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// One small network trained once and reused by the command tests.
struct SharedRun {
  TempDir dir;
  ExperimentConfig cfg;
  int train_exit = -1;
};

SharedRun& trained_tomita1() {
  static SharedRun run = [] {
    SharedRun r;
    r.cfg.language = "tomita1";
    r.cfg.hidden = 6;
    r.cfg.layers = 1;
    r.cfg.seed = 5;
    r.cfg.out_dir = r.dir.path.string();
    r.cfg.data.lengths = {0, 1, 2, 3, 4, 5, 6};
    r.cfg.data.per_length = 20;
    r.cfg.train.max_epochs = 800;
    r.cfg.eval.lengths = {8, 12};
    r.cfg.eval.per_length = 100;
    r.cfg.baseline.per_length = 200;
    r.cfg.baseline.max_length = 10;
    r.train_exit = cmd_train(r.cfg);
    return r;
  }();
  return run;
}

}  // namespace

TEST_CASE("configs parse with defaults and reject nonsense") {
  auto cfg = config_from_json(json{{"language", "tomita1"}, {"seed", 5}});
  CHECK(cfg.language == "tomita1");
  REQUIRE(cfg.seed.has_value());
  CHECK(*cfg.seed == 5);
  CHECK(cfg.cell == CellKind::gru);
  CHECK(cfg.hidden == 50);
  CHECK(cfg.layers == 2);
  CHECK(cfg.data.lengths == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  CHECK(cfg.data.per_length == 50);
  CHECK(cfg.extract.initial_depth == 10);
  CHECK(cfg.extract.query_seconds == 30.0);
  CHECK(cfg.extract.samples == "train");

  auto lstm = config_from_json(
      json{{"language", "tomita1"}, {"seed", 1}, {"cell", "lstm"}});
  CHECK(lstm.cell == CellKind::lstm);
  CHECK_THROWS_AS(
      config_from_json(json{{"language", "tomita1"}, {"seed", 1}, {"cell", "rwkv"}}),
      std::invalid_argument);

  // Round trip preserves the knobs a report would need to replay a run.
  cfg.extract.query_seconds = 12.5;
  cfg.baseline.q = 4;
  auto back = config_from_json(config_to_json(cfg));
  CHECK(back.language == cfg.language);
  CHECK(back.extract.query_seconds == 12.5);
  CHECK(back.baseline.q == 4);
  CHECK(back.data.lengths == cfg.data.lengths);

  // Configuration problems all come back as exit code 1.
  ExperimentConfig no_seed;
  no_seed.language = "tomita1";
  CHECK(run_guarded([&] { return cmd_train(no_seed); }) == 1);

  ExperimentConfig bad_lang;
  bad_lang.language = "nope";
  bad_lang.seed = 1;
  CHECK(run_guarded([&] { return cmd_train(bad_lang); }) == 1);

  ExperimentConfig no_data;
  no_data.language = "tomita1";
  no_data.seed = 1;
  no_data.data.lengths.clear();
  CHECK(run_guarded([&] { return cmd_train(no_data); }) == 1);
}

TEST_CASE("exit codes separate usage errors from contract violations") {
  CHECK(run_guarded([] { return 7; }) == 7);
  CHECK(run_guarded([]() -> int { throw std::invalid_argument("bad flag"); }) == 1);
  CHECK(run_guarded([]() -> int { throw std::out_of_range("bad index"); }) == 1);
  CHECK(run_guarded([]() -> int { throw std::logic_error("broken promise"); }) == 3);
  CHECK(run_guarded([]() -> int { throw std::runtime_error("surprise"); }) == 3);
}

TEST_CASE("training writes weights, a report, and an honest exit code") {
  auto& run = trained_tomita1();
  REQUIRE(run.train_exit == 0);
  const std::string weights = run.dir.file("weights.json");
  REQUIRE(fs::exists(weights));

  auto report = read_json(run.dir.file("train_report.json"));
  CHECK(report.at("command") == "train");
  CHECK(report.at("seed") == 5);
  CHECK(report.at("config").at("language") == "tomita1");
  CHECK(report.at("train_acc") == 1.0);
  CHECK(report.at("epochs").get<int>() >= 1);
  auto dev = report.at("dev_acc");
  REQUIRE(dev.size() == 2);
  CHECK(dev[0].at("length") == 8);
  CHECK(dev[1].at("length") == 12);
  for (const auto& row : dev) CHECK(row.at("agreement").get<double>() >= 0.9);

  // The weight file loads back into a working network.
  auto net = RnnAcceptor::from_json(read_json(weights));
  CHECK(net.config().hidden == 6);

  // Same seed, same bytes.
  TempDir again;
  ExperimentConfig cfg2 = run.cfg;
  cfg2.out_dir = again.path.string();
  REQUIRE(cmd_train(cfg2) == 0);
  CHECK(read_file(again.file("weights.json")) == read_file(weights));

  // A run that cannot reach perfect training accuracy says so with exit 2.
  TempDir hard;
  ExperimentConfig cfg3 = run.cfg;
  cfg3.language = "tomita5";
  cfg3.train.max_epochs = 1;
  cfg3.out_dir = hard.path.string();
  CHECK(cmd_train(cfg3) == 2);
  auto miss = read_json(hard.file("train_report.json"));
  CHECK(miss.at("train_acc").get<double>() < 1.0);
}

TEST_CASE("extraction recovers the trained language end to end") {
  auto& run = trained_tomita1();
  REQUIRE(run.train_exit == 0);
  REQUIRE(cmd_extract(run.cfg) == 0);

  const Dfa gt = minimize(*tomita(1).ground_truth);
  Dfa d = dfa_from_json(read_json(run.dir.file("dfa.json")));
  CHECK(!testsupport::brute_disagreement(d, gt, 10).has_value());
  CHECK(read_file(run.dir.file("dfa.dot")).find("digraph") != std::string::npos);

  auto report = read_json(run.dir.file("extract_report.json"));
  CHECK(report.at("command") == "extract");
  CHECK(report.at("converged") == true);
  CHECK(report.at("n_states") == d.n_states);
  CHECK(report.at("membership_queries").get<long long>() > 0);
  auto records = report.at("records");
  REQUIRE(!records.empty());
  CHECK(records.back().at("verdict") == "accept");
  for (const auto& r : records) {
    CHECK(r.contains("hypothesis_size"));
    CHECK(r.contains("refinements"));
    CHECK(r.contains("elapsed_ms"));
    CHECK(r.contains("leaf_count"));
  }
  CHECK(report.at("audit").at("ok") == true);
  CHECK(report.at("audit").at("violations").empty());

  // An impossible time budget still emits the last hypothesis, unconverged.
  TempDir rushed;
  ExperimentConfig cfg2 = run.cfg;
  cfg2.weights_file = run.dir.file("weights.json");
  cfg2.out_dir = rushed.path.string();
  cfg2.extract.query_seconds = 1e-9;
  REQUIRE(cmd_extract(cfg2) == 0);
  auto hurried = read_json(rushed.file("extract_report.json"));
  CHECK(hurried.at("converged") == false);
  CHECK(fs::exists(rushed.file("dfa.json")));

  // No weights anywhere: a usage error, not a crash.
  TempDir empty;
  ExperimentConfig cfg3 = run.cfg;
  cfg3.out_dir = empty.path.string();
  cfg3.weights_file.clear();
  CHECK(run_guarded([&] { return cmd_extract(cfg3); }) == 1);
}

TEST_CASE("baselines emit comparable reports") {
  auto& run = trained_tomita1();
  REQUIRE(run.train_exit == 0);

  // Interval quantization on a toy network finishes with a small machine.
  TempDir qdir;
  ExperimentConfig qcfg = run.cfg;
  qcfg.weights_file = run.dir.file("weights.json");
  qcfg.out_dir = qdir.path.string();
  REQUIRE(cmd_baseline(qcfg, "quant") == 0);
  auto qrep = read_json(qdir.file("baseline_report.json"));
  CHECK(qrep.at("command") == "baseline");
  CHECK(qrep.at("method") == "quant");
  CHECK(qrep.at("complete") == true);
  auto qpd = partial_dfa_from_json(read_json(qdir.file("baseline_dfa.json")));
  CHECK(qpd.n_states == qrep.at("n_states").get<int>());
  CHECK(qpd.n_states <= 64);  // at most 2^6 buckets for six state dimensions
  auto csv = read_file(qdir.file("coverage.csv"));
  CHECK(csv.rfind("length,coverage,accuracy\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') ==
        1 + static_cast<long>(run.cfg.eval.lengths.size()));

  // One cluster, one state.
  TempDir kdir;
  ExperimentConfig kcfg = qcfg;
  kcfg.out_dir = kdir.path.string();
  kcfg.baseline.k = 1;
  REQUIRE(cmd_baseline(kcfg, "kmeans") == 0);
  auto krep = read_json(kdir.file("baseline_report.json"));
  CHECK(krep.at("method") == "kmeans");
  CHECK(krep.at("n_states") == 1);

  // The sampling oracle runs the whole learner and converges here.
  TempDir sdir;
  ExperimentConfig scfg = qcfg;
  scfg.out_dir = sdir.path.string();
  REQUIRE(cmd_baseline(scfg, "randsample") == 0);
  auto srep = read_json(sdir.file("baseline_report.json"));
  CHECK(srep.at("method") == "randsample");
  CHECK(srep.at("converged") == true);
  REQUIRE(!srep.at("records").empty());
  CHECK(srep.at("records").back().at("verdict") == "accept");
  Dfa sd = dfa_from_json(read_json(sdir.file("baseline_dfa.json")));
  const Dfa gt = minimize(*tomita(1).ground_truth);
  CHECK(!testsupport::brute_disagreement(sd, gt, 8).has_value());

  CHECK(run_guarded([&] { return cmd_baseline(qcfg, "magic"); }) == 1);
}

TEST_CASE("evaluation reports agreement and rejects mismatched alphabets") {
  auto& run = trained_tomita1();
  REQUIRE(run.train_exit == 0);
  const Dfa gt = minimize(*tomita(1).ground_truth);

  // The ground-truth machine against its own language: full agreement.
  TempDir dir;
  {
    std::ofstream out(dir.file("gt.json"));
    out << dfa_to_json(gt).dump(2);
  }
  ExperimentConfig cfg = run.cfg;
  cfg.out_dir = dir.path.string();
  cfg.eval.dfa_file = dir.file("gt.json");
  cfg.eval.target = "language";
  REQUIRE(cmd_eval(cfg) == 0);
  auto csv = read_file(dir.file("eval.csv"));
  CHECK(csv.rfind("length,agreement\n", 0) == 0);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    CHECK(line.substr(line.find(',') + 1) == "1.000000");
    ++rows;
  }
  CHECK(rows == 2);

  // Against the trained network instead of the named language.
  TempDir wdir;
  ExperimentConfig wcfg = cfg;
  wcfg.out_dir = wdir.path.string();
  wcfg.weights_file = run.dir.file("weights.json");
  wcfg.eval.target = "weights";
  REQUIRE(cmd_eval(wcfg) == 0);
  auto report = read_json(wdir.file("eval_report.json"));
  CHECK(report.at("command") == "eval");
  for (const auto& row : report.at("rows"))
    CHECK(row.at("agreement").get<double>() >= 0.9);

  // A machine over the wrong alphabet is refused.
  TempDir mdir;
  {
    Alphabet abc = Alphabet::from_chars("abc");
    Dfa other(abc, 1, 0, {true}, {{0, 0, 0}});
    std::ofstream out(mdir.file("other.json"));
    out << dfa_to_json(other).dump(2);
  }
  ExperimentConfig mcfg = cfg;
  mcfg.out_dir = mdir.path.string();
  mcfg.eval.dfa_file = mdir.file("other.json");
  CHECK(run_guarded([&] { return cmd_eval(mcfg); }) == 1);
}
