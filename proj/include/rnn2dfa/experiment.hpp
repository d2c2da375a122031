#pragma once

// One experiment = one config + one seed + one output directory. The four
// commands (train, extract, baseline, eval) share the config struct and write
// their artifacts as JSON/CSV files under the output directory, so a run can
// be chained: train leaves weights.json where extract expects it, extract
// leaves dfa.json where eval expects it.
//
// Exit codes: 0 success, 1 bad usage or config, 2 the trained network missed
// its accuracy target, 3 a broken internal invariant.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "baselines.hpp"
#include "corpus.hpp"
#include "rnn.hpp"
#include "teacher.hpp"
#include "training.hpp"

namespace rnn2dfa {

struct ExtractSettings {
  int initial_depth = 10;
  double query_seconds = 30.0;  // per equivalence call
  double total_seconds = 0.0;   // whole extraction; 0 = unlimited
  // Where the teacher's starting samples come from: "train" labels the
  // training words with the network and keeps the shortest of each kind,
  // "none" starts empty. Explicit samples below override the mode.
  std::string samples = "train";
  std::optional<std::string> accepting_sample;
  std::optional<std::string> rejecting_sample;
};

struct EvalSettings {
  std::string dfa_file;
  // What the machine is compared against: "language", "weights", or "auto"
  // (weights if a weight file is present, else the named language).
  std::string target = "auto";
  std::vector<int> lengths = {15, 20, 25};
  int per_length = 200;
};

struct BaselineSettings {
  int q = 2;    // intervals per dimension for quant
  int k = 10;   // clusters for kmeans
  int max_states = 3000;
  double max_seconds = 30.0;
  int per_length = 1000;  // sampling-oracle batch size
  int max_length = 30;
};

struct ExperimentConfig {
  std::string language;  // name in the registry, or
  std::string dfa_file;  // a machine file acting as the target language
  CellKind cell = CellKind::gru;
  int hidden = 50;
  int layers = 2;
  std::optional<std::uint64_t> seed;  // mandatory; every command refuses to guess
  std::string out_dir = ".";
  std::string weights_file;  // input override; empty = <out_dir>/weights.json
  TrainSetConfig data;
  TrainOptions train;
  ExtractSettings extract;
  EvalSettings eval;
  BaselineSettings baseline;

  ExperimentConfig() {
    data.lengths = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    data.per_length = 50;
    train.max_epochs = 3000;
  }
};

// Each consumer of randomness gets its own stream so adding one never shifts
// the draws of another. Odd multiplier keeps streams distinct.
inline std::uint64_t mix_seed(std::uint64_t seed, int stream) {
  return seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(stream + 1);
}

namespace detail {

inline json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good())
    throw std::invalid_argument(std::string(what) + ": cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string(what) + ": " + path + ": " +
                                e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good())
    throw std::runtime_error("cannot write " + path);
  out << text;
}

inline void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

inline std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const json& j) {
  try {
    ExperimentConfig c;
    if (j.contains("language")) c.language = j.at("language").get<std::string>();
    if (j.contains("dfa_file")) c.dfa_file = j.at("dfa_file").get<std::string>();
    if (j.contains("cell")) {
      std::string s = j.at("cell").get<std::string>();
      if (s == "gru")
        c.cell = CellKind::gru;
      else if (s == "lstm")
        c.cell = CellKind::lstm;
      else
        throw std::invalid_argument("config: unknown cell kind: " + s);
    }
    if (j.contains("hidden")) c.hidden = j.at("hidden").get<int>();
    if (j.contains("layers")) c.layers = j.at("layers").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
    if (j.contains("weights")) c.weights_file = j.at("weights").get<std::string>();
    if (j.contains("data")) {
      const json& d = j.at("data");
      if (d.contains("lengths")) c.data.lengths = d.at("lengths").get<std::vector<int>>();
      if (d.contains("per_length")) c.data.per_length = d.at("per_length").get<int>();
      if (d.contains("draw_budget")) c.data.draw_budget = d.at("draw_budget").get<int>();
    }
    if (j.contains("train")) {
      const json& t = j.at("train");
      if (t.contains("max_epochs")) c.train.max_epochs = t.at("max_epochs").get<int>();
      if (t.contains("lr")) c.train.lr = t.at("lr").get<double>();
      if (t.contains("target_loss")) c.train.target_loss = t.at("target_loss").get<double>();
    }
    if (j.contains("extract")) {
      const json& e = j.at("extract");
      if (e.contains("initial_depth")) c.extract.initial_depth = e.at("initial_depth").get<int>();
      if (e.contains("query_seconds")) c.extract.query_seconds = e.at("query_seconds").get<double>();
      if (e.contains("total_seconds")) c.extract.total_seconds = e.at("total_seconds").get<double>();
      if (e.contains("samples")) c.extract.samples = e.at("samples").get<std::string>();
      if (e.contains("accepting_sample"))
        c.extract.accepting_sample = e.at("accepting_sample").get<std::string>();
      if (e.contains("rejecting_sample"))
        c.extract.rejecting_sample = e.at("rejecting_sample").get<std::string>();
    }
    if (j.contains("eval")) {
      const json& e = j.at("eval");
      if (e.contains("dfa_file")) c.eval.dfa_file = e.at("dfa_file").get<std::string>();
      if (e.contains("target")) c.eval.target = e.at("target").get<std::string>();
      if (e.contains("lengths")) c.eval.lengths = e.at("lengths").get<std::vector<int>>();
      if (e.contains("per_length")) c.eval.per_length = e.at("per_length").get<int>();
    }
    if (j.contains("baseline")) {
      const json& b = j.at("baseline");
      if (b.contains("q")) c.baseline.q = b.at("q").get<int>();
      if (b.contains("k")) c.baseline.k = b.at("k").get<int>();
      if (b.contains("max_states")) c.baseline.max_states = b.at("max_states").get<int>();
      if (b.contains("max_seconds")) c.baseline.max_seconds = b.at("max_seconds").get<double>();
      if (b.contains("per_length")) c.baseline.per_length = b.at("per_length").get<int>();
      if (b.contains("max_length")) c.baseline.max_length = b.at("max_length").get<int>();
    }
    return c;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

inline json config_to_json(const ExperimentConfig& c) {
  json j;
  if (!c.language.empty()) j["language"] = c.language;
  if (!c.dfa_file.empty()) j["dfa_file"] = c.dfa_file;
  j["cell"] = c.cell == CellKind::gru ? "gru" : "lstm";
  j["hidden"] = c.hidden;
  j["layers"] = c.layers;
  if (c.seed) j["seed"] = *c.seed;
  j["out"] = c.out_dir;
  if (!c.weights_file.empty()) j["weights"] = c.weights_file;
  j["data"] = {{"lengths", c.data.lengths},
               {"per_length", c.data.per_length},
               {"draw_budget", c.data.draw_budget}};
  j["train"] = {{"max_epochs", c.train.max_epochs},
                {"lr", c.train.lr},
                {"target_loss", c.train.target_loss}};
  json ex = {{"initial_depth", c.extract.initial_depth},
             {"query_seconds", c.extract.query_seconds},
             {"total_seconds", c.extract.total_seconds},
             {"samples", c.extract.samples}};
  if (c.extract.accepting_sample) ex["accepting_sample"] = *c.extract.accepting_sample;
  if (c.extract.rejecting_sample) ex["rejecting_sample"] = *c.extract.rejecting_sample;
  j["extract"] = ex;
  json ev = {{"target", c.eval.target},
             {"lengths", c.eval.lengths},
             {"per_length", c.eval.per_length}};
  if (!c.eval.dfa_file.empty()) ev["dfa_file"] = c.eval.dfa_file;
  j["eval"] = ev;
  j["baseline"] = {{"q", c.baseline.q},
                   {"k", c.baseline.k},
                   {"max_states", c.baseline.max_states},
                   {"max_seconds", c.baseline.max_seconds},
                   {"per_length", c.baseline.per_length},
                   {"max_length", c.baseline.max_length}};
  return j;
}

namespace detail {

inline std::uint64_t require_seed(const ExperimentConfig& c) {
  if (!c.seed)
    throw std::invalid_argument("config: a seed is mandatory, pass --seed");
  return *c.seed;
}

inline std::string out_path(const ExperimentConfig& c, const char* name) {
  return (std::filesystem::path(c.out_dir) / name).string();
}

inline std::string weights_path(const ExperimentConfig& c) {
  return c.weights_file.empty() ? out_path(c, "weights.json") : c.weights_file;
}

// The target language: a registry name, or any machine file standing in
// for one.
inline LanguageSpec resolve_language(const ExperimentConfig& c) {
  if (!c.dfa_file.empty()) {
    Dfa d = dfa_from_json(read_json_file(c.dfa_file, "dfa_file"));
    Alphabet ab = d.alphabet;
    return LanguageSpec{
        "machine:" + std::filesystem::path(c.dfa_file).filename().string(), ab,
        [d = std::move(d)](const Word& w) { return d.accepts(w); }, d, nullptr};
  }
  if (c.language.empty())
    throw std::invalid_argument("config: need a language name or a machine file");
  return language_by_name(c.language);
}

inline RnnAcceptor load_weights(const ExperimentConfig& c,
                                const Alphabet& expected) {
  RnnAcceptor net =
      RnnAcceptor::from_json(read_json_file(weights_path(c), "weights"));
  if (net.config().alphabet_size != expected.size())
    throw std::invalid_argument(
        "weights: alphabet size disagrees with the target language");
  return net;
}

inline std::vector<Word> training_words(const ExperimentConfig& c,
                                        const LanguageSpec& lang,
                                        std::uint64_t seed) {
  TrainSetConfig dc = c.data;
  dc.seed = mix_seed(seed, 0);
  Dataset ds = make_train_set(lang, dc);
  std::vector<Word> words;
  words.reserve(ds.samples.size());
  for (const auto& [w, label] : ds.samples) words.push_back(w);
  return words;
}

inline std::pair<std::optional<Word>, std::optional<Word>> starting_samples(
    const ExperimentConfig& c, const LanguageSpec& lang, const RnnAcceptor& net,
    std::uint64_t seed) {
  const ExtractSettings& ex = c.extract;
  if (ex.accepting_sample || ex.rejecting_sample) {
    std::pair<std::optional<Word>, std::optional<Word>> out;
    if (ex.accepting_sample) out.first = lang.alphabet.parse(*ex.accepting_sample);
    if (ex.rejecting_sample) out.second = lang.alphabet.parse(*ex.rejecting_sample);
    return out;
  }
  if (ex.samples == "none") return {};
  if (ex.samples != "train")
    throw std::invalid_argument("config: unknown starting-samples mode: " +
                                ex.samples);
  return choose_starting_samples(net, training_words(c, lang, seed));
}

inline json record_to_json(const EquivalenceRecord& r, const Alphabet& ab) {
  json j;
  j["hypothesis_size"] = r.hypothesis_size;
  j["verdict"] = r.verdict;
  j["counterexample"] =
      r.counterexample ? json(ab.format(*r.counterexample)) : json(nullptr);
  j["refinements"] = r.refinements;
  j["elapsed_ms"] = r.elapsed_ms;
  j["leaf_count"] = r.leaf_count;
  return j;
}

inline json records_to_json(const std::vector<EquivalenceRecord>& records,
                            const Alphabet& ab) {
  json arr = json::array();
  for (const EquivalenceRecord& r : records) arr.push_back(record_to_json(r, ab));
  return arr;
}

inline json agreement_rows_to_json(const std::vector<AgreementRow>& rows) {
  json arr = json::array();
  for (const AgreementRow& r : rows)
    arr.push_back({{"length", r.length}, {"agreement", r.agreement}});
  return arr;
}

inline void write_agreement_csv(const std::string& path,
                                const std::vector<AgreementRow>& rows) {
  std::ostringstream csv;
  csv << "length,agreement\n";
  for (const AgreementRow& r : rows)
    csv << r.length << "," << fixed6(r.agreement) << "\n";
  write_text_file(path, csv.str());
}

inline void write_coverage_csv(const std::string& path,
                               const std::vector<CoverageRow>& rows) {
  std::ostringstream csv;
  csv << "length,coverage,accuracy\n";
  for (const CoverageRow& r : rows) {
    csv << r.length << "," << fixed6(r.coverage) << ",";
    csv << (r.accuracy ? fixed6(*r.accuracy) : std::string("NA")) << "\n";
  }
  write_text_file(path, csv.str());
}

// Interval bounds for the quant baseline. Gate outputs live in [-1, 1] by
// construction; lstm cell lanes are unbounded, so their range is measured
// from random walks instead.
inline std::pair<std::vector<double>, std::vector<double>> quant_ranges(
    const RnnAcceptor& net, int n_symbols, std::uint64_t seed) {
  const int dims = static_cast<int>(net.initial_state().size());
  std::vector<double> lo(dims, -1.0), hi(dims, 1.0);
  if (net.config().cell == CellKind::lstm) {
    auto [mlo, mhi] = measure_state_range(net, n_symbols, 500, 25, seed);
    const int h = net.config().hidden;
    for (int layer = 0; layer < net.config().layers; ++layer)
      for (int d = 0; d < h; ++d) {
        const int idx = layer * 2 * h + h + d;  // cell half of the layer
        lo[idx] = mlo[idx];
        hi[idx] = mhi[idx];
      }
  }
  return {lo, hi};
}

}  // namespace detail

inline int cmd_train(const ExperimentConfig& c) {
  const std::uint64_t seed = detail::require_seed(c);
  LanguageSpec lang = detail::resolve_language(c);
  if (c.data.lengths.empty())
    throw std::invalid_argument("config: training needs at least one length");
  if (c.hidden < 1 || c.layers < 1)
    throw std::invalid_argument("config: network needs positive size");

  TrainSetConfig dc = c.data;
  dc.seed = mix_seed(seed, 0);
  Dataset ds = make_train_set(lang, dc);
  if (ds.samples.empty())
    throw std::invalid_argument("config: the training set came out empty");

  RnnConfig rc;
  rc.cell = c.cell;
  rc.alphabet_size = lang.alphabet.size();
  rc.hidden = c.hidden;
  rc.layers = c.layers;
  rc.seed = mix_seed(seed, 1);
  RnnAcceptor net(rc);

  TrainOptions to = c.train;
  to.seed = mix_seed(seed, 2);
  TrainReport rep = train_rnn(net, ds, to);

  std::filesystem::create_directories(c.out_dir);
  const std::string wfile = detail::out_path(c, "weights.json");
  detail::write_json_file(wfile, net.to_json());

  auto net_cls = membership_classifier([&net](const Word& w) { return net.accepts(w); });
  auto lang_cls = membership_classifier(lang.membership);
  std::vector<AgreementRow> dev = agreement(net_cls, lang_cls, lang.alphabet,
                                            c.eval.lengths, c.eval.per_length,
                                            mix_seed(seed, 6));

  json out;
  out["command"] = "train";
  out["seed"] = seed;
  out["config"] = config_to_json(c);
  out["language"] = lang.name;
  out["epochs"] = rep.epochs;
  out["loss"] = rep.loss;
  out["train_acc"] = rep.accuracy;
  out["dev_acc"] = detail::agreement_rows_to_json(dev);
  out["weights_file"] = wfile;
  detail::write_json_file(detail::out_path(c, "train_report.json"), out);

  return rep.accuracy == 1.0 ? 0 : 2;
}

inline int cmd_extract(const ExperimentConfig& c) {
  const std::uint64_t seed = detail::require_seed(c);
  LanguageSpec lang = detail::resolve_language(c);
  RnnAcceptor net = detail::load_weights(c, lang.alphabet);
  const Alphabet& ab = lang.alphabet;

  TeacherConfig tc;
  tc.initial_depth = c.extract.initial_depth;
  tc.query_seconds = c.extract.query_seconds;
  tc.total_seconds = c.extract.total_seconds;
  std::tie(tc.accepting_sample, tc.rejecting_sample) =
      detail::starting_samples(c, lang, net, seed);

  RnnTeacher<RnnAcceptor> teacher(net, tc);
  LstarResult res = lstar_extract(teacher, ab);

  std::filesystem::create_directories(c.out_dir);
  detail::write_json_file(detail::out_path(c, "dfa.json"), dfa_to_json(res.dfa));
  detail::write_text_file(detail::out_path(c, "dfa.dot"), to_dot(res.dfa));

  AuditReport au = audit(net, teacher.history(), teacher.refinement_events());

  json out;
  out["command"] = "extract";
  out["seed"] = seed;
  out["config"] = config_to_json(c);
  out["language"] = lang.name;
  out["converged"] = res.converged;
  out["n_states"] = res.dfa.n_states;
  out["membership_queries"] = teacher.membership_queries();
  out["equivalence_queries"] = res.equivalence_queries;
  out["leaf_count"] = teacher.partitioning().leaf_count();
  json cexs = json::array();
  for (const Word& w : res.counterexamples) cexs.push_back(ab.format(w));
  out["counterexamples"] = cexs;
  out["records"] = detail::records_to_json(teacher.history(), ab);
  out["audit"] = {{"ok", au.ok()}, {"violations", au.violations}};
  detail::write_json_file(detail::out_path(c, "extract_report.json"), out);

  return 0;
}

inline int cmd_baseline(const ExperimentConfig& c, const std::string& method) {
  if (method != "quant" && method != "kmeans" && method != "randsample")
    throw std::invalid_argument("unknown baseline method: " + method);
  const std::uint64_t seed = detail::require_seed(c);
  LanguageSpec lang = detail::resolve_language(c);
  RnnAcceptor net = detail::load_weights(c, lang.alphabet);
  const Alphabet& ab = lang.alphabet;
  std::filesystem::create_directories(c.out_dir);

  json out;
  out["command"] = "baseline";
  out["method"] = method;
  out["seed"] = seed;
  out["config"] = config_to_json(c);
  out["language"] = lang.name;

  std::optional<PartialDfa> pd;
  if (method == "quant" || method == "kmeans") {
    AbstractionLimits limits{c.baseline.max_states, c.baseline.max_seconds};
    if (method == "quant") {
      auto [lo, hi] = detail::quant_ranges(net, ab.size(), mix_seed(seed, 7));
      QuantPartitioning qp(c.baseline.q, std::move(lo), std::move(hi));
      pd = extract_abstraction(
          net, ab, [&qp](const RState& h) { return qp.map(h); }, limits);
    } else {
      std::vector<RState> pts =
          states_along(net, detail::training_words(c, lang, seed));
      if (static_cast<int>(pts.size()) < c.baseline.k)
        throw std::invalid_argument(
            "config: fewer observed states than clusters");
      KmeansPartitioning km =
          KmeansPartitioning::fit(pts, c.baseline.k, mix_seed(seed, 5));
      pd = extract_abstraction(
          net, ab, [&km](const RState& h) { return km.map(h); }, limits);
    }
    out["n_states"] = pd->n_states;
    out["complete"] = pd->complete;
  } else {
    SamplingOracleConfig sc;
    sc.per_length = c.baseline.per_length;
    sc.max_length = c.baseline.max_length;
    sc.seed = mix_seed(seed, 3);
    sc.query_seconds = c.extract.query_seconds;
    std::tie(sc.accepting_sample, sc.rejecting_sample) =
        detail::starting_samples(c, lang, net, seed);
    SamplingTeacher<RnnAcceptor> teacher(net, sc);
    LstarResult res = lstar_extract(teacher, ab);
    out["n_states"] = res.dfa.n_states;
    out["converged"] = res.converged;
    out["membership_queries"] = teacher.membership_queries();
    out["equivalence_queries"] = res.equivalence_queries;
    out["records"] = detail::records_to_json(teacher.history(), ab);
    pd = PartialDfa(ab, res.dfa.n_states, res.dfa.initial, res.dfa.accepting,
                    res.dfa.delta, true);
  }

  detail::write_json_file(detail::out_path(c, "baseline_dfa.json"),
                          partial_dfa_to_json(*pd));
  std::vector<CoverageRow> cov = coverage_accuracy(
      *pd, net, c.eval.lengths, c.eval.per_length, mix_seed(seed, 4));
  detail::write_coverage_csv(detail::out_path(c, "coverage.csv"), cov);
  json cov_j = json::array();
  for (const CoverageRow& r : cov) {
    json row = {{"length", r.length}, {"coverage", r.coverage}};
    row["accuracy"] = r.accuracy ? json(*r.accuracy) : json(nullptr);
    cov_j.push_back(row);
  }
  out["coverage"] = cov_j;
  detail::write_json_file(detail::out_path(c, "baseline_report.json"), out);

  return 0;
}

inline int cmd_eval(const ExperimentConfig& c) {
  const std::uint64_t seed = detail::require_seed(c);
  if (c.eval.dfa_file.empty())
    throw std::invalid_argument("config: eval needs a machine file");
  Dfa d = dfa_from_json(detail::read_json_file(c.eval.dfa_file, "eval dfa"));

  std::string target = c.eval.target;
  if (target == "auto")
    target = std::filesystem::exists(detail::weights_path(c)) ? "weights"
                                                              : "language";

  // Keep whichever side we compare against alive for the whole call.
  std::optional<RnnAcceptor> net;
  std::optional<LanguageSpec> lang;
  BulkClassifier other;
  std::string against;
  if (target == "weights") {
    net = detail::load_weights(c, d.alphabet);
    other = membership_classifier(
        [&n = *net](const Word& w) { return n.accepts(w); });
    against = detail::weights_path(c);
  } else if (target == "language") {
    lang = detail::resolve_language(c);
    if (!(lang->alphabet == d.alphabet))
      throw std::invalid_argument(
          "eval: the machine and the language disagree on alphabets");
    other = membership_classifier(lang->membership);
    against = lang->name;
  } else {
    throw std::invalid_argument("config: unknown eval target: " + target);
  }

  std::vector<AgreementRow> rows =
      agreement(dfa_classifier(d), other, d.alphabet, c.eval.lengths,
                c.eval.per_length, mix_seed(seed, 4));

  std::filesystem::create_directories(c.out_dir);
  detail::write_agreement_csv(detail::out_path(c, "eval.csv"), rows);
  json out;
  out["command"] = "eval";
  out["seed"] = seed;
  out["config"] = config_to_json(c);
  out["dfa_file"] = c.eval.dfa_file;
  out["against"] = against;
  out["rows"] = detail::agreement_rows_to_json(rows);
  detail::write_json_file(detail::out_path(c, "eval_report.json"), out);

  return 0;
}

// Runs a command body and maps what it throws onto the exit-code contract:
// bad input or configuration is 1, a broken internal promise is 3.
inline int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace rnn2dfa
