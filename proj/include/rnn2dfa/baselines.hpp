#pragma once
// Comparison extractors that fix the state-space abstraction up front
// instead of refining it on demand: interval quantization and k-means
// bucketing of network states, a breadth-first walk of the resulting bucket
// graph, a random-sampling equivalence oracle, and coverage scoring that
// says how much of the network a (possibly partial) machine explains.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "abstraction.hpp"
#include "teacher.hpp"

namespace rnn2dfa {

// Equal-width intervals per state dimension. A state's bucket is its tuple
// of interval indices; tuples get dense ids in first-seen order, one id per
// tuple, so distinct buckets never collide. Values outside the declared
// range count as the boundary interval.
class QuantPartitioning {
 public:
  QuantPartitioning(int q, std::vector<double> lo, std::vector<double> hi)
      : q_(q), lo_(std::move(lo)), hi_(std::move(hi)) {
    if (q_ < 2)
      throw std::invalid_argument("quant: need at least two intervals");
    if (lo_.empty() || lo_.size() != hi_.size())
      throw std::invalid_argument("quant: range bounds disagree on dimension");
    for (std::size_t d = 0; d < lo_.size(); ++d)
      if (!(lo_[d] < hi_[d]))
        throw std::invalid_argument("quant: empty value range");
  }

  QuantPartitioning(int q, int dims, double lo, double hi)
      : QuantPartitioning(q, std::vector<double>(std::max(dims, 0), lo),
                          std::vector<double>(std::max(dims, 0), hi)) {}

  int q() const { return q_; }
  int dims() const { return static_cast<int>(lo_.size()); }

  std::vector<int> interval_tuple(const RState& h) const {
    if (h.size() != lo_.size())
      throw std::invalid_argument("quant: state dimension mismatch");
    std::vector<int> t(h.size());
    for (std::size_t d = 0; d < h.size(); ++d) {
      double rel = (h[d] - lo_[d]) / (hi_[d] - lo_[d]);
      int idx = static_cast<int>(std::floor(rel * q_));
      t[d] = std::clamp(idx, 0, q_ - 1);
    }
    return t;
  }

  int map(const RState& h) {
    auto [it, fresh] =
        ids_.try_emplace(interval_tuple(h), static_cast<int>(ids_.size()));
    (void)fresh;
    return it->second;
  }

  int distinct_ids() const { return static_cast<int>(ids_.size()); }

 private:
  int q_;
  std::vector<double> lo_, hi_;
  std::map<std::vector<int>, int> ids_;
};

// Nearest-centroid bucketing, centroids either given outright or fitted
// with seeded Lloyd iterations. Distance ties go to the lowest index, an
// emptied cluster keeps its previous centroid, and fitting stops once
// assignments stop moving.
class KmeansPartitioning {
 public:
  explicit KmeansPartitioning(std::vector<RState> centroids)
      : centroids_(std::move(centroids)) {
    if (centroids_.empty())
      throw std::invalid_argument("kmeans: need at least one centroid");
    for (const auto& c : centroids_)
      if (c.size() != centroids_[0].size())
        throw std::invalid_argument("kmeans: centroid dimension mismatch");
  }

  static KmeansPartitioning fit(const std::vector<RState>& states, int k,
                                std::uint64_t seed, int max_iterations = 100) {
    if (k < 1)
      throw std::invalid_argument("kmeans: need at least one cluster");
    if (static_cast<std::size_t>(k) > states.size())
      throw std::invalid_argument("kmeans: more clusters than states");
    const std::size_t dims = states[0].size();
    for (const auto& s : states)
      if (s.size() != dims)
        throw std::invalid_argument("kmeans: state dimension mismatch");

    // Seeded start: k distinct positions drawn without replacement.
    std::mt19937_64 rng(seed);
    std::vector<int> order(states.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<RState> cent(k);
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(i, static_cast<int>(order.size()) - 1);
      std::swap(order[i], order[pick(rng)]);
      cent[i] = states[order[i]];
    }
    KmeansPartitioning km(std::move(cent));

    std::vector<int> assign(states.size(), -1);
    for (int iter = 0; iter < max_iterations; ++iter) {
      bool moved = false;
      for (std::size_t i = 0; i < states.size(); ++i) {
        int c = km.map(states[i]);
        if (c != assign[i]) {
          assign[i] = c;
          moved = true;
        }
      }
      if (!moved) break;  // stable: centroids already sit at their means
      std::vector<RState> sum(k, RState(dims, 0.0));
      std::vector<int> cnt(k, 0);
      for (std::size_t i = 0; i < states.size(); ++i) {
        ++cnt[assign[i]];
        for (std::size_t d = 0; d < dims; ++d)
          sum[assign[i]][d] += states[i][d];
      }
      for (int c = 0; c < k; ++c)
        if (cnt[c] > 0)
          for (std::size_t d = 0; d < dims; ++d)
            km.centroids_[c][d] = sum[c][d] / cnt[c];
      double obj = 0.0;
      for (std::size_t i = 0; i < states.size(); ++i)
        obj += dist2(states[i], km.centroids_[assign[i]]);
      km.objective_.push_back(obj);
    }
    return km;
  }

  int map(const RState& h) const {
    if (h.size() != centroids_[0].size())
      throw std::invalid_argument("kmeans: state dimension mismatch");
    int best = 0;
    double bd = dist2(h, centroids_[0]);
    for (int c = 1; c < static_cast<int>(centroids_.size()); ++c) {
      double d = dist2(h, centroids_[c]);
      if (d < bd) {
        bd = d;
        best = c;
      }
    }
    return best;
  }

  const std::vector<RState>& centroids() const { return centroids_; }
  const std::vector<double>& objective_history() const { return objective_; }

 private:
  static double dist2(const RState& a, const RState& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
      double diff = a[d] - b[d];
      s += diff * diff;
    }
    return s;
  }

  std::vector<RState> centroids_;
  std::vector<double> objective_;
};

// Network states reached after every prefix of every word (the empty prefix
// once, up front): the raw material for a clustering fit.
template <class Net>
std::vector<RState> states_along(const Net& net, const std::vector<Word>& words) {
  std::vector<RState> out;
  out.push_back(net.initial_state());
  for (const Word& w : words) {
    RState h = net.initial_state();
    for (Symbol a : w) {
      h = net.step(h, a);
      out.push_back(h);
    }
  }
  return out;
}

// A machine whose transition table may have holes: -1 marks an edge the
// extraction never explored. Classification of a word is three-valued —
// accept, reject, or "walked off the explored graph".
struct PartialDfa {
  Alphabet alphabet;
  int n_states = 0;
  int initial = 0;
  std::vector<bool> accepting;
  std::vector<std::vector<int>> delta;  // delta[state][symbol], -1 = unexplored
  bool complete = true;

  PartialDfa(Alphabet ab, int n, int init, std::vector<bool> acc,
             std::vector<std::vector<int>> d, bool comp)
      : alphabet(std::move(ab)),
        n_states(n),
        initial(init),
        accepting(std::move(acc)),
        delta(std::move(d)),
        complete(comp) {
    validate();
  }

  void validate() const {
    if (n_states < 1)
      throw std::invalid_argument("partial dfa: needs at least one state");
    if (initial < 0 || initial >= n_states)
      throw std::invalid_argument("partial dfa: initial state out of range");
    if (static_cast<int>(accepting.size()) != n_states)
      throw std::invalid_argument("partial dfa: accepting vector size mismatch");
    if (static_cast<int>(delta.size()) != n_states)
      throw std::invalid_argument("partial dfa: delta row count mismatch");
    for (const auto& row : delta) {
      if (static_cast<int>(row.size()) != alphabet.size())
        throw std::invalid_argument("partial dfa: delta row width mismatch");
      for (int t : row) {
        if (t < -1 || t >= n_states)
          throw std::invalid_argument("partial dfa: transition target out of range");
        if (t < 0 && complete)
          throw std::invalid_argument(
              "partial dfa: complete machine with an unexplored transition");
      }
    }
  }

  std::optional<bool> accepts(const Word& w) const {
    int q = initial;
    for (Symbol a : w) {
      if (a < 0 || a >= alphabet.size())
        throw std::out_of_range("partial dfa: symbol index out of range");
      q = delta[q][a];
      if (q < 0) return std::nullopt;
    }
    return accepting[q];
  }

  bool operator==(const PartialDfa& o) const {
    return alphabet == o.alphabet && n_states == o.n_states &&
           initial == o.initial && accepting == o.accepting &&
           delta == o.delta && complete == o.complete;
  }
};

inline json partial_dfa_to_json(const PartialDfa& d) {
  json j = json::object();
  j["alphabet"] = d.alphabet.symbols();
  j["n_states"] = d.n_states;
  j["initial"] = d.initial;
  std::vector<int> acc;
  for (int q = 0; q < d.n_states; ++q)
    if (d.accepting[q]) acc.push_back(q);
  j["accepting"] = acc;
  j["delta"] = d.delta;
  j["complete"] = d.complete;
  return j;
}

inline PartialDfa partial_dfa_from_json(const json& j) {
  try {
    auto syms = j.at("alphabet").get<std::vector<std::string>>();
    int n = j.at("n_states").get<int>();
    int init = j.at("initial").get<int>();
    auto accl = j.at("accepting").get<std::vector<int>>();
    auto delta = j.at("delta").get<std::vector<std::vector<int>>>();
    bool comp = j.at("complete").get<bool>();
    std::vector<bool> acc(n > 0 ? n : 0, false);
    for (int q : accl) {
      if (q < 0 || q >= n)
        throw std::invalid_argument("partial dfa json: accepting state out of range");
      acc[q] = true;
    }
    return PartialDfa(Alphabet(std::move(syms)), n, init, std::move(acc),
                      std::move(delta), comp);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("partial dfa json: ") + e.what());
  }
}

struct AbstractionLimits {
  int max_states = 0;        // 0 = no cap on discovered states
  double max_seconds = 0.0;  // 0 = no clock
};

// Breadth-first walk of the bucket graph: the first network state to reach
// a bucket fixes its label and its outgoing edges. Hitting the state cap
// stops new buckets from being created but keeps filling in edges between
// known ones; an expired clock stops the walk where it stands. Edges never
// explored stay -1, and partial results are legal output, not errors.
template <class Net, class MapFn>
PartialDfa extract_abstraction(const Net& net, const Alphabet& ab,
                               MapFn&& map_state,
                               const AbstractionLimits& limits = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<std::chrono::steady_clock::time_point> deadline;
  if (limits.max_seconds > 0)
    deadline = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(limits.max_seconds));

  std::map<int, int> bucket_state;  // map_state id -> dense state number
  std::vector<RState> rep;          // first network state seen per bucket
  std::vector<bool> accepting;
  std::vector<std::vector<int>> delta;
  std::deque<int> frontier;
  bool complete = true;

  auto discover = [&](const RState& h) -> int {
    int id = map_state(h);
    auto it = bucket_state.find(id);
    if (it != bucket_state.end()) return it->second;
    if (limits.max_states > 0 &&
        static_cast<int>(rep.size()) >= limits.max_states)
      return -1;
    int q = static_cast<int>(rep.size());
    bucket_state.emplace(id, q);
    rep.push_back(h);
    accepting.push_back(net.accepts_state(h));
    delta.emplace_back(ab.size(), -1);
    frontier.push_back(q);
    return q;
  };

  discover(net.initial_state());
  while (!frontier.empty()) {
    if (deadline && std::chrono::steady_clock::now() >= *deadline) {
      complete = false;
      break;
    }
    int q = frontier.front();
    frontier.pop_front();
    for (int a = 0; a < ab.size(); ++a) {
      int q2 = discover(net.step(rep[q], a));
      if (q2 < 0) complete = false;
      delta[q][a] = q2;
    }
  }
  return PartialDfa(ab, static_cast<int>(rep.size()), 0, std::move(accepting),
                    std::move(delta), complete);
}

// Per-dimension value range seen along seeded uniform random walks, padded
// so a dimension that never moves still yields a usable interval.
template <class Net>
std::pair<std::vector<double>, std::vector<double>> measure_state_range(
    const Net& net, int n_symbols, int n_walks, int walk_len,
    std::uint64_t seed, double pad = 1e-6) {
  if (n_symbols < 1)
    throw std::invalid_argument("state range: need at least one symbol");
  if (n_walks < 1 || walk_len < 0)
    throw std::invalid_argument("state range: bad walk shape");
  RState h0 = net.initial_state();
  std::vector<double> lo = h0, hi = h0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n_symbols - 1);
  for (int w = 0; w < n_walks; ++w) {
    RState h = h0;
    for (int t = 0; t < walk_len; ++t) {
      h = net.step(h, pick(rng));
      for (std::size_t d = 0; d < h.size(); ++d) {
        lo[d] = std::min(lo[d], h[d]);
        hi[d] = std::max(hi[d], h[d]);
      }
    }
  }
  for (std::size_t d = 0; d < lo.size(); ++d) {
    lo[d] -= pad;
    hi[d] += pad;
  }
  return {std::move(lo), std::move(hi)};
}

namespace detail {

// Every word of the length when there are at most `cap` of them (in symbol
// index order), otherwise `cap` uniform draws.
inline std::vector<Word> words_of_length(int len, int n_symbols, int cap,
                                         std::mt19937_64& rng) {
  std::vector<Word> out;
  if (std::pow(static_cast<double>(n_symbols), static_cast<double>(len)) <=
      static_cast<double>(cap)) {
    Word w(len, 0);
    if (len == 0) {
      out.push_back(w);
      return out;
    }
    while (true) {
      out.push_back(w);
      int i = len - 1;
      while (i >= 0 && w[i] == n_symbols - 1) {
        w[i] = 0;
        --i;
      }
      if (i < 0) break;
      ++w[i];
    }
  } else {
    std::uniform_int_distribution<int> pick(0, n_symbols - 1);
    out.reserve(cap);
    for (int n = 0; n < cap; ++n) {
      Word w(len);
      for (Symbol& a : w) a = pick(rng);
      out.push_back(std::move(w));
    }
  }
  return out;
}

}  // namespace detail

struct SamplingOracleConfig {
  int per_length = 1000;  // words tried per length (all of them when fewer exist)
  int max_length = 30;
  std::uint64_t seed = 0;
  // Optional words of known label, checked before any sampling.
  std::optional<Word> accepting_sample;
  std::optional<Word> rejecting_sample;
  double query_seconds = 0.0;  // 0 = no clock
};

// Hunt for a word the network and the hypothesis label differently: the
// starting samples first (shorter one wins when both disagree), then words
// of length 1, 2, ... until a disagreement turns up or the budget runs out.
// Whatever comes back genuinely disagrees; silence is only as strong as the
// sampling behind it.
template <class Net>
std::optional<Word> random_sampling_oracle(const Net& net, const Dfa& hyp,
                                           const SamplingOracleConfig& cfg,
                                           bool* timed_out = nullptr) {
  if (timed_out) *timed_out = false;
  std::optional<Word> best;
  for (const auto& s : {cfg.accepting_sample, cfg.rejecting_sample})
    if (s && net.accepts(*s) != hyp.accepts(*s))
      if (!best || shortlex_less(*s, *best)) best = *s;
  if (best) return best;

  const auto t0 = std::chrono::steady_clock::now();
  std::optional<std::chrono::steady_clock::time_point> deadline;
  if (cfg.query_seconds > 0)
    deadline = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(cfg.query_seconds));

  const int k = hyp.alphabet.size();
  std::mt19937_64 rng(cfg.seed);
  for (int len = 1; len <= cfg.max_length; ++len) {
    if (deadline && std::chrono::steady_clock::now() >= *deadline) {
      if (timed_out) *timed_out = true;
      return std::nullopt;
    }
    auto batch = detail::words_of_length(len, k, cfg.per_length, rng);
    auto net_says = net.accepts_batch(batch);
    for (std::size_t i = 0; i < batch.size(); ++i)
      if (net_says[i] != hyp.accepts(batch[i])) return batch[i];
  }
  return std::nullopt;
}

// Drop-in equivalence teacher backed by random sampling instead of state
// abstraction: same record keeping as the refining teacher, none of the
// refinement machinery. Every call draws fresh words, deterministically
// per (seed, call index).
template <class Net>
class SamplingTeacher : public Teacher {
 public:
  explicit SamplingTeacher(const Net& net, SamplingOracleConfig cfg = {})
      : net_(net), cfg_(std::move(cfg)) {
    if (cfg_.accepting_sample && !net_.accepts(*cfg_.accepting_sample))
      throw std::invalid_argument(
          "SamplingTeacher: the network rejects the accepting sample");
    if (cfg_.rejecting_sample && net_.accepts(*cfg_.rejecting_sample))
      throw std::invalid_argument(
          "SamplingTeacher: the network accepts the rejecting sample");
  }

  bool membership(const Word& w) override {
    ++membership_queries_;
    return net_.accepts(w);
  }

  std::optional<Word> equivalence(const Dfa& hyp) override {
    timed_out_ = false;
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&](std::string verdict, std::optional<Word> cex) {
      double ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
      history_.push_back({hyp, hyp.n_states, std::move(verdict), cex, 0, ms, 0});
      return cex;
    };

    std::optional<Word> sample;
    for (const auto& s : {cfg_.accepting_sample, cfg_.rejecting_sample})
      if (s && net_.accepts(*s) != hyp.accepts(*s))
        if (!sample || shortlex_less(*s, *sample)) sample = *s;
    if (sample) return finish("reject_sample", sample);

    SamplingOracleConfig cfg = cfg_;
    cfg.accepting_sample.reset();
    cfg.rejecting_sample.reset();
    cfg.seed = cfg_.seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(++calls_);
    bool hit_clock = false;
    auto cex = random_sampling_oracle(net_, hyp, cfg, &hit_clock);
    timed_out_ = hit_clock;
    if (cex) return finish("reject", cex);
    return finish(hit_clock ? "accept_timeout" : "accept", std::nullopt);
  }

  bool last_equivalence_timed_out() const override { return timed_out_; }

  const std::vector<EquivalenceRecord>& history() const { return history_; }
  long long membership_queries() const { return membership_queries_; }

 private:
  const Net& net_;
  SamplingOracleConfig cfg_;
  long long membership_queries_ = 0;
  long long calls_ = 0;
  bool timed_out_ = false;
  std::vector<EquivalenceRecord> history_;
};

struct CoverageRow {
  int length = 0;
  double coverage = 0.0;           // fraction of words with a fully defined path
  std::optional<double> accuracy;  // agreement with the network among covered words
};

// Score a machine against the network on sampled words: per length, which
// fraction stays on defined transitions, and how often the label matches
// where it does. Words that walk off the explored graph are counted
// uncovered, never guessed at; a length with nothing covered reports no
// accuracy at all. Lengths with at most n_per_length words are scored
// exhaustively.
template <class Net>
std::vector<CoverageRow> coverage_accuracy(const PartialDfa& pd, const Net& net,
                                           const std::vector<int>& lengths,
                                           int n_per_length,
                                           std::uint64_t seed) {
  if (n_per_length < 1)
    throw std::invalid_argument("coverage: need a positive sample count");
  const int k = pd.alphabet.size();
  std::mt19937_64 rng(seed);
  std::vector<CoverageRow> rows;
  for (int len : lengths) {
    if (len < 0) throw std::invalid_argument("coverage: negative length");
    auto batch = detail::words_of_length(len, k, n_per_length, rng);
    auto net_says = net.accepts_batch(batch);
    long long covered = 0, agree = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      auto lbl = pd.accepts(batch[i]);
      if (!lbl) continue;
      ++covered;
      if (*lbl == net_says[i]) ++agree;
    }
    CoverageRow row;
    row.length = len;
    row.coverage = static_cast<double>(covered) / static_cast<double>(batch.size());
    if (covered > 0)
      row.accuracy = static_cast<double>(agree) / static_cast<double>(covered);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rnn2dfa
