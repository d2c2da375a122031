#pragma once
// Teacher backed by a stateful network. Membership queries run the network
// directly. Equivalence queries explore the network's reachable state space
// in lockstep with the proposed automaton, bucketing continuous states
// through a Partitioning: two states in one bucket are presumed equivalent
// until the walk proves otherwise. A disproof either yields a word the two
// machines genuinely disagree on (a counterexample) or shows the bucketing
// itself was too coarse, in which case the partitioning is refined and the
// walk restarts.

#include <algorithm>
#include <chrono>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "abstraction.hpp"
#include "lstar.hpp"

namespace rnn2dfa {

// Shortest word (ties broken by symbol index) that one of the two states
// accepts and the other rejects, found breadth first on the pair graph.
// Equal or language-equivalent states are a contract breach: callers only
// ask about states their own bookkeeping says behave differently.
inline Word separating_suffix(const Dfa& a, int q1, int q2) {
  if (q1 < 0 || q1 >= a.n_states || q2 < 0 || q2 >= a.n_states)
    throw std::invalid_argument("separating_suffix: state out of range");
  if (q1 == q2)
    throw std::logic_error("separating_suffix: the states are identical");
  if (a.accepting[q1] != a.accepting[q2]) return {};
  const int k = a.alphabet.size();
  const long long n = a.n_states;
  auto pair_key = [&](int x, int y) { return x * n + y; };
  std::unordered_map<long long, std::pair<long long, Symbol>> parent;
  std::deque<long long> frontier;
  const long long start = pair_key(q1, q2);
  parent.emplace(start, std::make_pair(-1LL, Symbol{-1}));
  frontier.push_back(start);
  while (!frontier.empty()) {
    long long cur = frontier.front();
    frontier.pop_front();
    int x = static_cast<int>(cur / n), y = static_cast<int>(cur % n);
    for (Symbol sym = 0; sym < k; ++sym) {
      int x2 = a.delta[x][sym], y2 = a.delta[y][sym];
      if (x2 == y2) continue;  // merged pairs can never diverge again
      long long nxt = pair_key(x2, y2);
      if (!parent.emplace(nxt, std::make_pair(cur, sym)).second) continue;
      if (a.accepting[x2] != a.accepting[y2]) {
        Word w;
        for (long long at = nxt; at != start;) {
          const auto& pr = parent.at(at);
          w.push_back(pr.second);
          at = pr.first;
        }
        std::reverse(w.begin(), w.end());
        return w;
      }
      frontier.push_back(nxt);
    }
  }
  throw std::logic_error("separating_suffix: the states are equivalent");
}

struct Verdict {
  enum class Kind { accept, reject, restart };
  Kind kind;
  Word counterexample;  // meaningful for reject only
  bool timed_out = false;
};

// One partition refinement, with two words whose walks end in the states
// that were wrongly sharing a bucket. Their full-word labels differ on the
// network, which is what made the split necessary; kind records whether the
// split was the one-time multi-axis box cut ("interval"), a learned
// boundary ("svm"), or a box cut after the boundary failed to separate
// ("svm->interval").
struct RefinementEvent {
  Word witness_old;
  Word witness_new;
  std::string kind;
  int leaf_count_after = 0;
  bool separated = false;
};

struct ExploreOptions {
  int initial_depth = 10;
  // Shared across restarts: the very first refinement overall uses the
  // aggressive interval split, later ones the targeted boundary. Without
  // the flag each call treats its own refinement as the first.
  bool* first_refinement_done = nullptr;
  std::vector<RefinementEvent>* events = nullptr;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

// Breadth-first walk of the network's reachable states, mirrored step for
// step in the hypothesis. Returns reject with a word the network and the
// hypothesis classify differently, restart after refining the partitioning
// (in place) because two recorded states collided, or accept when the
// frontier empties with no disagreement. A deadline turns into a flagged
// accept: unlimited exploration can never finish on a continuous system.
template <class Net>
Verdict parallel_explore(const Net& net, const Dfa& hyp, Partitioning& p,
                         const ExploreOptions& opts = {}) {
  const int k = hyp.alphabet.size();
  auto key_of = [](const RState& v) {
    return std::string(reinterpret_cast<const char*>(v.data()),
                       v.size() * sizeof(double));
  };

  // Keyed by exact state bytes: paths that reached the state (shortest
  // first, breadth-first order), the state itself, which states visited
  // each bucket, and the hypothesis state each bucket stands for. The
  // association is write-once within an exploration — a divergent arrival
  // is a conflict, never an overwrite — so every path recorded into a
  // bucket walks to the bucket's one associated hypothesis state.
  std::unordered_map<std::string, std::vector<Word>> paths;
  std::unordered_map<std::string, RState> states;
  std::map<int, std::vector<std::string>> visitors;
  std::map<int, int> association;
  std::deque<std::string> frontier;
  std::set<int> expanded;

  auto record = [&](int cls, const RState& h, int hyp_state, Word w) {
    std::string key = key_of(h);
    bool fresh = !states.count(key);
    paths[key].push_back(std::move(w));
    if (fresh) {
      states.emplace(key, h);
      visitors[cls].push_back(key);
      frontier.push_back(key);
    }
    association.emplace(cls, hyp_state);
  };

  RState h0 = net.initial_state();
  record(p.map(h0), h0, hyp.initial, Word{});

  while (!frontier.empty()) {
    if (opts.deadline && std::chrono::steady_clock::now() >= *opts.deadline)
      return {Verdict::Kind::accept, {}, true};
    std::string key = std::move(frontier.front());
    frontier.pop_front();
    const RState& h = states.at(key);
    const int cls = p.map(h);
    const int qa = association.at(cls);
    if (net.accepts_state(h) != hyp.accepting[qa])
      return {Verdict::Kind::reject, paths.at(key).front(), false};
    if (!expanded.insert(cls).second) continue;
    for (Symbol a = 0; a < k; ++a) {
      RState h2 = net.step(h, a);
      const int cls2 = p.map(h2);
      const int qa2 = hyp.delta[qa][a];
      Word w2 = paths.at(key).front();
      w2.push_back(a);
      auto assoc = association.find(cls2);
      if (assoc != association.end() && assoc->second != qa2) {
        // The bucket already stands for a different hypothesis state. Either
        // some word into the bucket genuinely disagrees with the hypothesis,
        // or the bucket holds distinct network states and must be split.
        const int qa_old = assoc->second;
        Word s = separating_suffix(hyp, qa_old, qa2);
        std::vector<Word> cands;
        for (const std::string& vk : visitors.at(cls2))
          for (const Word& w : paths.at(vk)) {
            cands.push_back(w);
            cands.back().insert(cands.back().end(), s.begin(), s.end());
          }
        cands.push_back(w2);
        cands.back().insert(cands.back().end(), s.begin(), s.end());
        std::vector<bool> net_says = net.accepts_batch(cands);
        std::optional<Word> cex;
        for (std::size_t i = 0; i < cands.size(); ++i)
          if (net_says[i] != hyp.accepts(cands[i]) &&
              (!cex || shortlex_less(cands[i], *cex)))
            cex = cands[i];
        if (cex) return {Verdict::Kind::reject, std::move(*cex), false};

        // No disagreement: the collision is the partitioning's fault.
        const std::string conf_key = key_of(h2);
        std::vector<RState> cluster;
        for (const std::string& vk : visitors.at(cls2))
          if (vk != conf_key) cluster.push_back(states.at(vk));
        if (cluster.empty())
          throw std::logic_error(
              "parallel_explore: colliding state has no distinct neighbors");
        Word w_old;
        bool found = false;
        for (const std::string& vk : visitors.at(cls2)) {
          for (const Word& w : paths.at(vk))
            if (hyp.state_after(hyp.initial, w) == qa_old) {
              w_old = w;
              found = true;
              break;
            }
          if (found) break;
        }
        if (!found)
          throw std::logic_error(
              "parallel_explore: no recorded path behind the association");

        RefinementRequest req{h2, std::move(cluster)};
        const int depth =
            std::min(opts.initial_depth, static_cast<int>(h2.size()));
        RefinementOutcome out;
        std::string kind;
        if (!opts.first_refinement_done || !*opts.first_refinement_done) {
          out = refine_interval(p, req, depth);
          kind = "interval";
          if (opts.first_refinement_done) *opts.first_refinement_done = true;
        } else {
          out = refine_svm(p, req);
          kind = "svm";
          if (!out.separated) {
            out = refine_interval(p, req, depth);
            kind = "svm->interval";
          }
        }
        if (!out.separated)
          throw std::logic_error(
              "parallel_explore: refinement left the collision in one piece");
        p = std::move(out.p);
        if (opts.events) {
          w_old.insert(w_old.end(), s.begin(), s.end());
          w2.insert(w2.end(), s.begin(), s.end());
          opts.events->push_back(
              {std::move(w_old), std::move(w2), std::move(kind),
               p.leaf_count(), out.separated});
        }
        return {Verdict::Kind::restart, {}, false};
      }
      record(cls2, std::move(h2), qa2, std::move(w2));
    }
  }
  return {Verdict::Kind::accept, {}, false};
}

struct TeacherConfig {
  int initial_depth = 10;
  double query_seconds = 0.0;  // per equivalence call; 0 = unlimited
  double total_seconds = 0.0;  // across the teacher's lifetime; 0 = unlimited
  // Optional words of known label, checked before any exploration: a
  // hypothesis contradicting one is rejected immediately.
  std::optional<Word> accepting_sample;
  std::optional<Word> rejecting_sample;
};

struct EquivalenceRecord {
  Dfa hypothesis;
  int hypothesis_size;
  std::string verdict;  // accept | accept_timeout | reject | reject_sample
  std::optional<Word> counterexample;
  int refinements;
  double elapsed_ms;
  int leaf_count;
};

// The Teacher seen by the learner. The partitioning persists across
// equivalence queries: refinements earned answering one hypothesis carry
// over to the next.
template <class Net>
class RnnTeacher : public Teacher {
 public:
  explicit RnnTeacher(const Net& net, TeacherConfig cfg = {})
      : net_(net),
        cfg_(std::move(cfg)),
        born_(std::chrono::steady_clock::now()) {
    if (cfg_.accepting_sample && !net_.accepts(*cfg_.accepting_sample))
      throw std::invalid_argument(
          "RnnTeacher: the network rejects the accepting sample");
    if (cfg_.rejecting_sample && net_.accepts(*cfg_.rejecting_sample))
      throw std::invalid_argument(
          "RnnTeacher: the network accepts the rejecting sample");
  }

  bool membership(const Word& w) override {
    auto it = cache_.find(w);
    if (it != cache_.end()) return it->second;
    bool label = net_.accepts(w);
    cache_.emplace(w, label);
    ++distinct_queries_;
    return label;
  }

  std::optional<Word> equivalence(const Dfa& hyp) override {
    timed_out_ = false;
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&](const char* verdict, std::optional<Word> cex,
                      int refinements) {
      double ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
      history_.push_back({hyp, hyp.n_states, verdict, cex, refinements, ms,
                          p_.leaf_count()});
      return cex;
    };

    std::optional<Word> bad;
    for (const auto& s : {cfg_.accepting_sample, cfg_.rejecting_sample})
      if (s && hyp.accepts(*s) != net_.accepts(*s) &&
          (!bad || shortlex_less(*s, *bad)))
        bad = *s;
    if (bad) return finish("reject_sample", std::move(*bad), 0);

    std::optional<std::chrono::steady_clock::time_point> deadline;
    auto tighten = [&](std::chrono::steady_clock::time_point from,
                       double seconds) {
      if (seconds <= 0) return;
      auto d = from + std::chrono::duration_cast<
                          std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(seconds));
      if (!deadline || d < *deadline) deadline = d;
    };
    tighten(t0, cfg_.query_seconds);
    tighten(born_, cfg_.total_seconds);

    int refinements = 0;
    for (;;) {
      ExploreOptions opts;
      opts.initial_depth = cfg_.initial_depth;
      opts.first_refinement_done = &first_refinement_done_;
      opts.events = &events_;
      opts.deadline = deadline;
      const std::size_t before = events_.size();
      Verdict v = parallel_explore(net_, hyp, p_, opts);
      refinements += static_cast<int>(events_.size() - before);
      if (v.kind == Verdict::Kind::restart) continue;
      if (v.kind == Verdict::Kind::reject)
        return finish("reject", std::move(v.counterexample), refinements);
      timed_out_ = v.timed_out;
      return finish(v.timed_out ? "accept_timeout" : "accept", std::nullopt,
                    refinements);
    }
  }

  bool last_equivalence_timed_out() const override { return timed_out_; }

  const Partitioning& partitioning() const { return p_; }
  const std::vector<EquivalenceRecord>& history() const { return history_; }
  const std::vector<RefinementEvent>& refinement_events() const {
    return events_;
  }
  long long membership_queries() const { return distinct_queries_; }

 private:
  const Net& net_;
  TeacherConfig cfg_;
  std::chrono::steady_clock::time_point born_;
  Partitioning p_;
  bool first_refinement_done_ = false;
  bool timed_out_ = false;
  std::map<Word, bool> cache_;
  long long distinct_queries_ = 0;
  std::vector<EquivalenceRecord> history_;
  std::vector<RefinementEvent> events_;
};

// Shortest candidate of each label (ties lexicographic), for seeding
// TeacherConfig. Either side may come back empty.
template <class Net>
std::pair<std::optional<Word>, std::optional<Word>> choose_starting_samples(
    const Net& net, const std::vector<Word>& candidates) {
  std::vector<bool> labels = net.accepts_batch(candidates);
  std::optional<Word> acc, rej;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::optional<Word>& slot = labels[i] ? acc : rej;
    if (!slot || shortlex_less(candidates[i], *slot)) slot = candidates[i];
  }
  return {std::move(acc), std::move(rej)};
}

struct AuditReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Replays the evidence an extraction left behind against the network it
// claims to describe. Every recorded counterexample must actually separate
// its hypothesis from the network, and the two witnesses of every
// refinement must carry different network labels (they were split because
// the network treats them differently).
template <class Net>
AuditReport audit(const Net& net, const std::vector<EquivalenceRecord>& records,
                  const std::vector<RefinementEvent>& events) {
  AuditReport rep;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const EquivalenceRecord& r = records[i];
    if (!r.counterexample) continue;
    if (r.hypothesis.accepts(*r.counterexample) ==
        net.accepts(*r.counterexample))
      rep.violations.push_back(
          "equivalence record " + std::to_string(i) +
          ": counterexample fails to separate hypothesis and network");
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (net.accepts(events[i].witness_old) ==
        net.accepts(events[i].witness_new))
      rep.violations.push_back("refinement " + std::to_string(i) +
                               ": witnesses share one network label");
  }
  return rep;
}

}  // namespace rnn2dfa
