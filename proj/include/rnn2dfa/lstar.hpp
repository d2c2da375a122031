#pragma once
// Active automaton learning from membership and equivalence queries, with
// counterexamples folded in as distinguishing suffixes (binary search over
// the counterexample rather than adding all its prefixes). The table keeps
// prefix rows pairwise distinct at all times, so hypotheses are minimal and
// no separate consistency pass is needed.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "automata.hpp"

namespace rnn2dfa {

struct Teacher {
  virtual ~Teacher() = default;
  virtual bool membership(const Word& w) = 0;
  // nullopt means "no disagreement found" — which is a proof for an exact
  // teacher and merely a shrug for a sampling or time-limited one.
  virtual std::optional<Word> equivalence(const Dfa& hypothesis) = 0;
  // True when the latest nullopt came from giving up rather than finishing.
  virtual bool last_equivalence_timed_out() const { return false; }
};

// Teacher with perfect knowledge of a reference automaton.
class ExactTeacher : public Teacher {
 public:
  explicit ExactTeacher(Dfa target) : target_(std::move(target)) {}
  bool membership(const Word& w) override {
    ++membership_calls_;
    return target_.accepts(w);
  }
  std::optional<Word> equivalence(const Dfa& h) override {
    ++equivalence_calls_;
    return shortest_disagreement(h, target_);
  }
  const Dfa& target() const { return target_; }
  long long membership_calls() const { return membership_calls_; }
  long long equivalence_calls() const { return equivalence_calls_; }

 private:
  Dfa target_;
  long long membership_calls_ = 0;
  long long equivalence_calls_ = 0;
};

class ObservationTable {
 public:
  ObservationTable(Teacher& teacher, Alphabet alphabet)
      : teacher_(teacher), ab_(std::move(alphabet)) {
    prefixes_.push_back({});
    suffixes_.push_back({});
  }

  bool membership(const Word& w) {
    auto it = cache_.find(w);
    if (it != cache_.end()) return it->second;
    bool v = teacher_.membership(w);
    cache_.emplace(w, v);
    ++queries_;
    return v;
  }

  std::vector<char> row(const Word& u) {
    std::vector<char> r(suffixes_.size());
    for (std::size_t j = 0; j < suffixes_.size(); ++j) {
      Word w = u;
      w.insert(w.end(), suffixes_[j].begin(), suffixes_[j].end());
      r[j] = membership(w) ? 1 : 0;
    }
    return r;
  }

  // Extend the prefix set until every one-symbol extension lands on a known
  // row. Returns true when prefixes were added.
  bool close() {
    bool grew = false;
    bool dirty = true;
    while (dirty) {
      dirty = false;
      std::set<std::vector<char>> known;
      for (const Word& s : prefixes_) known.insert(row(s));
      for (const Word& s : prefixes_) {
        for (Symbol a = 0; a < ab_.size(); ++a) {
          Word u = s;
          u.push_back(a);
          if (!known.count(row(u))) {
            prefixes_.push_back(std::move(u));
            grew = dirty = true;
            break;
          }
        }
        if (dirty) break;
      }
    }
    return grew;
  }

  // The automaton over distinct rows, states numbered in breadth-first
  // discovery order from the empty prefix. Requires a closed table.
  Dfa hypothesis() { return build(nullptr); }

  // Folds a word the current hypothesis misclassifies into the table,
  // repeating until the (re-closed) hypothesis classifies it correctly.
  // With a positive state budget, gives up once the prefix set outgrows it
  // and returns false.
  bool add_counterexample(const Word& cex, int max_states = 0) {
    for (;;) {
      close();
      if (max_states > 0 &&
          prefixes_.size() > static_cast<std::size_t>(max_states))
        return false;
      std::vector<const Word*> access;
      Dfa h = build(&access);
      bool truth = membership(cex);
      if (h.accepts(cex) == truth) return true;
      split_on(cex, h, access);
    }
  }

  const std::vector<Word>& prefixes() const { return prefixes_; }
  const std::vector<Word>& suffixes() const { return suffixes_; }
  long long membership_queries() const { return queries_; }

 private:
  // access, when given, receives one prefix per hypothesis state.
  Dfa build(std::vector<const Word*>* access) {
    std::map<std::vector<char>, const Word*> prefix_of_row;
    for (const Word& s : prefixes_) {
      auto r = row(s);
      if (!prefix_of_row.emplace(std::move(r), &s).second)
        throw std::logic_error("observation table has duplicate rows");
    }
    std::vector<const Word*> order = {prefix_of_row.at(row({}))};
    std::map<std::vector<char>, int> numbered;
    numbered.emplace(row({}), 0);
    std::vector<std::vector<int>> delta;
    std::vector<bool> accepting;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const Word& s = *order[i];
      accepting.push_back(membership(s));
      delta.emplace_back(ab_.size());
      for (Symbol a = 0; a < ab_.size(); ++a) {
        Word u = s;
        u.push_back(a);
        auto r = row(u);
        auto found = prefix_of_row.find(r);
        if (found == prefix_of_row.end())
          throw std::logic_error("observation table is not closed");
        auto [it, fresh] =
            numbered.emplace(std::move(r), static_cast<int>(order.size()));
        if (fresh) order.push_back(found->second);
        delta[i][a] = it->second;
      }
    }
    if (access) *access = order;
    return Dfa(ab_, static_cast<int>(order.size()), 0, std::move(accepting),
               std::move(delta));
  }

  // Binary search along the counterexample for two adjacent positions whose
  // access-word splices disagree; the tail past that point is a suffix that
  // tells two currently-merged rows apart.
  void split_on(const Word& cex, const Dfa& h,
                const std::vector<const Word*>& access) {
    auto splice = [&](std::size_t i) {
      int q = 0;
      for (std::size_t j = 0; j < i; ++j) q = h.step(q, cex[j]);
      Word w = *access[q];
      w.insert(w.end(), cex.begin() + i, cex.end());
      return membership(w);
    };
    bool head = splice(0);
    std::size_t lo = 0, hi = cex.size();
    if (head == splice(hi))
      throw std::logic_error("counterexample does not actually disagree");
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      (splice(mid) == head ? lo : hi) = mid;
    }
    Word tail(cex.begin() + lo + 1, cex.end());
    // Add the tail and every suffix of it, shortest first, so the suffix
    // set stays suffix-closed.
    std::size_t before = suffixes_.size();
    std::set<Word> have(suffixes_.begin(), suffixes_.end());
    for (std::size_t n = tail.size(); n-- > 0;) {
      Word e(tail.begin() + n, tail.end());
      if (have.insert(e).second) suffixes_.push_back(std::move(e));
    }
    if (suffixes_.size() == before)
      throw std::logic_error("distinguishing suffix was already known");
  }

  Teacher& teacher_;
  Alphabet ab_;
  std::vector<Word> prefixes_;
  std::vector<Word> suffixes_;
  std::unordered_map<Word, bool, WordHash> cache_;
  long long queries_ = 0;
};

struct LstarOptions {
  int max_states = 0;  // 0 means unbounded
};

struct LstarResult {
  Dfa dfa;
  bool converged = false;
  long long membership_queries = 0;
  long long equivalence_queries = 0;
  std::vector<Word> counterexamples;
};

inline LstarResult lstar_extract(Teacher& teacher, const Alphabet& alphabet,
                                 const LstarOptions& opts = {}) {
  ObservationTable table(teacher, alphabet);
  long long equivalence_queries = 0;
  std::vector<Word> counterexamples;
  auto finish = [&](Dfa dfa, bool converged) {
    return LstarResult{std::move(dfa), converged, table.membership_queries(),
                       equivalence_queries, std::move(counterexamples)};
  };
  for (;;) {
    table.close();
    Dfa h = table.hypothesis();
    if (opts.max_states > 0 && h.n_states > opts.max_states)
      return finish(std::move(h), false);
    ++equivalence_queries;
    auto cex = teacher.equivalence(h);
    if (!cex) return finish(std::move(h), !teacher.last_equivalence_timed_out());
    if (h.accepts(*cex) == table.membership(*cex))
      throw std::logic_error(
          "teacher returned a word the hypothesis already classifies "
          "correctly");
    counterexamples.push_back(*cex);
    if (!table.add_counterexample(*cex, opts.max_states))
      return finish(table.hypothesis(), false);
  }
}

}  // namespace rnn2dfa
