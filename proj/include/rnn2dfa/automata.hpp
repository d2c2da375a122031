#pragma once
// Alphabets, words and deterministic finite acceptors, plus the handful of
// DFA algorithms the rest of the toolkit leans on: minimization with a
// canonical breadth-first numbering, shortest-disagreement search over the
// product automaton, seeded random generation of minimal machines,
// serialization and DOT export.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace rnn2dfa {

using Symbol = int;
using Word = std::vector<Symbol>;
using json = nlohmann::ordered_json;

// Shortest-first, then lexicographic by symbol index.
inline bool shortlex_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

struct WordHash {
  std::size_t operator()(const Word& w) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (Symbol s : w) {
      h ^= static_cast<std::size_t>(s) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

class Alphabet {
 public:
  explicit Alphabet(std::vector<std::string> symbols)
      : symbols_(std::move(symbols)) {
    if (symbols_.empty()) throw std::invalid_argument("alphabet: no symbols");
    for (int i = 0; i < static_cast<int>(symbols_.size()); ++i) {
      const std::string& s = symbols_[i];
      if (s.empty()) throw std::invalid_argument("alphabet: empty symbol");
      if (!index_.emplace(s, i).second)
        throw std::invalid_argument("alphabet: duplicate symbol '" + s + "'");
    }
  }

  static Alphabet binary() { return Alphabet({"0", "1"}); }

  static Alphabet from_chars(std::string_view chars) {
    std::vector<std::string> syms;
    syms.reserve(chars.size());
    for (char c : chars) syms.emplace_back(1, c);
    return Alphabet(std::move(syms));
  }

  int size() const { return static_cast<int>(symbols_.size()); }
  const std::string& symbol(int i) const { return symbols_.at(i); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  std::optional<Symbol> index_of(const std::string& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // One character per symbol; only meaningful for single-character alphabets.
  Word parse(std::string_view text) const {
    Word w;
    w.reserve(text.size());
    for (char c : text) {
      auto it = index_.find(std::string(1, c));
      if (it == index_.end())
        throw std::invalid_argument(std::string("alphabet: unknown symbol '") +
                                    c + "'");
      w.push_back(it->second);
    }
    return w;
  }

  std::string format(const Word& w) const {
    std::string out;
    for (Symbol s : w) out += symbol(s);
    return out;
  }

  bool operator==(const Alphabet& o) const { return symbols_ == o.symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

struct Dfa {
  Alphabet alphabet;
  int n_states = 0;
  int initial = 0;
  std::vector<bool> accepting;
  std::vector<std::vector<int>> delta;  // delta[state][symbol]

  Dfa(Alphabet ab, int n, int init, std::vector<bool> acc,
      std::vector<std::vector<int>> d)
      : alphabet(std::move(ab)),
        n_states(n),
        initial(init),
        accepting(std::move(acc)),
        delta(std::move(d)) {
    validate();
  }

  void validate() const {
    if (n_states < 1) throw std::invalid_argument("dfa: needs at least one state");
    if (initial < 0 || initial >= n_states)
      throw std::invalid_argument("dfa: initial state out of range");
    if (static_cast<int>(accepting.size()) != n_states)
      throw std::invalid_argument("dfa: accepting vector size mismatch");
    if (static_cast<int>(delta.size()) != n_states)
      throw std::invalid_argument("dfa: delta row count mismatch");
    for (const auto& row : delta) {
      if (static_cast<int>(row.size()) != alphabet.size())
        throw std::invalid_argument("dfa: delta row width mismatch");
      for (int t : row)
        if (t < 0 || t >= n_states)
          throw std::invalid_argument("dfa: transition target out of range");
    }
  }

  int step(int q, Symbol a) const {
    if (a < 0 || a >= alphabet.size())
      throw std::out_of_range("dfa: symbol index out of range");
    return delta[q][a];
  }

  int state_after(int q, const Word& w) const {
    for (Symbol a : w) q = step(q, a);
    return q;
  }

  bool accepts_from(int q, const Word& w) const {
    return accepting[state_after(q, w)];
  }

  bool accepts(const Word& w) const { return accepts_from(initial, w); }

  bool operator==(const Dfa& o) const {
    return alphabet == o.alphabet && n_states == o.n_states &&
           initial == o.initial && accepting == o.accepting && delta == o.delta;
  }
};

// Language-preserving minimization. The result is canonical: states are
// numbered in breadth-first discovery order from the initial state,
// expanding symbols in index order, so two calls on language-equal reachable
// machines produce structurally identical automata.
inline Dfa minimize(const Dfa& d) {
  const int k = d.alphabet.size();

  // Restrict to reachable states.
  std::vector<int> order;
  std::vector<int> idx(d.n_states, -1);
  order.push_back(d.initial);
  idx[d.initial] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (int a = 0; a < k; ++a) {
      int t = d.delta[order[i]][a];
      if (idx[t] < 0) {
        idx[t] = static_cast<int>(order.size());
        order.push_back(t);
      }
    }
  const int n = static_cast<int>(order.size());
  std::vector<bool> acc(n);
  std::vector<std::vector<int>> delta(n, std::vector<int>(k));
  for (int q = 0; q < n; ++q) {
    acc[q] = d.accepting[order[q]];
    for (int a = 0; a < k; ++a) delta[q][a] = idx[d.delta[order[q]][a]];
  }

  // Moore refinement until the partition stabilizes.
  std::vector<int> cls(n);
  for (int q = 0; q < n; ++q) cls[q] = acc[q] ? 1 : 0;
  int n_cls = -1;
  while (true) {
    std::map<std::vector<int>, int> sig_id;
    std::vector<int> next(n);
    for (int q = 0; q < n; ++q) {
      std::vector<int> sig(k + 1);
      sig[0] = cls[q];
      for (int a = 0; a < k; ++a) sig[a + 1] = cls[delta[q][a]];
      auto it = sig_id.emplace(std::move(sig), static_cast<int>(sig_id.size()));
      next[q] = it.first->second;
    }
    bool stable = static_cast<int>(sig_id.size()) == n_cls;
    n_cls = static_cast<int>(sig_id.size());
    cls = std::move(next);
    if (stable) break;
  }

  // Quotient plus canonical renumbering.
  std::vector<int> rep(n_cls, -1);
  for (int q = 0; q < n; ++q)
    if (rep[cls[q]] < 0) rep[cls[q]] = q;
  std::vector<int> newid(n_cls, -1);
  std::vector<int> bfs;
  newid[cls[0]] = 0;
  bfs.push_back(cls[0]);
  for (std::size_t i = 0; i < bfs.size(); ++i)
    for (int a = 0; a < k; ++a) {
      int tc = cls[delta[rep[bfs[i]]][a]];
      if (newid[tc] < 0) {
        newid[tc] = static_cast<int>(bfs.size());
        bfs.push_back(tc);
      }
    }
  std::vector<bool> final_acc(n_cls);
  std::vector<std::vector<int>> final_delta(n_cls, std::vector<int>(k));
  for (int c = 0; c < n_cls; ++c) {
    final_acc[newid[c]] = acc[rep[c]];
    for (int a = 0; a < k; ++a)
      final_delta[newid[c]][a] = newid[cls[delta[rep[c]][a]]];
  }
  return Dfa(d.alphabet, n_cls, 0, std::move(final_acc), std::move(final_delta));
}

// Shortest word on which the two machines disagree, ties broken
// lexicographically by symbol index; empty result means language equality.
// The product automaton is explored lazily, breadth first.
inline std::optional<Word> shortest_disagreement(const Dfa& a, const Dfa& b) {
  if (!(a.alphabet == b.alphabet))
    throw std::invalid_argument("shortest_disagreement: alphabet mismatch");
  const int k = a.alphabet.size();
  auto key = [&](int qa, int qb) {
    return static_cast<long long>(qa) * b.n_states + qb;
  };
  struct Prev {
    long long parent;
    Symbol sym;
  };
  std::unordered_map<long long, Prev> seen;
  std::queue<long long> frontier;
  const long long start = key(a.initial, b.initial);
  seen.emplace(start, Prev{-1, -1});
  if (a.accepting[a.initial] != b.accepting[b.initial]) return Word{};
  frontier.push(start);
  auto build = [&](long long node) {
    Word w;
    while (true) {
      const Prev& p = seen.at(node);
      if (p.parent < 0) break;
      w.push_back(p.sym);
      node = p.parent;
    }
    std::reverse(w.begin(), w.end());
    return w;
  };
  while (!frontier.empty()) {
    long long cur = frontier.front();
    frontier.pop();
    int qa = static_cast<int>(cur / b.n_states);
    int qb = static_cast<int>(cur % b.n_states);
    for (int s = 0; s < k; ++s) {
      int ta = a.delta[qa][s];
      int tb = b.delta[qb][s];
      long long nxt = key(ta, tb);
      if (seen.count(nxt)) continue;
      seen.emplace(nxt, Prev{cur, s});
      if (a.accepting[ta] != b.accepting[tb]) return build(nxt);
      frontier.push(nxt);
    }
  }
  return std::nullopt;
}

// Rejection sampling: draw a uniform random transition table and accepting
// set, minimize, and keep the result only if no state collapsed. The
// returned machine is the canonical minimized form.
inline Dfa random_min_dfa(int n, const Alphabet& ab, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_min_dfa: n must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_state(0, n - 1);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<bool> acc(n);
    std::vector<std::vector<int>> delta(n, std::vector<int>(ab.size()));
    for (int q = 0; q < n; ++q) {
      acc[q] = coin(rng) == 1;
      for (int a = 0; a < ab.size(); ++a) delta[q][a] = pick_state(rng);
    }
    Dfa candidate(ab, n, 0, std::move(acc), std::move(delta));
    Dfa m = minimize(candidate);
    if (m.n_states == n) return m;
  }
  throw std::runtime_error(
      "random_min_dfa: no minimal machine of the requested size after 100000 "
      "attempts");
}

inline Word random_word(int length, int alphabet_size, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, alphabet_size - 1);
  Word w(length);
  for (Symbol& s : w) s = pick(rng);
  return w;
}

inline std::string to_dot(const Dfa& d) {
  std::ostringstream out;
  out << "digraph dfa {\n  rankdir=LR;\n  __start [shape=point];\n  __start -> "
      << d.initial << ";\n";
  for (int q = 0; q < d.n_states; ++q)
    out << "  " << q << " [shape="
        << (d.accepting[q] ? "doublecircle" : "circle") << "];\n";
  for (int q = 0; q < d.n_states; ++q) {
    std::map<int, std::string> by_target;
    for (int a = 0; a < d.alphabet.size(); ++a) {
      std::string& lbl = by_target[d.delta[q][a]];
      if (!lbl.empty()) lbl += ',';
      lbl += d.alphabet.symbol(a);
    }
    for (const auto& [t, lbl] : by_target)
      out << "  " << q << " -> " << t << " [label=\"" << lbl << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

inline json dfa_to_json(const Dfa& d) {
  json j = json::object();
  j["alphabet"] = d.alphabet.symbols();
  j["n_states"] = d.n_states;
  j["initial"] = d.initial;
  std::vector<int> acc;
  for (int q = 0; q < d.n_states; ++q)
    if (d.accepting[q]) acc.push_back(q);
  j["accepting"] = acc;
  j["delta"] = d.delta;
  return j;
}

inline Dfa dfa_from_json(const json& j) {
  try {
    auto syms = j.at("alphabet").get<std::vector<std::string>>();
    int n = j.at("n_states").get<int>();
    int init = j.at("initial").get<int>();
    auto accl = j.at("accepting").get<std::vector<int>>();
    auto delta = j.at("delta").get<std::vector<std::vector<int>>>();
    std::vector<bool> acc(n > 0 ? n : 0, false);
    for (int q : accl) {
      if (q < 0 || q >= n)
        throw std::invalid_argument("dfa json: accepting state out of range");
      acc[q] = true;
    }
    return Dfa(Alphabet(std::move(syms)), n, init, std::move(acc),
               std::move(delta));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("dfa json: ") + e.what());
  }
}

}  // namespace rnn2dfa
