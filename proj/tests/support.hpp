#pragma once
// Shared test helpers: brute-force oracles kept deliberately independent of
// the library implementations they check, plus small construction utilities.

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <rnn2dfa/automata.hpp>

namespace testsupport {

using rnn2dfa::Alphabet;
using rnn2dfa::Dfa;
using rnn2dfa::Symbol;
using rnn2dfa::Word;

inline Word W(const Alphabet& ab, const std::string& text) { return ab.parse(text); }

// All words of exactly `len` symbols, in lexicographic symbol-index order.
inline void append_words_of_length(const Alphabet& ab, int len, std::vector<Word>& out) {
  Word w(len, 0);
  if (len == 0) {
    out.push_back(w);
    return;
  }
  while (true) {
    out.push_back(w);
    int i = len - 1;
    while (i >= 0 && w[i] == ab.size() - 1) {
      w[i] = 0;
      --i;
    }
    if (i < 0) break;
    ++w[i];
  }
}

// Shortlex enumeration of every word with at most `maxlen` symbols.
inline std::vector<Word> all_words_up_to(const Alphabet& ab, int maxlen) {
  std::vector<Word> out;
  for (int len = 0; len <= maxlen; ++len) append_words_of_length(ab, len, out);
  return out;
}

// Exhaustive shortlex scan for the first word the two automata label
// differently. Independent of the product-walk search in the library.
inline std::optional<Word> brute_disagreement(const Dfa& a, const Dfa& b, int maxlen) {
  for (const Word& w : all_words_up_to(a.alphabet, maxlen))
    if (a.accepts(w) != b.accepts(w)) return w;
  return std::nullopt;
}

// Number of states of the minimal automaton for d's language, computed with
// the classic pair-marking (table-filling) algorithm over reachable states.
inline int brute_minimal_size(const Dfa& d) {
  std::vector<int> reach;
  std::vector<int> idx(d.n_states, -1);
  reach.push_back(d.initial);
  idx[d.initial] = 0;
  for (std::size_t i = 0; i < reach.size(); ++i)
    for (int a = 0; a < d.alphabet.size(); ++a) {
      int t = d.delta[reach[i]][a];
      if (idx[t] < 0) {
        idx[t] = static_cast<int>(reach.size());
        reach.push_back(t);
      }
    }
  const int n = static_cast<int>(reach.size());
  std::vector<std::vector<bool>> marked(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (d.accepting[reach[i]] != d.accepting[reach[j]]) marked[i][j] = true;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (marked[i][j]) continue;
        for (int a = 0; a < d.alphabet.size(); ++a) {
          int ti = idx[d.delta[reach[i]][a]];
          int tj = idx[d.delta[reach[j]][a]];
          if (marked[ti][tj]) {
            marked[i][j] = true;
            changed = true;
            break;
          }
        }
      }
  }
  std::vector<int> cls(n, -1);
  int n_classes = 0;
  for (int i = 0; i < n; ++i) {
    if (cls[i] >= 0) continue;
    cls[i] = n_classes++;
    for (int j = i + 1; j < n; ++j)
      if (!marked[i][j]) cls[j] = cls[i];
  }
  return n_classes;
}

// A deterministic automaton for 1*: accepting start state looping on '1',
// any '0' falls into a rejecting sink.
inline Dfa ones_dfa() {
  Alphabet ab = Alphabet::binary();
  return Dfa(ab, 2, 0, {true, false}, {{1, 0}, {1, 1}});
}

// A deterministic automaton for (10)*.
inline Dfa one_zero_star_dfa() {
  Alphabet ab = Alphabet::binary();
  // state 0: accepting start; '1' -> 1, '0' -> 2 (sink); state 1: '0' -> 0,
  // '1' -> 2.
  return Dfa(ab, 3, 0, {true, false, false}, {{2, 1}, {0, 2}, {2, 2}});
}

}  // namespace testsupport
