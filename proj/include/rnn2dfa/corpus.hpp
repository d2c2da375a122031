#pragma once
// Benchmark languages and dataset construction: the seven classic two-letter
// grammars, balanced parentheses over a 28-symbol alphabet, and three
// regex-derived languages (staged digit counting, flat JSON-ish lists, email
// addresses), each with a membership oracle, a ground-truth automaton where
// the language is regular, and a tailored positive-sample generator where
// uniform sampling would practically never hit the language. Also home to
// the train-set builder and the sampled agreement metric.

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "automata.hpp"

namespace rnn2dfa {

struct LanguageSpec {
  std::string name;
  Alphabet alphabet;
  std::function<bool(const Word&)> membership;
  std::optional<Dfa> ground_truth;
  // Returns a positive sample of exactly the requested length, or nullopt if
  // the language has no word of that length. Null when uniform sampling is
  // good enough.
  std::function<std::optional<Word>(int, std::mt19937_64&)> positive_generator;
};

namespace detail {

// Maximal runs of identical symbols as (symbol, length) pairs.
inline std::vector<std::pair<Symbol, int>> runs_of(const Word& w) {
  std::vector<std::pair<Symbol, int>> runs;
  for (Symbol s : w) {
    if (!runs.empty() && runs.back().first == s)
      ++runs.back().second;
    else
      runs.emplace_back(s, 1);
  }
  return runs;
}

}  // namespace detail

inline LanguageSpec tomita(int which) {
  Alphabet ab = Alphabet::binary();
  LanguageSpec lang{"tomita" + std::to_string(which), ab, nullptr, std::nullopt,
                    nullptr};
  switch (which) {
    case 1:  // 1*
      lang.membership = [](const Word& w) {
        for (Symbol s : w)
          if (s != 1) return false;
        return true;
      };
      lang.ground_truth = Dfa(ab, 2, 0, {true, false}, {{1, 0}, {1, 1}});
      break;
    case 2:  // (10)*
      lang.membership = [](const Word& w) {
        if (w.size() % 2 != 0) return false;
        for (std::size_t i = 0; i < w.size(); i += 2)
          if (w[i] != 1 || w[i + 1] != 0) return false;
        return true;
      };
      lang.ground_truth =
          Dfa(ab, 3, 0, {true, false, false}, {{2, 1}, {0, 2}, {2, 2}});
      break;
    case 3:
      // Reject when some maximal odd-length run of 1s is followed, anywhere
      // later in the word, by a maximal odd-length run of 0s.
      lang.membership = [](const Word& w) {
        bool armed = false;
        for (const auto& [sym, len] : detail::runs_of(w)) {
          if (sym == 0 && len % 2 == 1 && armed) return false;
          if (sym == 1 && len % 2 == 1) armed = true;
        }
        return true;
      };
      lang.ground_truth = Dfa(ab, 5, 0, {true, true, false, true, false},
                              {{0, 1}, {2, 0}, {3, 4}, {2, 3}, {4, 4}});
      break;
    case 4:  // no 000 factor
      lang.membership = [](const Word& w) {
        int zeros = 0;
        for (Symbol s : w) {
          zeros = s == 0 ? zeros + 1 : 0;
          if (zeros == 3) return false;
        }
        return true;
      };
      lang.ground_truth = Dfa(ab, 4, 0, {true, true, true, false},
                              {{1, 0}, {2, 0}, {3, 0}, {3, 3}});
      break;
    case 5:  // even number of 0s and even number of 1s
      lang.membership = [](const Word& w) {
        int c0 = 0, c1 = 0;
        for (Symbol s : w) (s == 0 ? c0 : c1)++;
        return c0 % 2 == 0 && c1 % 2 == 0;
      };
      lang.ground_truth = Dfa(ab, 4, 0, {true, false, false, false},
                              {{1, 2}, {0, 3}, {3, 0}, {2, 1}});
      break;
    case 6:  // #0 - #1 divisible by 3
      lang.membership = [](const Word& w) {
        int d = 0;
        for (Symbol s : w) d += s == 0 ? 1 : -1;
        return ((d % 3) + 3) % 3 == 0;
      };
      lang.ground_truth =
          Dfa(ab, 3, 0, {true, false, false}, {{1, 2}, {2, 0}, {0, 1}});
      break;
    case 7:  // 0*1*0*1*
      lang.membership = [](const Word& w) {
        const Symbol seq[4] = {0, 1, 0, 1};
        int phase = 0;
        for (Symbol s : w) {
          while (phase < 4 && s != seq[phase]) ++phase;
          if (phase == 4) return false;
        }
        return true;
      };
      lang.ground_truth =
          Dfa(ab, 5, 0, {true, true, true, true, false},
              {{0, 1}, {2, 1}, {2, 3}, {4, 3}, {4, 4}});
      break;
    default:
      throw std::invalid_argument("tomita: grammar index must be 1..7");
  }
  return lang;
}

inline LanguageSpec bp() {
  Alphabet ab = Alphabet::from_chars("abcdefghijklmnopqrstuvwxyz()");
  const Symbol open = 26, close = 27;
  LanguageSpec lang{"bp", ab, nullptr, std::nullopt, nullptr};
  lang.membership = [open, close](const Word& w) {
    int depth = 0;
    for (Symbol s : w) {
      if (s == open) ++depth;
      if (s == close && --depth < 0) return false;
    }
    return depth == 0;
  };
  // Constrained walk: never opens beyond depth 11, never closes below zero,
  // and keeps enough room to close everything by the end.
  lang.positive_generator = [open, close](int len, std::mt19937_64& rng)
      -> std::optional<Word> {
    if (len < 0) return std::nullopt;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double p_paren = 0.08 + 0.37 * u01(rng);  // keep the letter weight positive
    Word w;
    w.reserve(len);
    int depth = 0;
    std::uniform_int_distribution<int> letter(0, 25);
    for (int i = 0; i < len; ++i) {
      int remaining = len - i;
      bool can_letter = remaining - 1 >= depth;
      bool can_open = depth < 11 && remaining - 1 >= depth + 1;
      bool can_close = depth > 0;
      double w_letter = can_letter ? 1.0 - 2.0 * p_paren : 0.0;
      double w_open = can_open ? p_paren : 0.0;
      double w_close = can_close ? p_paren : 0.0;
      double total = w_letter + w_open + w_close;
      if (total <= 0.0) {  // only letters fit in the space left
        w.push_back(letter(rng));
        continue;
      }
      double r = u01(rng) * total;
      if (r < w_open) {
        w.push_back(open);
        ++depth;
      } else if (r < w_open + w_close) {
        w.push_back(close);
        --depth;
      } else {
        w.push_back(letter(rng));
      }
    }
    return w;
  };
  return lang;
}

// The balanced-parentheses language cut off at nesting depth k: words that
// are balanced and never open deeper than k. Regular; k+2 states.
inline Dfa bp_depth_dfa(int k) {
  if (k < 0) throw std::invalid_argument("bp_depth_dfa: negative depth");
  Alphabet ab = Alphabet::from_chars("abcdefghijklmnopqrstuvwxyz()");
  const int dead = k + 1;
  std::vector<bool> acc(k + 2, false);
  acc[0] = true;
  std::vector<std::vector<int>> delta(k + 2, std::vector<int>(28));
  for (int d = 0; d <= k + 1; ++d)
    for (int a = 0; a < 28; ++a) {
      if (d == dead) {
        delta[d][a] = dead;
      } else if (a < 26) {
        delta[d][a] = d;
      } else if (a == 26) {  // open
        delta[d][a] = d < k ? d + 1 : dead;
      } else {  // close
        delta[d][a] = d > 0 ? d - 1 : dead;
      }
    }
  return Dfa(ab, k + 2, 0, std::move(acc), std::move(delta));
}

inline LanguageSpec counting() {
  Alphabet ab = Alphabet::from_chars("abcdefghijklmnopqrstuvwxyz12345");
  // States 0..5 are the number of stages completed, state 6 is dead. At
  // stage p, letters loop, digit p loops (p >= 1), digit p+1 advances,
  // anything else kills the match. Accepting: all five digits seen in order.
  std::vector<bool> acc(7, false);
  acc[5] = true;
  std::vector<std::vector<int>> delta(7, std::vector<int>(31, 6));
  for (int p = 0; p <= 5; ++p) {
    for (int a = 0; a < 26; ++a) delta[p][a] = p;
    if (p >= 1) delta[p][25 + p] = p;
    if (p < 5) delta[p][26 + p] = p + 1;
  }
  Dfa gt(ab, 7, 0, std::move(acc), std::move(delta));
  LanguageSpec lang{"counting", ab, nullptr, gt, nullptr};
  lang.membership = [gt](const Word& w) { return gt.accepts(w); };
  lang.positive_generator = [](int len, std::mt19937_64& rng)
      -> std::optional<Word> {
    if (len < 5) return std::nullopt;
    // Choose increasing positions for the five digits, fill the gaps with
    // letters or a repeat of the stage digit.
    std::vector<int> pos(len);
    for (int i = 0; i < len; ++i) pos[i] = i;
    for (int i = 0; i < 5; ++i) {
      std::uniform_int_distribution<int> pick(i, len - 1);
      std::swap(pos[i], pos[pick(rng)]);
    }
    std::vector<int> digit_at(len, -1);
    std::vector<int> chosen(pos.begin(), pos.begin() + 5);
    std::sort(chosen.begin(), chosen.end());
    for (int i = 0; i < 5; ++i) digit_at[chosen[i]] = i + 1;
    std::uniform_int_distribution<int> letter(0, 25);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Word w(len);
    int stage = 0;
    for (int i = 0; i < len; ++i) {
      if (digit_at[i] > 0) {
        stage = digit_at[i];
        w[i] = 25 + stage;
      } else if (stage >= 1 && u01(rng) < 0.15) {
        w[i] = 25 + stage;  // repeat the current stage digit
      } else {
        w[i] = letter(rng);
      }
    }
    return w;
  };
  return lang;
}

inline LanguageSpec json_lists() {
  Alphabet ab = Alphabet::from_chars("[]S0NTF,");
  // 0 start, 1 after '[', 2 after an item, 3 after a comma, 4 accept, 5 dead.
  std::vector<std::vector<int>> delta(6, std::vector<int>(8, 5));
  delta[0][0] = 1;
  delta[1][1] = 4;
  for (int item = 2; item <= 6; ++item) {
    delta[1][item] = 2;
    delta[3][item] = 2;
  }
  delta[2][7] = 3;
  delta[2][1] = 4;
  Dfa gt(ab, 6, 0, {false, false, false, false, true, false}, std::move(delta));
  LanguageSpec lang{"json_lists", ab, nullptr, gt, nullptr};
  lang.membership = [gt](const Word& w) { return gt.accepts(w); };
  lang.positive_generator = [](int len, std::mt19937_64& rng)
      -> std::optional<Word> {
    if (len == 2) return Word{0, 1};
    if (len < 3 || len % 2 == 0) return std::nullopt;
    int items = (len - 1) / 2;
    std::uniform_int_distribution<int> item(2, 6);
    Word w;
    w.reserve(len);
    w.push_back(0);
    for (int i = 0; i < items; ++i) {
      if (i > 0) w.push_back(7);
      w.push_back(item(rng));
    }
    w.push_back(1);
    return w;
  };
  return lang;
}

inline LanguageSpec emails() {
  Alphabet ab =
      Alphabet::from_chars("abcdefghijklmnopqrstuvwxyz0123456789@.");
  const int at = 36, dot = 37;
  auto is_letter = [](int a) { return a < 26; };
  auto is_alnum = [](int a) { return a < 36; };
  // 0 start, 1 local part, 2 domain start, 3 domain, 4 after the dot,
  // 5 "c", 6 "co", 7 accept, 8 "n", 9 "ne", 10 "co.", 11 "co.x", 12 dead.
  std::vector<std::vector<int>> delta(13, std::vector<int>(38, 12));
  for (int a = 0; a < 38; ++a) {
    if (is_letter(a)) delta[0][a] = 1;
    if (is_alnum(a)) {
      delta[1][a] = 1;
      delta[2][a] = 3;
      delta[3][a] = 3;
    }
    if (is_letter(a)) {
      delta[10][a] = 11;
      delta[11][a] = 7;
    }
  }
  delta[1][at] = 2;
  delta[3][dot] = 4;
  delta[4][2] = 5;    // 'c'
  delta[4][13] = 8;   // 'n'
  delta[5][14] = 6;   // 'o'
  delta[6][12] = 7;   // 'm' -> accept
  delta[6][dot] = 10;
  delta[8][4] = 9;    // 'e'
  delta[9][19] = 7;   // 't' -> accept
  std::vector<bool> acc(13, false);
  acc[7] = true;
  Dfa gt(ab, 13, 0, std::move(acc), std::move(delta));
  LanguageSpec lang{"emails", ab, nullptr, gt, nullptr};
  lang.membership = [gt](const Word& w) { return gt.accepts(w); };
  lang.positive_generator = [at, dot](int len, std::mt19937_64& rng)
      -> std::optional<Word> {
    std::vector<int> feasible;  // suffix lengths
    if (len >= 7) feasible.push_back(4);
    if (len >= 9) feasible.push_back(6);
    if (feasible.empty()) return std::nullopt;
    int suffix_len = feasible[rng() % feasible.size()];
    int rest = len - 1 - suffix_len;  // local + domain
    std::uniform_int_distribution<int> split(1, rest - 1);
    int local_len = split(rng);
    int domain_len = rest - local_len;
    std::uniform_int_distribution<int> letter(0, 25);
    std::uniform_int_distribution<int> alnum(0, 35);
    Word w;
    w.reserve(len);
    w.push_back(letter(rng));
    for (int i = 1; i < local_len; ++i) w.push_back(alnum(rng));
    w.push_back(at);
    for (int i = 0; i < domain_len; ++i) w.push_back(alnum(rng));
    w.push_back(dot);
    if (suffix_len == 4) {
      if (rng() % 2 == 0) {
        w.push_back(2); w.push_back(14); w.push_back(12);   // com
      } else {
        w.push_back(13); w.push_back(4); w.push_back(19);   // net
      }
    } else {
      w.push_back(2); w.push_back(14); w.push_back(dot);    // co.
      w.push_back(letter(rng));
      w.push_back(letter(rng));
    }
    return w;
  };
  return lang;
}

inline LanguageSpec language_by_name(const std::string& name) {
  if (name.rfind("tomita", 0) == 0 && name.size() == 7 && name[6] >= '1' &&
      name[6] <= '7')
    return tomita(name[6] - '0');
  if (name == "bp") return bp();
  if (name == "counting") return counting();
  if (name == "json_lists") return json_lists();
  if (name == "emails") return emails();
  throw std::invalid_argument("unknown language: " + name);
}

// 1-9 random edits, each uniformly an insertion, deletion, substitution or
// move of a single symbol.
inline Word mutate_word(const Word& w, int alphabet_size,
                        std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_edits(1, 9);
  std::uniform_int_distribution<int> op_pick(0, 3);
  std::uniform_int_distribution<int> sym(0, alphabet_size - 1);
  Word m = w;
  int n = n_edits(rng);
  for (int e = 0; e < n; ++e) {
    int op = op_pick(rng);
    if (op == 0) {
      std::uniform_int_distribution<int> pos(0, static_cast<int>(m.size()));
      m.insert(m.begin() + pos(rng), sym(rng));
    } else if (op == 1 && !m.empty()) {
      std::uniform_int_distribution<int> pos(0, static_cast<int>(m.size()) - 1);
      m.erase(m.begin() + pos(rng));
    } else if (op == 2 && !m.empty()) {
      std::uniform_int_distribution<int> pos(0, static_cast<int>(m.size()) - 1);
      m[pos(rng)] = sym(rng);
    } else if (op == 3 && m.size() > 1) {
      std::uniform_int_distribution<int> pos(0, static_cast<int>(m.size()) - 1);
      int i = pos(rng);
      Symbol s = m[i];
      m.erase(m.begin() + i);
      std::uniform_int_distribution<int> pos2(0, static_cast<int>(m.size()));
      m.insert(m.begin() + pos2(rng), s);
    }
  }
  return m;
}

struct Dataset {
  std::vector<std::pair<Word, bool>> samples;
};

struct TrainSetConfig {
  std::vector<int> lengths;
  int per_length = 100;          // total samples wanted per length
  std::uint64_t seed = 0;
  long long draw_budget = 100000;  // sampling attempts per length
};

// Per length: a 1:1 class balance when both classes are plentiful; when one
// class is scarce, all of it plus the other capped at 50x its count; when a
// class is empty, up to 50 samples of the other. Positives come from the
// tailored generator when the language has one, with negatives produced by
// mutating those positives; otherwise both classes come from uniform
// sampling.
inline Dataset make_train_set(const LanguageSpec& lang,
                              const TrainSetConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  const int k = lang.alphabet.size();
  const int half = std::max(1, cfg.per_length / 2);
  std::map<int, std::set<Word>> pos_by_len, neg_by_len;
  std::set<int> wanted(cfg.lengths.begin(), cfg.lengths.end());

  if (lang.positive_generator) {
    for (int len : cfg.lengths) {
      auto& bucket = pos_by_len[len];
      for (int tries = 0;
           tries < 40 * half && static_cast<int>(bucket.size()) < half;
           ++tries) {
        auto w = lang.positive_generator(len, rng);
        if (!w) break;
        if (lang.membership(*w)) bucket.insert(*w);
      }
    }
    std::vector<Word> all_pos;
    for (const auto& [len, bucket] : pos_by_len)
      all_pos.insert(all_pos.end(), bucket.begin(), bucket.end());
    auto satisfied = [&]() {
      for (int len : cfg.lengths) {
        std::size_t want =
            std::min<std::size_t>(pos_by_len[len].size(), half);
        if (want > 0 && neg_by_len[len].size() < want) return false;
      }
      return true;
    };
    if (!all_pos.empty()) {
      for (long long attempt = 0;
           attempt < cfg.draw_budget && !satisfied(); ++attempt) {
        const Word& base = all_pos[rng() % all_pos.size()];
        Word m = mutate_word(base, k, rng);
        if (lang.membership(m)) continue;
        int len = static_cast<int>(m.size());
        if (!wanted.count(len)) continue;
        std::size_t want = std::min<std::size_t>(pos_by_len[len].size(), half);
        if (neg_by_len[len].size() < want) neg_by_len[len].insert(std::move(m));
      }
    }
    // Lengths the generator cannot reach still get negative-only material.
    for (int len : cfg.lengths)
      if (pos_by_len[len].empty()) {
        auto& bucket = neg_by_len[len];
        for (int tries = 0; tries < 5000 && static_cast<int>(bucket.size()) < 50;
             ++tries) {
          Word w = random_word(len, k, rng);
          if (!lang.membership(w)) bucket.insert(std::move(w));
        }
      }
  } else {
    for (int len : cfg.lengths) {
      auto& pos = pos_by_len[len];
      auto& neg = neg_by_len[len];
      for (long long draw = 0; draw < cfg.draw_budget; ++draw) {
        if (static_cast<int>(pos.size()) >= half &&
            static_cast<int>(neg.size()) >= half)
          break;
        Word w = random_word(len, k, rng);
        (lang.membership(w) ? pos : neg).insert(std::move(w));
      }
    }
  }

  Dataset ds;
  for (int len : cfg.lengths) {
    const auto& pos = pos_by_len[len];
    const auto& neg = neg_by_len[len];
    std::size_t take_pos = 0, take_neg = 0;
    if (pos.empty()) {
      take_neg = std::min<std::size_t>(neg.size(), 50);
    } else if (neg.empty()) {
      take_pos = std::min<std::size_t>(pos.size(), 50);
    } else {
      std::size_t m = std::min({pos.size(), neg.size(),
                                static_cast<std::size_t>(half)});
      std::size_t cap = std::min<std::size_t>(
          50 * m, static_cast<std::size_t>(cfg.per_length) > m
                      ? cfg.per_length - m
                      : m);
      if (pos.size() <= neg.size()) {
        take_pos = m;
        take_neg = std::min(neg.size(), std::max(m, cap));
      } else {
        take_neg = m;
        take_pos = std::min(pos.size(), std::max(m, cap));
      }
      if (pos.size() >= static_cast<std::size_t>(half) &&
          neg.size() >= static_cast<std::size_t>(half)) {
        take_pos = take_neg = half;  // the plentiful case stays 1:1
      }
    }
    std::size_t i = 0;
    for (const Word& w : pos) {
      if (i++ >= take_pos) break;
      ds.samples.emplace_back(w, true);
    }
    i = 0;
    for (const Word& w : neg) {
      if (i++ >= take_neg) break;
      ds.samples.emplace_back(w, false);
    }
  }
  return ds;
}

inline void save_dataset(const std::string& path, const Dataset& ds,
                         const Alphabet& ab) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  for (const auto& [w, label] : ds.samples)
    out << (label ? 1 : 0) << '\t' << ab.format(w) << '\n';
}

inline Dataset load_dataset(const std::string& path, const Alphabet& ab) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset: " + path);
  Dataset ds;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("dataset line without tab: " + line);
    bool label = line.substr(0, tab) == "1";
    ds.samples.emplace_back(ab.parse(line.substr(tab + 1)), label);
  }
  return ds;
}

using BulkClassifier =
    std::function<std::vector<bool>(const std::vector<Word>&)>;

inline BulkClassifier dfa_classifier(const Dfa& d) {
  return [d](const std::vector<Word>& ws) {
    std::vector<bool> out;
    out.reserve(ws.size());
    for (const Word& w : ws) out.push_back(d.accepts(w));
    return out;
  };
}

inline BulkClassifier membership_classifier(
    std::function<bool(const Word&)> f) {
  return [f = std::move(f)](const std::vector<Word>& ws) {
    std::vector<bool> out;
    out.reserve(ws.size());
    for (const Word& w : ws) out.push_back(f(w));
    return out;
  };
}

struct AgreementRow {
  int length;
  double agreement;  // fraction of sampled words labelled identically
};

inline std::vector<AgreementRow> agreement(const BulkClassifier& a,
                                           const BulkClassifier& b,
                                           const Alphabet& ab,
                                           const std::vector<int>& lengths,
                                           int n_per_length,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<AgreementRow> rows;
  for (int len : lengths) {
    std::vector<Word> ws;
    ws.reserve(n_per_length);
    for (int i = 0; i < n_per_length; ++i)
      ws.push_back(random_word(len, ab.size(), rng));
    std::vector<bool> va = a(ws), vb = b(ws);
    int agree = 0;
    for (std::size_t i = 0; i < ws.size(); ++i)
      if (va[i] == vb[i]) ++agree;
    rows.push_back({len, static_cast<double>(agree) / n_per_length});
  }
  return rows;
}

}  // namespace rnn2dfa
