#include <catch2/catch_amalgamated.hpp>

#include <regex>

#include <rnn2dfa/corpus.hpp>

#include "support.hpp"

using namespace rnn2dfa;
using namespace testsupport;

namespace {

bool re_match(const std::string& pattern, const std::string& text) {
  return std::regex_match(text, std::regex(pattern));
}

int paren_depth_max(const LanguageSpec& lang, const Word& w) {
  int open = *lang.alphabet.index_of("(");
  int close = *lang.alphabet.index_of(")");
  int d = 0, dmax = 0;
  for (Symbol s : w) {
    if (s == open) dmax = std::max(dmax, ++d);
    if (s == close) --d;
  }
  return dmax;
}

}  // namespace

TEST_CASE("tomita memberships on pinned words") {
  auto t = [](int i) { return tomita(i); };
  auto acc = [&](int i, const std::string& s) {
    return t(i).membership(t(i).alphabet.parse(s));
  };
  // grammar 1: 1*
  CHECK(acc(1, ""));
  CHECK(acc(1, "1111"));
  CHECK(!acc(1, "10"));
  // grammar 2: (10)*
  CHECK(acc(2, ""));
  CHECK(acc(2, "1010"));
  CHECK(!acc(2, "01"));
  CHECK(!acc(2, "1"));
  // grammar 3: no odd run of 1s may be followed, anywhere later, by an odd
  // run of 0s.
  CHECK(acc(3, ""));
  CHECK(acc(3, "100"));
  CHECK(acc(3, "110"));
  CHECK(acc(3, "1001"));
  CHECK(!acc(3, "10"));
  CHECK(!acc(3, "101"));
  CHECK(!acc(3, "10010"));
  CHECK(!acc(3, "010"));
  // grammar 4: no 000 factor
  CHECK(acc(4, "00100"));
  CHECK(!acc(4, "000"));
  CHECK(!acc(4, "110001"));
  // grammar 5: even number of 0s and of 1s
  CHECK(acc(5, "0011"));
  CHECK(acc(5, ""));
  CHECK(!acc(5, "001"));
  // grammar 6: difference #0 - #1 divisible by 3
  CHECK(acc(6, "01"));
  CHECK(acc(6, ""));
  CHECK(acc(6, "000"));
  CHECK(!acc(6, "0"));
  // grammar 7: 0*1*0*1*
  CHECK(acc(7, "0101"));
  CHECK(acc(7, "000111"));
  CHECK(!acc(7, "01010"));
}

TEST_CASE("tomita ground truths are minimal and sized as expected") {
  const int expected_sizes[] = {0, 2, 3, 5, 4, 4, 3, 5};
  for (int i = 1; i <= 7; ++i) {
    LanguageSpec lang = tomita(i);
    REQUIRE(lang.ground_truth.has_value());
    const Dfa& gt = *lang.ground_truth;
    CHECK(gt.n_states == expected_sizes[i]);
    CHECK(minimize(gt).n_states == gt.n_states);
  }
}

TEST_CASE("tomita oracles agree with their automata exhaustively") {
  for (int i = 1; i <= 7; ++i) {
    LanguageSpec lang = tomita(i);
    const Dfa& gt = *lang.ground_truth;
    for (const Word& w : all_words_up_to(lang.alphabet, 12))
      REQUIRE(lang.membership(w) == gt.accepts(w));
  }
}

TEST_CASE("balanced parentheses membership") {
  LanguageSpec lang = bp();
  CHECK(lang.alphabet.size() == 28);
  CHECK(!lang.ground_truth.has_value());
  auto acc = [&](const std::string& s) {
    return lang.membership(lang.alphabet.parse(s));
  };
  CHECK(acc(""));
  CHECK(acc("abc"));
  CHECK(acc("(ab(c))"));
  CHECK(acc("()()"));
  CHECK(!acc("))"));
  CHECK(!acc("(()"));
  CHECK(!acc(")("));
  CHECK(!acc("(a"));
}

TEST_CASE("balanced parentheses generator emits in-language words") {
  LanguageSpec lang = bp();
  std::mt19937_64 rng(11);
  int deep = 0;
  for (int len : {0, 1, 2, 7, 16, 30}) {
    for (int rep = 0; rep < 40; ++rep) {
      auto w = lang.positive_generator(len, rng);
      REQUIRE(w.has_value());
      CHECK(static_cast<int>(w->size()) == len);
      CHECK(lang.membership(*w));
      int d = paren_depth_max(lang, *w);
      CHECK(d <= 11);
      if (d >= 3) ++deep;
    }
  }
  CHECK(deep > 0);  // the generator must exercise real nesting
}

TEST_CASE("bounded-depth parentheses automaton") {
  for (int k : {0, 1, 2, 5}) {
    Dfa d = bp_depth_dfa(k);
    CHECK(minimize(d).n_states == d.n_states);
    CHECK(d.n_states == k + 2);
  }
  LanguageSpec lang = bp();
  Dfa d1 = bp_depth_dfa(1);
  CHECK(d1.accepts(lang.alphabet.parse("()")));
  CHECK(d1.accepts(lang.alphabet.parse("(a)b")));
  CHECK(!d1.accepts(lang.alphabet.parse("(())")));
  // Within its depth bound the machine matches the unbounded language.
  std::mt19937_64 rng(5);
  Dfa d3 = bp_depth_dfa(3);
  for (int rep = 0; rep < 3000; ++rep) {
    Word w = random_word(static_cast<int>(rng() % 12), lang.alphabet.size(), rng);
    bool in_depth = paren_depth_max(lang, w) <= 3;
    if (in_depth)
      CHECK(d3.accepts(w) == lang.membership(w));
    else
      CHECK(!d3.accepts(w));
  }
}

TEST_CASE("counting language membership and ground truth") {
  LanguageSpec lang = counting();
  CHECK(lang.alphabet.size() == 31);
  auto acc = [&](const std::string& s) {
    return lang.membership(lang.alphabet.parse(s));
  };
  CHECK(acc("12345"));
  CHECK(acc("a1b2c3d4e5"));
  CHECK(acc("ab1cd112345"));  // digits may repeat at their own stage
  CHECK(!acc("aca11"));
  CHECK(!acc("12354"));
  CHECK(!acc("2345"));
  CHECK(!acc("123451"));
  CHECK(!acc(""));

  const std::string pattern = "[a-z]*1[a-z1]*2[a-z2]*3[a-z3]*4[a-z4]*5[a-z5]*";
  for (const Word& w : all_words_up_to(lang.alphabet, 2))
    CHECK(lang.membership(w) == re_match(pattern, lang.alphabet.format(w)));
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 4000; ++rep) {
    Word w = random_word(static_cast<int>(rng() % 14), lang.alphabet.size(), rng);
    CHECK(lang.membership(w) == re_match(pattern, lang.alphabet.format(w)));
  }
  for (int len : {5, 9, 20}) {
    for (int rep = 0; rep < 50; ++rep) {
      auto w = lang.positive_generator(len, rng);
      REQUIRE(w.has_value());
      CHECK(static_cast<int>(w->size()) == len);
      CHECK(re_match(pattern, lang.alphabet.format(*w)));
    }
  }
  CHECK(!lang.positive_generator(4, rng).has_value());
}

TEST_CASE("json list language membership") {
  LanguageSpec lang = json_lists();
  CHECK(lang.alphabet.size() == 8);
  auto acc = [&](const std::string& s) {
    return lang.membership(lang.alphabet.parse(s));
  };
  CHECK(acc("[]"));
  CHECK(acc("[S]"));
  CHECK(acc("[S,0,N,T,F]"));
  CHECK(!acc("["));
  CHECK(!acc("[,]"));
  CHECK(!acc("[S,]"));
  CHECK(!acc("[]S"));
  CHECK(!acc(""));

  const std::string pattern = "(\\[\\])|(\\[[S0NTF](,[S0NTF])*\\])";
  for (const Word& w : all_words_up_to(lang.alphabet, 5))
    CHECK(lang.membership(w) == re_match(pattern, lang.alphabet.format(w)));
  std::mt19937_64 rng(23);
  for (int len : {2, 3, 5, 11}) {
    for (int rep = 0; rep < 40; ++rep) {
      auto w = lang.positive_generator(len, rng);
      REQUIRE(w.has_value());
      CHECK(static_cast<int>(w->size()) == len);
      CHECK(re_match(pattern, lang.alphabet.format(*w)));
    }
  }
  // No valid list has an inner length of 2.
  CHECK(!lang.positive_generator(4, rng).has_value());
}

TEST_CASE("email language membership") {
  LanguageSpec lang = emails();
  CHECK(lang.alphabet.size() == 38);
  auto acc = [&](const std::string& s) {
    return lang.membership(lang.alphabet.parse(s));
  };
  CHECK(acc("a@b.com"));
  CHECK(acc("ab0@cd9.net"));
  CHECK(acc("a@b.co.uk"));
  CHECK(acc("z9@99.com"));
  CHECK(!acc("25.net"));
  CHECK(!acc("a@b.org"));
  CHECK(!acc("a@b.comx"));
  CHECK(!acc("@b.com"));
  CHECK(!acc("a@.com"));
  CHECK(!acc("a@b.co"));
  CHECK(!acc("a@b.c.com"));
  CHECK(!acc("9a@b.com"));

  const std::string pattern =
      "[a-z][a-z0-9]*@[a-z0-9]+\\.(com|net|co\\.[a-z][a-z])";
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 4000; ++rep) {
    Word w = random_word(static_cast<int>(rng() % 12), lang.alphabet.size(), rng);
    CHECK(lang.membership(w) == re_match(pattern, lang.alphabet.format(w)));
  }
  for (int len : {7, 10, 19}) {
    for (int rep = 0; rep < 50; ++rep) {
      auto w = lang.positive_generator(len, rng);
      REQUIRE(w.has_value());
      CHECK(static_cast<int>(w->size()) == len);
      CHECK(re_match(pattern, lang.alphabet.format(*w)));
      // Mutants that leave the language must be labelled rejecting.
      Word m = mutate_word(*w, lang.alphabet.size(), rng);
      CHECK(lang.membership(m) == re_match(pattern, lang.alphabet.format(m)));
    }
  }
  CHECK(!lang.positive_generator(6, rng).has_value());
}

TEST_CASE("train set balancing: scarce positives fall back to capped ratio") {
  LanguageSpec lang = tomita(1);
  TrainSetConfig cfg;
  cfg.lengths = {5};
  cfg.per_length = 100;
  cfg.seed = 9;
  Dataset ds = make_train_set(lang, cfg);
  int pos = 0, neg = 0;
  for (const auto& [w, label] : ds.samples) {
    CHECK(static_cast<int>(w.size()) == 5);
    CHECK(label == lang.membership(w));
    if (label) {
      ++pos;
      CHECK(lang.alphabet.format(w) == "11111");
    } else {
      ++neg;
    }
  }
  CHECK(pos == 1);
  CHECK(neg >= 1);
  CHECK(neg <= 50);
}

TEST_CASE("train set balancing: plentiful classes come out 1:1") {
  LanguageSpec lang = tomita(5);
  TrainSetConfig cfg;
  cfg.lengths = {6, 8};
  cfg.per_length = 40;
  cfg.seed = 3;
  Dataset ds = make_train_set(lang, cfg);
  std::map<int, std::pair<int, int>> counts;
  std::set<Word> uniq;
  for (const auto& [w, label] : ds.samples) {
    CHECK(uniq.insert(w).second);  // no duplicates
    CHECK(label == lang.membership(w));
    auto& c = counts[static_cast<int>(w.size())];
    (label ? c.first : c.second)++;
  }
  for (int len : {6, 8}) {
    CHECK(counts[len].first == 20);
    CHECK(counts[len].second == 20);
  }
}

TEST_CASE("train sets are deterministic in the seed") {
  LanguageSpec lang = tomita(3);
  TrainSetConfig cfg;
  cfg.lengths = {0, 1, 2, 3, 4, 5, 6, 7};
  cfg.per_length = 30;
  cfg.seed = 77;
  Dataset a = make_train_set(lang, cfg);
  Dataset b = make_train_set(lang, cfg);
  CHECK(a.samples == b.samples);
  cfg.seed = 78;
  Dataset c = make_train_set(lang, cfg);
  CHECK(a.samples != c.samples);
}

TEST_CASE("train sets for generator languages mutate negatives") {
  LanguageSpec lang = emails();
  TrainSetConfig cfg;
  cfg.lengths = {7, 9, 12};
  cfg.per_length = 30;
  cfg.seed = 5;
  Dataset ds = make_train_set(lang, cfg);
  int pos = 0, neg = 0;
  for (const auto& [w, label] : ds.samples) {
    CHECK(label == lang.membership(w));
    (label ? pos : neg)++;
  }
  CHECK(pos > 10);
  CHECK(neg > 10);
}

TEST_CASE("dataset files round-trip") {
  LanguageSpec lang = tomita(2);
  TrainSetConfig cfg;
  cfg.lengths = {0, 2, 4, 6};
  cfg.per_length = 20;
  cfg.seed = 2;
  Dataset ds = make_train_set(lang, cfg);
  const std::string path = "/tmp/rnn2dfa_test_dataset.tsv";
  save_dataset(path, ds, lang.alphabet);
  Dataset back = load_dataset(path, lang.alphabet);
  CHECK(back.samples == ds.samples);
}

TEST_CASE("agreement between 1* and the empty language") {
  Dfa a = ones_dfa();
  Dfa none(a.alphabet, 1, 0, {false}, {{0, 0}});
  // Exact count at length 10: they differ only on the single word 1^10.
  int diff = 0;
  std::vector<Word> words;
  append_words_of_length(a.alphabet, 10, words);
  for (const Word& w : words)
    if (a.accepts(w) != none.accepts(w)) ++diff;
  CHECK(diff == 1);

  auto rows = agreement(dfa_classifier(a), dfa_classifier(none), a.alphabet,
                        {10}, 1000, 19);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].length == 10);
  CHECK(rows[0].agreement >= 0.995);  // expected 1 - 2^-10
  CHECK(rows[0].agreement <= 1.0);
}

TEST_CASE("language registry") {
  CHECK(language_by_name("tomita4").name == "tomita4");
  CHECK(language_by_name("bp").alphabet.size() == 28);
  CHECK(language_by_name("counting").alphabet.size() == 31);
  CHECK(language_by_name("json_lists").alphabet.size() == 8);
  CHECK(language_by_name("emails").alphabet.size() == 38);
  CHECK_THROWS_AS(language_by_name("nope"), std::invalid_argument);
}
