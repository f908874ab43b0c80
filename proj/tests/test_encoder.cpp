#include <cmath>
#include <sstream>

#include "doctest.h"
#include "softlex/encoder.hpp"
#include "softlex/errors.hpp"
#include "softlex/rng.hpp"
#include "softlex/unicode.hpp"
#include "testutil.hpp"

using namespace softlex;

namespace {

const std::vector<std::string> kStreetWords = {"中山", "山西", "中山西", "山西路", "中山西路"};

std::u32string u32(const char* s) { return utf8_decode(s); }

WordSets make_sets(std::vector<int> b, std::vector<int> m, std::vector<int> e,
                   std::vector<int> s) {
  WordSets ws;
  ws.of(Group::B) = b.empty() ? std::vector<int>{kNoneWord} : std::move(b);
  ws.of(Group::M) = m.empty() ? std::vector<int>{kNoneWord} : std::move(m);
  ws.of(Group::E) = e.empty() ? std::vector<int>{kNoneWord} : std::move(e);
  ws.of(Group::S) = s.empty() ? std::vector<int>{kNoneWord} : std::move(s);
  return ws;
}

double coeff_sum(const PoolWeights& pw) {
  double sum = 0.0;
  for (const auto& g : pw.groups)
    for (const auto& t : g) sum += t.coeff;
  return sum;
}

SoftwordFlags flags_of(bool b, bool m, bool e, bool s, bool o) {
  SoftwordFlags f;
  f.flag = {b, m, e, s, o};
  return f;
}

}  // namespace

TEST_CASE("word sets at the ambiguous street-name character") {
  Lexicon lex = Lexicon::build(kStreetWords);
  auto sets = bmes_sets(lex.match_spans(u32("中山西路")), 4);
  REQUIRE(sets.size() == 4);

  // Position 3 (the third character): nothing begins or single-matches here,
  // two words run through it, two words end here.
  const WordSets& xi = sets[2];
  CHECK(xi.empty_group(Group::B));
  CHECK(xi.empty_group(Group::S));
  std::vector<int> m_expect = {lex.id_of(u32("山西路")), lex.id_of(u32("中山西路"))};
  std::sort(m_expect.begin(), m_expect.end());
  CHECK(xi.of(Group::M) == m_expect);
  std::vector<int> e_expect = {lex.id_of(u32("中山西")), lex.id_of(u32("山西"))};
  std::sort(e_expect.begin(), e_expect.end());
  CHECK(xi.of(Group::E) == e_expect);

  // Position 1 begins three words, position 4 only ends them.
  std::vector<int> b1 = {lex.id_of(u32("中山")), lex.id_of(u32("中山西")), lex.id_of(u32("中山西路"))};
  std::sort(b1.begin(), b1.end());
  CHECK(sets[0].of(Group::B) == b1);
  CHECK(sets[0].empty_group(Group::M));
  CHECK(sets[0].empty_group(Group::E));
  std::vector<int> e4 = {lex.id_of(u32("山西路")), lex.id_of(u32("中山西路"))};
  std::sort(e4.begin(), e4.end());
  CHECK(sets[3].of(Group::E) == e4);
  CHECK(sets[3].empty_group(Group::B));
}

TEST_CASE("single-character words land in the S set") {
  Lexicon lex = Lexicon::build({"a", "ab"});
  auto sets = bmes_sets(lex.match_spans(U"ab"), 2);
  CHECK(sets[0].of(Group::S) == std::vector<int>{lex.id_of(U"a")});
  CHECK(sets[0].of(Group::B) == std::vector<int>{lex.id_of(U"ab")});
  CHECK(sets[1].of(Group::E) == std::vector<int>{lex.id_of(U"ab")});
  CHECK(sets[1].empty_group(Group::S));
}

TEST_CASE("empty groups carry exactly the filler") {
  auto sets = bmes_sets({}, 3);
  for (const auto& ws : sets)
    for (int g = 0; g < kNumGroups; ++g) {
      CHECK(ws.sets[static_cast<size_t>(g)] == std::vector<int>{kNoneWord});
      CHECK(ws.empty_group(static_cast<Group>(g)));
    }
}

TEST_CASE("restore_spans inverts bmes_sets on random sentences") {
  Rng rng(23);
  for (int round = 0; round < 50; ++round) {
    std::vector<std::string> entries;
    const int vocab = 2 + static_cast<int>(rng.uniform_int(0, 20));
    for (int i = 0; i < vocab; ++i) {
      std::u32string w;
      const int len = 1 + static_cast<int>(rng.uniform_int(0, 3));
      for (int k = 0; k < len; ++k)
        w.push_back(static_cast<char32_t>(U'a' + rng.uniform_int(0, 4)));
      entries.push_back(utf8_encode(w));
    }
    Lexicon lex = Lexicon::build(entries);
    std::u32string sent;
    const int n = 1 + static_cast<int>(rng.uniform_int(0, 24));
    for (int k = 0; k < n; ++k) sent.push_back(static_cast<char32_t>(U'a' + rng.uniform_int(0, 4)));
    auto spans = lex.match_spans(sent);
    CHECK(restore_spans(bmes_sets(spans, n), lex) == spans);
  }
}

TEST_CASE("restore_spans rejects sets that no span set produces") {
  Lexicon lex = Lexicon::build({"ab", "abc"});
  // A two-character word beginning at the last position cannot fit.
  std::vector<WordSets> tail(1, make_sets({lex.id_of(U"ab")}, {}, {}, {}));
  CHECK_THROWS_AS(restore_spans(tail, lex), IntegrityError);
  // B announces "ab" but the matching E entry is missing.
  std::vector<WordSets> torn = {make_sets({lex.id_of(U"ab")}, {}, {}, {}),
                                make_sets({}, {}, {}, {})};
  CHECK_THROWS_AS(restore_spans(torn, lex), IntegrityError);
  // A multi-character word listed as S.
  std::vector<WordSets> fat(1, make_sets({}, {}, {}, {lex.id_of(U"ab")}));
  CHECK_THROWS_AS(restore_spans(fat, lex), IntegrityError);
}

TEST_CASE("segmentation flags over the street name") {
  Lexicon lex = Lexicon::build(kStreetWords);
  auto flags = exsoftword_flags(lex.match_spans(u32("中山西路")), 4);
  REQUIRE(flags.size() == 4);
  CHECK(flags[0] == flags_of(true, false, false, false, false));   // {B}
  CHECK(flags[1] == flags_of(true, true, true, false, false));     // {B,M,E}
  CHECK(flags[2] == flags_of(false, true, true, false, false));    // {M,E}
  CHECK(flags[3] == flags_of(false, false, true, false, false));   // {E}
}

TEST_CASE("characters without any match carry the O flag") {
  Lexicon lex = Lexicon::build({"bc"});
  auto flags = exsoftword_flags(lex.match_spans(U"abcd"), 4);
  CHECK(flags[0] == flags_of(false, false, false, false, true));
  CHECK(flags[1] == flags_of(true, false, false, false, false));
  CHECK(flags[2] == flags_of(false, false, true, false, false));
  CHECK(flags[3] == flags_of(false, false, false, false, true));
}

TEST_CASE("two distinct span sets share one flag sequence") {
  // The collapsed encoding forgets which word produced each role, so these
  // different segmentations are indistinguishable after flattening.
  std::vector<Span> first = {{1, 2, 0}, {1, 3, 1}, {2, 4, 2}};
  std::vector<Span> second = {{1, 2, 0}, {2, 3, 1}, {1, 4, 2}};
  CHECK(first != second);
  CHECK(exsoftword_flags(first, 4) == exsoftword_flags(second, 4));
}

TEST_CASE("weighted pooling reproduces the two-word arithmetic") {
  // E holds two words with frequencies 3 and 1; the other groups hold the
  // filler at frequency 1 each. Z = 3+1+1+1+1 = 7. With one-dimensional
  // embeddings e(wa)=+1, e(wb)=-1 the pooled E value is (4/7)(3-1) = 8/7.
  FreqTable freq = FreqTable::from_counts({3, 1}, 1);
  WordSets ws = make_sets({}, {}, {0, 1}, {});
  PoolOptions opt;
  PoolWeights pw = pool_weights(ws, freq, opt);
  REQUIRE(pw.groups.size() == 4);
  const auto& e_terms = pw.groups[2];
  REQUIRE(e_terms.size() == 2);
  double ve = 0.0;
  for (const auto& t : e_terms) ve += t.coeff * (t.word_id == 0 ? 1.0 : -1.0);
  CHECK(std::abs(ve - 8.0 / 7.0) < 1e-12);
  CHECK(std::abs(coeff_sum(pw) - 4.0) < 1e-12);
}

TEST_CASE("weighted overall coefficients always sum to four") {
  Rng rng(31);
  for (int round = 0; round < 100; ++round) {
    const int vocab = 3 + static_cast<int>(rng.uniform_int(0, 12));
    std::vector<int64_t> counts;
    for (int i = 0; i < vocab; ++i) counts.push_back(rng.uniform_int(0, 40));
    FreqTable freq = FreqTable::from_counts(counts, 1);
    WordSets ws;
    for (int g = 0; g < kNumGroups; ++g) {
      std::vector<int>& s = ws.sets[static_cast<size_t>(g)];
      const int members = static_cast<int>(rng.uniform_int(0, 3));
      for (int k = 0; k < members; ++k) s.push_back(static_cast<int>(rng.uniform_int(0, vocab - 1)));
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
      if (s.empty()) s.push_back(kNoneWord);
    }
    PoolOptions opt;
    opt.none_frequency = 1 + rng.uniform_int(0, 4);
    opt.unseen_word_floor = 1 + rng.uniform_int(0, 2);
    CHECK(std::abs(coeff_sum(pool_weights(ws, freq, opt)) - 4.0) < 1e-10);
  }
}

TEST_CASE("mean pooling weights every member equally") {
  FreqTable freq = FreqTable::from_counts({9, 1, 5}, 1);
  WordSets ws = make_sets({0, 1}, {}, {2}, {});
  PoolOptions opt;
  opt.pooling = Pooling::Mean;
  PoolWeights pw = pool_weights(ws, freq, opt);
  REQUIRE(pw.groups.size() == 4);
  for (const auto& t : pw.groups[0]) CHECK(t.coeff == 0.5);  // |B| = 2
  CHECK(pw.groups[1].size() == 1);                           // the filler
  CHECK(pw.groups[1][0].coeff == 1.0);
  CHECK(pw.groups[2][0].coeff == 1.0);
}

TEST_CASE("per-group normalization makes each group sum to one") {
  FreqTable freq = FreqTable::from_counts({6, 2, 10}, 1);
  WordSets ws = make_sets({0, 1}, {}, {2}, {});
  PoolOptions opt;
  opt.normalization = Normalization::PerGroup;
  PoolWeights pw = pool_weights(ws, freq, opt);
  REQUIRE(pw.groups.size() == 4);
  for (const auto& g : pw.groups) {
    double sum = 0.0;
    for (const auto& t : g) sum += t.coeff;
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
  CHECK(std::abs(pw.groups[0][0].coeff - 6.0 / 8.0) < 1e-12);
  CHECK(std::abs(pw.groups[0][1].coeff - 2.0 / 8.0) < 1e-12);
}

TEST_CASE("dropping the M group removes it from output and mass") {
  FreqTable freq = FreqTable::from_counts({5, 3}, 1);
  WordSets ws = make_sets({}, {0}, {1}, {});
  PoolOptions opt;
  opt.drop_m_group = true;
  PoolWeights pw = pool_weights(ws, freq, opt);
  REQUIRE(pw.groups.size() == 3);
  CHECK(pooled_group_count(opt) == 3);
  // Z = 1 (B filler) + 3 (E word) + 1 (S filler) = 5; the M word's 5 is gone.
  CHECK(std::abs(pw.groups[1][0].coeff - 4.0 * 3.0 / 5.0) < 1e-12);
  CHECK(std::abs(coeff_sum(pw) - 4.0) < 1e-10);
}

TEST_CASE("merging groups concatenates the term lists unchanged") {
  FreqTable freq = FreqTable::from_counts({3, 1, 2}, 1);
  WordSets ws = make_sets({0}, {1}, {2}, {});
  PoolOptions plain, merged;
  merged.merge_groups = true;
  PoolWeights separate = pool_weights(ws, freq, plain);
  PoolWeights fused = pool_weights(ws, freq, merged);
  REQUIRE(fused.groups.size() == 1);
  CHECK(pooled_group_count(merged) == 1);
  std::vector<PoolTerm> flat;
  for (const auto& g : separate.groups) flat.insert(flat.end(), g.begin(), g.end());
  CHECK(fused.groups[0] == flat);
}

TEST_CASE("unseen words are floored, the filler uses its own frequency") {
  FreqTable freq = FreqTable::from_counts({0, 8}, 1);
  WordSets ws = make_sets({0}, {}, {1}, {});
  PoolOptions opt;
  opt.none_frequency = 3;
  opt.unseen_word_floor = 2;
  PoolWeights pw = pool_weights(ws, freq, opt);
  // Z = 2 (floored) + 3 (M filler) + 8 + 3 (S filler) = 16.
  CHECK(std::abs(pw.groups[0][0].coeff - 4.0 * 2.0 / 16.0) < 1e-12);
  CHECK(std::abs(pw.groups[2][0].coeff - 4.0 * 8.0 / 16.0) < 1e-12);
}

TEST_CASE("pooling rejects degenerate configurations") {
  FreqTable freq = FreqTable::from_counts({0}, 1);
  WordSets ws = make_sets({0}, {}, {}, {});
  PoolOptions opt;
  opt.none_frequency = 0;
  CHECK_THROWS_AS(pool_weights(ws, freq, opt), ConfigError);
  opt.none_frequency = 1;
  opt.unseen_word_floor = -1;
  CHECK_THROWS_AS(pool_weights(ws, freq, opt), ConfigError);
  WordSets bad = make_sets({7}, {}, {}, {});
  PoolOptions plain;
  CHECK_THROWS_AS(pool_weights(bad, freq, plain), IntegrityError);
}

TEST_CASE("feature dump prints the documented columns") {
  Lexicon lex = Lexicon::build(kStreetWords);
  std::u32string sent = u32("中山西路");
  auto spans = lex.match_spans(sent);
  std::ostringstream out;
  dump_features(out, sent, lex, bmes_sets(spans, 4), exsoftword_flags(spans, 4));
  const std::string text = out.str();
  CHECK(text.find("pos\tchar\tB\tM\tE\tS\tflags") == 0);
  CHECK(text.find("3\t西\t<none>\t山西路,中山西路\t山西,中山西\t<none>\t01100") !=
        std::string::npos);
  CHECK(text.find("1\t中\t") != std::string::npos);
  CHECK(text.find("\t10000\n") != std::string::npos);
}
