#include "doctest.h"
#include "softlex/data.hpp"
#include "softlex/errors.hpp"
#include "softlex/unicode.hpp"
#include "testutil.hpp"

using namespace softlex;

namespace {

std::vector<std::string> tags(std::initializer_list<const char*> list) {
  return std::vector<std::string>(list.begin(), list.end());
}

}  // namespace

TEST_CASE("two-sentence file loads with the right shapes") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.path("d.conll"),
                       "中\tB-LOC\n"
                       "山\tE-LOC\n"
                       "\n"
                       "人\tS-PER\n"
                       "走\tO\n"
                       "\n");
  auto data = load_conll(tmp.path("d.conll"));
  REQUIRE(data.size() == 2);
  CHECK(data[0].chars == utf8_decode("中山"));
  CHECK(data[0].tags == tags({"B-LOC", "E-LOC"}));
  CHECK(data[1].chars.size() == 2);
  CHECK(data[1].tags == tags({"S-PER", "O"}));
}

TEST_CASE("loader errors carry the offending line") {
  testutil::TempDir tmp;
  SUBCASE("tag outside the scheme") {
    testutil::write_file(tmp.path("d.conll"), "中\tB-LOC\n山\tX-PER\n\n");
    CHECK_THROWS_WITH_AS(load_conll(tmp.path("d.conll")), doctest::Contains("d.conll:2"),
                         DataError);
  }
  SUBCASE("missing tab") {
    testutil::write_file(tmp.path("d.conll"), "中 B-LOC\n\n");
    CHECK_THROWS_WITH_AS(load_conll(tmp.path("d.conll")), doctest::Contains("d.conll:1"),
                         DataError);
  }
  SUBCASE("more than one character") {
    testutil::write_file(tmp.path("d.conll"), "中山\tB-LOC\n\n");
    CHECK_THROWS_AS(load_conll(tmp.path("d.conll")), DataError);
  }
  SUBCASE("scheme-invalid sequence is rejected at its first line") {
    testutil::write_file(tmp.path("d.conll"), "首\tS-PER\n\n中\tM-LOC\n山\tE-LOC\n\n");
    CHECK_THROWS_WITH_AS(load_conll(tmp.path("d.conll")), doctest::Contains("d.conll:3"),
                         DataError);
  }
  SUBCASE("missing file names the path") {
    CHECK_THROWS_WITH_AS(load_conll(tmp.path("gone.conll")), doctest::Contains("gone.conll"),
                         DataError);
  }
}

TEST_CASE("extra blank lines do not create sentences") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.path("d.conll"), "\n\n中\tO\n\n\n\n山\tO\n\n\n");
  auto data = load_conll(tmp.path("d.conll"));
  CHECK(data.size() == 2);
}

TEST_CASE("write then read preserves the dataset exactly") {
  testutil::TempDir tmp;
  std::vector<RawSentence> data(2);
  data[0].chars = utf8_decode("北京在");
  data[0].tags = tags({"B-LOC", "E-LOC", "O"});
  data[1].chars = utf8_decode("王");
  data[1].tags = tags({"S-PER"});
  save_conll(tmp.path("d.conll"), data);
  auto loaded = load_conll(tmp.path("d.conll"));
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].chars == data[0].chars);
  CHECK(loaded[0].tags == data[0].tags);
  CHECK(loaded[1].chars == data[1].chars);
  CHECK(loaded[1].tags == data[1].tags);
  // And the serialization itself is stable.
  save_conll(tmp.path("d2.conll"), loaded);
  CHECK(testutil::read_file(tmp.path("d.conll")) == testutil::read_file(tmp.path("d2.conll")));
}

TEST_CASE("label ids depend only on the tag set") {
  std::vector<RawSentence> a(1), b(2);
  a[0].tags = tags({"O", "B-PER", "E-PER", "S-LOC"});
  b[0].tags = tags({"S-LOC"});
  b[1].tags = tags({"E-PER", "B-PER", "O", "O"});
  LabelVocab va = LabelVocab::build(a);
  LabelVocab vb = LabelVocab::build(b);
  REQUIRE(va.size() == 4);
  CHECK(va.tags() == vb.tags());
  CHECK(va.id_of("B-PER") == 0);  // lexicographic order
  CHECK(va.id_of("O") == 2);
  CHECK(va.tag(3) == "S-LOC");
  CHECK_THROWS_AS(va.id_of("B-ORG"), DataError);
}

TEST_CASE("entity decoding handles the documented shapes") {
  CHECK(decode_entities(tags({"B-LOC", "M-LOC", "M-LOC", "E-LOC"})) ==
        std::vector<Entity>{Entity{"LOC", 1, 4}});
  CHECK(decode_entities(tags({"S-PER", "O", "B-LOC", "E-LOC"})) ==
        std::vector<Entity>{{Entity{"PER", 1, 1}, Entity{"LOC", 3, 4}}});
  CHECK(decode_entities(tags({"O", "O"})).empty());
}

TEST_CASE("strict decoding drops malformed fragments") {
  CHECK(decode_entities(tags({"M-LOC", "E-LOC"})).empty());
  CHECK(decode_entities(tags({"B-LOC", "M-LOC"})).empty());          // unterminated
  CHECK(decode_entities(tags({"B-LOC", "E-PER"})).empty());          // type switch
  CHECK(decode_entities(tags({"B-LOC", "O", "E-LOC"})).empty());     // interrupted
  CHECK(decode_entities(tags({"E-LOC", "S-PER"})) ==
        std::vector<Entity>{Entity{"PER", 2, 2}});                   // rescans after junk
  // A breaking B starts a fresh scan at the breaking position.
  CHECK(decode_entities(tags({"B-LOC", "B-LOC", "E-LOC"})) ==
        std::vector<Entity>{Entity{"LOC", 2, 3}});
}

TEST_CASE("encode_tags inverts decode_entities on valid sequences") {
  std::vector<std::string> seq =
      tags({"S-PER", "B-LOC", "M-LOC", "E-LOC", "O", "B-ORG", "E-ORG"});
  CHECK(encode_tags(decode_entities(seq), static_cast<int>(seq.size())) == seq);
}

TEST_CASE("encode_tags validates its entities") {
  CHECK_THROWS_AS(encode_tags({Entity{"PER", 0, 1}}, 3), IntegrityError);
  CHECK_THROWS_AS(encode_tags({Entity{"PER", 2, 4}}, 3), IntegrityError);
  CHECK_THROWS_AS(encode_tags({Entity{"PER", 3, 2}}, 3), IntegrityError);
  CHECK_THROWS_AS(encode_tags({Entity{"PER", 1, 2}, Entity{"LOC", 2, 3}}, 3), IntegrityError);
}

TEST_CASE("scoring follows exact span and type matching") {
  SUBCASE("perfect prediction") {
    EvalResult ev;
    auto seq = tags({"B-LOC", "E-LOC", "S-PER"});
    ev.add(seq, seq);
    CHECK(ev.overall.precision() == 1.0);
    CHECK(ev.overall.recall() == 1.0);
    CHECK(ev.overall.f1() == 1.0);
  }
  SUBCASE("one spurious entity yields the textbook fractions") {
    EvalResult ev;
    ev.add(tags({"B-LOC", "E-LOC", "O", "O"}), tags({"B-LOC", "E-LOC", "O", "S-PER"}));
    CHECK(ev.overall.precision() == 0.5);
    CHECK(ev.overall.recall() == 1.0);
    CHECK(ev.overall.f1() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(ev.per_type.at("LOC").tp == 1);
    CHECK(ev.per_type.at("PER").fp == 1);
  }
  SUBCASE("all-O prediction scores zero by convention") {
    EvalResult ev;
    ev.add(tags({"B-LOC", "E-LOC"}), tags({"O", "O"}));
    CHECK(ev.overall.precision() == 0.0);
    CHECK(ev.overall.recall() == 0.0);
    CHECK(ev.overall.f1() == 0.0);
  }
  SUBCASE("type must match even when the span does") {
    EvalResult ev;
    ev.add(tags({"B-LOC", "E-LOC"}), tags({"B-ORG", "E-ORG"}));
    CHECK(ev.overall.tp == 0);
    CHECK(ev.overall.fp == 1);
    CHECK(ev.overall.fn == 1);
  }
  SUBCASE("duplicate correct predictions count once") {
    EvalResult ev;
    ev.add(tags({"S-PER", "O", "S-PER"}), tags({"S-PER", "O", "O"}));
    CHECK(ev.overall.tp == 1);
    CHECK(ev.overall.fn == 1);
  }
}
