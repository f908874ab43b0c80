#include "doctest.h"
#include "softlex/embeddings.hpp"
#include "softlex/errors.hpp"
#include "softlex/rng.hpp"
#include "testutil.hpp"

using namespace softlex;

TEST_CASE("random init holds the vocabulary plus the three special rows") {
  Rng rng(7);
  std::vector<std::string> vocab;
  for (int i = 0; i < 10; ++i) vocab.push_back("tok" + std::to_string(i));
  EmbeddingTable table = EmbeddingTable::init_random(vocab, 8, rng);
  CHECK(table.size() == 13);
  CHECK(table.dim() == 8);
  CHECK(table.has(kUnkKey));
  CHECK(table.has(kNoneKey));
  CHECK(table.has(kEndKey));
  const double bound = std::sqrt(3.0 / 8.0);
  for (int r = 0; r < table.size(); ++r)
    for (int c = 0; c < table.dim(); ++c) {
      CHECK(table.matrix()(r, c) <= bound);
      CHECK(table.matrix()(r, c) >= -bound);
    }
}

TEST_CASE("random init is a pure function of the seed") {
  std::vector<std::string> vocab = {"a", "b", "c"};
  Rng r1(7), r2(7);
  EmbeddingTable t1 = EmbeddingTable::init_random(vocab, 5, r1);
  EmbeddingTable t2 = EmbeddingTable::init_random(vocab, 5, r2);
  CHECK(t1.matrix() == t2.matrix());
  Rng r3(8);
  EmbeddingTable t3 = EmbeddingTable::init_random(vocab, 5, r3);
  CHECK(t1.matrix() != t3.matrix());
}

TEST_CASE("lookups resolve known tokens and fall back to the unknown row") {
  Rng rng(3);
  EmbeddingTable table = EmbeddingTable::init_random({"alpha", "beta"}, 4, rng);
  const int alpha = table.row_of("alpha");
  const int beta = table.row_of("beta");
  const int unk = table.row_of(kUnkKey);
  CHECK(alpha != beta);
  CHECK(table.row_of("gamma") == unk);
  CHECK(table.row_of("alpha") == alpha);  // stable across calls
}

TEST_CASE("text load accepts the header and appends missing specials as zeros") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.path("vec.txt"),
                       "2 3\n"
                       "alpha 0.5 -0.25 1\n"
                       "beta 1e-2 2.5e-1 -3\n");
  EmbeddingTable table = EmbeddingTable::load_text(tmp.path("vec.txt"));
  CHECK(table.size() == 5);  // 2 tokens + 3 specials
  CHECK(table.dim() == 3);
  CHECK(table.matrix()(table.row_of("alpha"), 0) == 0.5);
  CHECK(table.matrix()(table.row_of("beta"), 2) == -3.0);
  for (const char* key : {kUnkKey, kNoneKey, kEndKey}) {
    const int r = table.row_of(key);
    for (int c = 0; c < 3; ++c) CHECK(table.matrix()(r, c) == 0.0);
  }
}

TEST_CASE("text load works without a header and keeps the first duplicate") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.path("vec.txt"),
                       "alpha 1 2\n"
                       "alpha 9 9\n"
                       "beta 3 4\n");
  EmbeddingTable table = EmbeddingTable::load_text(tmp.path("vec.txt"));
  CHECK(table.dim() == 2);
  CHECK(table.matrix()(table.row_of("alpha"), 0) == 1.0);
  CHECK(table.matrix()(table.row_of("alpha"), 1) == 2.0);
}

TEST_CASE("text load validates dimensions and numbers") {
  testutil::TempDir tmp;
  SUBCASE("expected dim mismatch") {
    testutil::write_file(tmp.path("vec.txt"), "alpha 1 2 3\n");
    CHECK_THROWS_AS(EmbeddingTable::load_text(tmp.path("vec.txt"), 5), DataError);
  }
  SUBCASE("ragged row") {
    testutil::write_file(tmp.path("vec.txt"), "alpha 1 2 3\nbeta 1 2\n");
    CHECK_THROWS_WITH_AS(EmbeddingTable::load_text(tmp.path("vec.txt")),
                         doctest::Contains("vec.txt:2"), DataError);
  }
  SUBCASE("non-numeric value") {
    testutil::write_file(tmp.path("vec.txt"), "alpha 1 x\n");
    CHECK_THROWS_AS(EmbeddingTable::load_text(tmp.path("vec.txt")), DataError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(EmbeddingTable::load_text(tmp.path("nope.txt")),
                         doctest::Contains("nope.txt"), DataError);
  }
}

TEST_CASE("save-load round trip is stable at nine significant digits") {
  testutil::TempDir tmp;
  Rng rng(91);
  EmbeddingTable table = EmbeddingTable::init_random({"a", "b", "中山"}, 6, rng);
  table.save_text(tmp.path("one.txt"));
  EmbeddingTable again = EmbeddingTable::load_text(tmp.path("one.txt"), 6);
  again.save_text(tmp.path("two.txt"));
  CHECK(testutil::read_file(tmp.path("one.txt")) == testutil::read_file(tmp.path("two.txt")));
  CHECK(again.size() == table.size());
  for (int r = 0; r < table.size(); ++r)
    for (int c = 0; c < table.dim(); ++c)
      CHECK(std::abs(again.matrix()(r, c) - table.matrix()(r, c)) <=
            1e-9 * std::max(1.0, std::abs(table.matrix()(r, c))));
}
