#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "softlex/checkpoint.hpp"
#include "softlex/errors.hpp"
#include "softlex/infer.hpp"
#include "softlex/lexicon.hpp"
#include "softlex/model.hpp"
#include "softlex/rng.hpp"
#include "softlex/synth.hpp"

#include "testutil.hpp"

using namespace softlex;

namespace {

struct CkptFixture {
  SynthCorpus corpus;
  Lexicon lex;
  FreqTable freq;
  TaggerModel model;
};

CkptFixture make_fixture(Variant variant, bool use_bigram, uint64_t seed) {
  SynthConfig sc;
  sc.entity_words_per_type = 6;
  sc.single_char_distractors = 3;
  sc.substring_distractors = 4;
  sc.random_distractors = 4;
  sc.train_sentences = 8;
  sc.dev_sentences = 0;
  sc.test_sentences = 0;
  sc.min_len = 8;
  sc.max_len = 12;
  sc.seed = seed;

  CkptFixture f;
  f.corpus = generate_corpus(sc);
  f.lex = Lexicon::build(f.corpus.lexicon_words);
  std::vector<std::u32string> text;
  for (const auto& r : f.corpus.train) text.push_back(r.chars);
  f.freq = FreqTable::count(f.lex, text);

  ModelConfig cfg;
  cfg.variant = variant;
  cfg.use_bigram = use_bigram;
  cfg.char_dim = 9;
  cfg.bigram_dim = 7;
  cfg.word_dim = 8;
  cfg.hidden = 10;
  cfg.dropout = 0.4;
  cfg.pool.none_frequency = 2;
  Rng rng(seed + 1);
  f.model = TaggerModel::create(cfg, f.corpus.train,
                                variant == Variant::CharOnly ? nullptr : &f.lex, rng);
  return f;
}

void check_params_equal(const TaggerModel& a, const TaggerModel& b) {
  auto pa = a.parameters();
  auto pb = b.parameters();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i]->name == pb[i]->name);
    REQUIRE(pa[i]->value.rows() == pb[i]->value.rows());
    REQUIRE(pa[i]->value.cols() == pb[i]->value.cols());
    // element-wise ==, which also holds for the -inf transition walls
    CHECK((pa[i]->value.array() == pb[i]->value.array()).all());
  }
}

}  // namespace

TEST_CASE("checkpoint round trip preserves the model exactly") {
  const bool bigram = false;
  CkptFixture f = make_fixture(Variant::SoftLexicon, bigram, 91);
  testutil::TempDir tmp;
  const std::string path = tmp.path("model.ckpt");
  save_checkpoint(path, f.model, &f.lex, &f.freq);

  Checkpoint ckpt = load_checkpoint(path);

  const ModelConfig& got = ckpt.model.config();
  const ModelConfig& want = f.model.config();
  CHECK(got.variant == want.variant);
  CHECK(got.use_bigram == want.use_bigram);
  CHECK(got.char_dim == want.char_dim);
  CHECK(got.bigram_dim == want.bigram_dim);
  CHECK(got.word_dim == want.word_dim);
  CHECK(got.hidden == want.hidden);
  CHECK(got.dropout == want.dropout);
  CHECK(got.pool == want.pool);

  CHECK(ckpt.model.labels().tags() == f.model.labels().tags());
  CHECK(ckpt.model.char_keys() == f.model.char_keys());
  CHECK(ckpt.model.bigram_keys() == f.model.bigram_keys());
  CHECK(ckpt.model.word_keys() == f.model.word_keys());
  check_params_equal(f.model, ckpt.model);

  REQUIRE(ckpt.lexicon.has_value());
  CHECK(ckpt.lexicon->words() == f.lex.words());
  REQUIRE(ckpt.freq.size() == f.freq.size());
  for (int id = 0; id < f.freq.size(); ++id) CHECK(ckpt.freq.count_of(id) == f.freq.count_of(id));
  CHECK(ckpt.freq.total_sentences() == f.freq.total_sentences());

  SUBCASE("reloaded model reproduces predictions bit for bit") {
    for (size_t i = 0; i < 3; ++i) {
      const RawSentence& raw = f.corpus.train[i];
      EncodedSentence before = f.model.encode(raw, &f.lex, &f.freq, false);
      EncodedSentence after = ckpt.model.encode(raw, &*ckpt.lexicon, &ckpt.freq, false);
      CHECK(before.char_rows == after.char_rows);
      CHECK(before.pool_terms == after.pool_terms);
      Eigen::MatrixXd ea = f.model.emissions(before);
      Eigen::MatrixXd eb = ckpt.model.emissions(after);
      CHECK((ea.array() == eb.array()).all());
      CHECK(f.model.predict_one(before) == ckpt.model.predict_one(after));
    }
  }
}

TEST_CASE("checkpoint with bigram features round trips") {
  CkptFixture f = make_fixture(Variant::SoftLexicon, true, 101);
  testutil::TempDir tmp;
  const std::string path = tmp.path("bg.ckpt");
  save_checkpoint(path, f.model, &f.lex, &f.freq);
  Checkpoint ckpt = load_checkpoint(path);
  CHECK(ckpt.model.config().use_bigram);
  CHECK(ckpt.model.bigram_keys() == f.model.bigram_keys());
  check_params_equal(f.model, ckpt.model);

  const RawSentence& raw = f.corpus.train[0];
  EncodedSentence a = f.model.encode(raw, &f.lex, &f.freq, false);
  EncodedSentence b = ckpt.model.encode(raw, &*ckpt.lexicon, &ckpt.freq, false);
  CHECK(a.bigram_rows == b.bigram_rows);
  CHECK(f.model.predict_one(a) == ckpt.model.predict_one(b));
}

TEST_CASE("saving a loaded checkpoint reproduces both files byte for byte") {
  CkptFixture f = make_fixture(Variant::SoftLexicon, false, 111);
  testutil::TempDir tmp;
  const std::string a = tmp.path("a.ckpt");
  const std::string b = tmp.path("b.ckpt");
  save_checkpoint(a, f.model, &f.lex, &f.freq);

  Checkpoint ckpt = load_checkpoint(a);
  save_checkpoint(b, ckpt.model, &*ckpt.lexicon, &ckpt.freq);

  CHECK(testutil::read_file(a) == testutil::read_file(b));
  CHECK(testutil::read_file(a + ".json") == testutil::read_file(b + ".json"));
}

TEST_CASE("char-only models checkpoint without a lexicon") {
  CkptFixture f = make_fixture(Variant::CharOnly, false, 121);
  testutil::TempDir tmp;
  const std::string path = tmp.path("char.ckpt");
  save_checkpoint(path, f.model, nullptr, nullptr);

  Checkpoint ckpt = load_checkpoint(path);
  CHECK(!ckpt.lexicon.has_value());
  CHECK(ckpt.freq.size() == 0);
  check_params_equal(f.model, ckpt.model);

  const RawSentence& raw = f.corpus.train[0];
  EncodedSentence a = f.model.encode(raw, nullptr, nullptr, false);
  EncodedSentence b = ckpt.model.encode(raw, nullptr, nullptr, false);
  CHECK(f.model.predict_one(a) == ckpt.model.predict_one(b));
}

TEST_CASE("damaged checkpoints are rejected") {
  CkptFixture f = make_fixture(Variant::SoftLexicon, false, 131);
  testutil::TempDir tmp;
  const std::string path = tmp.path("m.ckpt");
  save_checkpoint(path, f.model, &f.lex, &f.freq);
  const std::string binary = testutil::read_file(path);
  const std::string sidecar = testutil::read_file(path + ".json");

  auto reset = [&] {
    testutil::write_file(path, binary);
    testutil::write_file(path + ".json", sidecar);
  };

  SUBCASE("missing binary") {
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("missing sidecar") {
    std::filesystem::remove(path + ".json");
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("wrong magic") {
    reset();
    std::string broken = binary;
    broken[0] = 'X';
    testutil::write_file(path, broken);
    try {
      load_checkpoint(path);
      FAIL("accepted a file with wrong magic");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("magic") != std::string::npos);
    }
  }
  SUBCASE("truncated binary") {
    reset();
    testutil::write_file(path, binary.substr(0, 100));
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("tampered section name") {
    reset();
    std::string broken = binary;
    // magic(8) + section count(4) + name length(4): first name byte is at 16
    broken[16] ^= 0x01;
    testutil::write_file(path, broken);
    try {
      load_checkpoint(path);
      FAIL("accepted a renamed section");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("emb_char") != std::string::npos);
    }
  }
  SUBCASE("tampered section shape") {
    reset();
    std::string broken = binary;
    broken[16 + 8] ^= 0x01;  // low byte of the first section's row count
    testutil::write_file(path, broken);
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("sidecar frequency list out of sync") {
    reset();
    nlohmann::json j = nlohmann::json::parse(sidecar);
    j["freq"].erase(0);
    testutil::write_file(path + ".json", j.dump(2) + "\n");
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("sidecar with foreign format tag") {
    reset();
    nlohmann::json j = nlohmann::json::parse(sidecar);
    j["format"] = "something-else";
    testutil::write_file(path + ".json", j.dump(2) + "\n");
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("sidecar missing a required key") {
    reset();
    nlohmann::json j = nlohmann::json::parse(sidecar);
    j.erase("labels");
    testutil::write_file(path + ".json", j.dump(2) + "\n");
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
}
