#include <benchmark/benchmark.h>

#include <vector>

#include "softlex/encoder.hpp"
#include "softlex/infer.hpp"
#include "softlex/lexicon.hpp"
#include "softlex/model.hpp"
#include "softlex/net.hpp"
#include "softlex/rng.hpp"
#include "softlex/synth.hpp"

namespace {

using namespace softlex;

struct Fixture {
  SynthCorpus corpus;
  Lexicon lex;
  FreqTable freq;
  std::vector<std::u32string> sentences;

  Fixture() {
    SynthConfig cfg;
    cfg.train_sentences = 200;
    cfg.dev_sentences = 0;
    cfg.test_sentences = 0;
    corpus = generate_corpus(cfg);
    lex = Lexicon::build(corpus.lexicon_words);
    sentences = generate_bench_sentences(cfg, 64, 20, 60, 7);
    std::vector<std::u32string> stat;
    for (const auto& s : corpus.train) stat.push_back(s.chars);
    freq = FreqTable::count(lex, stat);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

TaggerModel make_model(Variant variant, int hidden) {
  ModelConfig cfg;
  cfg.variant = variant;
  cfg.char_dim = 50;
  cfg.word_dim = 50;
  cfg.hidden = hidden;
  Rng rng(11);
  return TaggerModel::create(cfg, fixture().corpus.train,
                             variant == Variant::CharOnly ? nullptr : &fixture().lex, rng);
}

void bm_lexicon_match(benchmark::State& state) {
  auto& f = fixture();
  size_t i = 0;
  for (auto _ : state) {
    auto spans = f.lex.match_spans(f.sentences[i++ % f.sentences.size()]);
    benchmark::DoNotOptimize(spans);
  }
}
BENCHMARK(bm_lexicon_match);

void bm_word_set_features(benchmark::State& state) {
  auto& f = fixture();
  PoolOptions opt;
  size_t i = 0;
  for (auto _ : state) {
    const auto& s = f.sentences[i++ % f.sentences.size()];
    auto sets = bmes_sets(f.lex.match_spans(s), static_cast<int>(s.size()));
    for (const auto& ws : sets) {
      auto w = pool_weights(ws, f.freq, opt);
      benchmark::DoNotOptimize(w);
    }
  }
}
BENCHMARK(bm_word_set_features);

void bm_lstm_step(benchmark::State& state) {
  const int h = static_cast<int>(state.range(0));
  const int in = 50;
  const int batch = 8;
  Rng rng(3);
  Eigen::MatrixXd W(net::kGateBlocks * h, in + h), b(net::kGateBlocks * h, 1);
  for (int r = 0; r < W.rows(); ++r)
    for (int c = 0; c < W.cols(); ++c) W(r, c) = rng.uniform() - 0.5;
  b.setZero();
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(in, batch);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(h, batch), C = Eigen::MatrixXd::Zero(h, batch);
  for (auto _ : state) {
    net::lstm_step<double>(W, b, X, H, C);
    benchmark::DoNotOptimize(H);
  }
}
BENCHMARK(bm_lstm_step)->Arg(200)->Arg(300);

void bm_viterbi(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int labels = 13;
  Rng rng(5);
  Eigen::MatrixXd E(n, labels);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < labels; ++c) E(r, c) = rng.uniform() * 4.0 - 2.0;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(labels + 2, labels + 2);
  for (auto _ : state) {
    auto path = net::viterbi<double>(E, T);
    benchmark::DoNotOptimize(path);
  }
}
BENCHMARK(bm_viterbi)->Arg(20)->Arg(60);

void bm_decode_end_to_end(benchmark::State& state) {
  const auto variant = static_cast<Variant>(state.range(0));
  auto& f = fixture();
  TaggerModel model = make_model(variant, 200);
  const Lexicon* lex = variant == Variant::CharOnly ? nullptr : &f.lex;
  std::vector<EncodedSentence> enc;
  for (const auto& s : f.sentences) {
    RawSentence raw;
    raw.chars = s;
    enc.push_back(model.encode(raw, lex, &f.freq, false));
  }
  std::vector<const EncodedSentence*> ptrs;
  for (const auto& e : enc) ptrs.push_back(&e);
  InferenceEngine<double> engine(model);
  for (auto _ : state) {
    auto paths = engine.decode(ptrs, 8, 1);
    benchmark::DoNotOptimize(paths);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(ptrs.size()));
}
BENCHMARK(bm_decode_end_to_end)
    ->Arg(static_cast<int>(Variant::CharOnly))
    ->Arg(static_cast<int>(Variant::SoftLexicon));

}  // namespace

BENCHMARK_MAIN();
