// Emits a self-consistent synthetic corpus: lexicon.txt, train/dev/test.conll
// and an unlabeled bench.txt, all under --out.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "softlex/data.hpp"
#include "softlex/errors.hpp"
#include "softlex/synth.hpp"
#include "softlex/unicode.hpp"

int main(int argc, char** argv) {
  CLI::App app{"synthetic corpus generator"};
  std::string out_dir = "synth";
  softlex::SynthConfig cfg;
  int bench_count = 600;
  int bench_min = 1, bench_max = 120;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", cfg.seed, "generator seed");
  app.add_option("--train", cfg.train_sentences, "training sentences");
  app.add_option("--dev", cfg.dev_sentences, "development sentences");
  app.add_option("--test", cfg.test_sentences, "test sentences");
  app.add_option("--entity-words", cfg.entity_words_per_type, "entity words per type");
  app.add_option("--min-len", cfg.min_len, "minimum sentence length");
  app.add_option("--max-len", cfg.max_len, "maximum sentence length");
  app.add_option("--bench-count", bench_count, "unlabeled bench sentences");
  app.add_option("--bench-min-len", bench_min, "bench minimum length");
  app.add_option("--bench-max-len", bench_max, "bench maximum length");
  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out_dir);
    softlex::SynthCorpus corpus = softlex::generate_corpus(cfg);

    std::ofstream lex(out_dir + "/lexicon.txt", std::ios::binary);
    for (const auto& w : corpus.lexicon_words) lex << w << '\n';
    if (!lex) throw softlex::DataError("cannot write " + out_dir + "/lexicon.txt");

    softlex::save_conll(out_dir + "/train.conll", corpus.train);
    softlex::save_conll(out_dir + "/dev.conll", corpus.dev);
    softlex::save_conll(out_dir + "/test.conll", corpus.test);

    auto bench = softlex::generate_bench_sentences(cfg, bench_count, bench_min, bench_max,
                                                   cfg.seed + 1);
    std::ofstream bench_out(out_dir + "/bench.txt", std::ios::binary);
    for (const auto& s : bench) bench_out << softlex::utf8_encode(s) << '\n';
    if (!bench_out) throw softlex::DataError("cannot write " + out_dir + "/bench.txt");

    std::cout << "lexicon words: " << corpus.lexicon_words.size() << '\n'
              << "train/dev/test sentences: " << corpus.train.size() << '/' << corpus.dev.size()
              << '/' << corpus.test.size() << '\n'
              << "bench sentences: " << bench.size() << '\n'
              << "written to " << out_dir << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
