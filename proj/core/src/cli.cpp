#include "softlex/cli.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "softlex/bench.hpp"
#include "softlex/checkpoint.hpp"
#include "softlex/data.hpp"
#include "softlex/errors.hpp"
#include "softlex/infer.hpp"
#include "softlex/log.hpp"
#include "softlex/model.hpp"
#include "softlex/train.hpp"
#include "softlex/unicode.hpp"

namespace softlex::cli {

namespace {

struct Options {
  std::string lexicon;
  std::string emb_char, emb_bigram, emb_word;
  std::string train, dev, test;
  std::string config;
  std::string checkpoint;
  std::string input, output, log, bench_tsv;
  int batch_size = 1;
  uint64_t seed = 1;
  int threads = 1;
  int warmup = 100;
  int passes = 3;
  bool f32 = false;

  ModelConfig model;
  TrainConfig trainer;
};

bool flag_given(const CLI::App& cmd, const std::string& name) {
  const CLI::Option* opt = cmd.get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

// Precedence is defaults < config file < explicit flags: a config key whose
// flag appeared on the command line is type-checked but not applied.
void apply_config_file(Options& o, const CLI::App& cmd) {
  if (o.config.empty()) return;
  std::ifstream in(o.config, std::ios::binary);
  if (!in) throw DataError("config: cannot open " + o.config);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("config: bad JSON in " + o.config + ": " + e.what());
  }
  auto set_unless = [](bool overridden, auto& dst, auto v) {
    if (!overridden) dst = v;
  };
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "variant") o.model.variant = variant_from_name(value.get<std::string>());
      else if (key == "use_bigram") o.model.use_bigram = value.get<bool>();
      else if (key == "char_dim") o.model.char_dim = value.get<int>();
      else if (key == "bigram_dim") o.model.bigram_dim = value.get<int>();
      else if (key == "word_dim") o.model.word_dim = value.get<int>();
      else if (key == "hidden") set_unless(flag_given(cmd, "--hidden"), o.model.hidden, value.get<int>());
      else if (key == "dropout") set_unless(flag_given(cmd, "--dropout"), o.model.dropout, value.get<double>());
      else if (key == "pooling") o.model.pool.pooling = pooling_from_name(value.get<std::string>());
      else if (key == "normalization")
        o.model.pool.normalization = normalization_from_name(value.get<std::string>());
      else if (key == "drop_m_group") o.model.pool.drop_m_group = value.get<bool>();
      else if (key == "merge_groups") o.model.pool.merge_groups = value.get<bool>();
      else if (key == "none_frequency") o.model.pool.none_frequency = value.get<int64_t>();
      else if (key == "unseen_word_floor") o.model.pool.unseen_word_floor = value.get<int64_t>();
      else if (key == "epochs") set_unless(flag_given(cmd, "--epochs"), o.trainer.epochs, value.get<int>());
      else if (key == "batch_size") set_unless(flag_given(cmd, "--batch-size"), o.batch_size, value.get<int>());
      else if (key == "lr") set_unless(flag_given(cmd, "--lr"), o.trainer.lr, value.get<double>());
      else if (key == "beta1") o.trainer.beta1 = value.get<double>();
      else if (key == "beta2") o.trainer.beta2 = value.get<double>();
      else if (key == "eps") o.trainer.eps = value.get<double>();
      else if (key == "clip_norm") o.trainer.clip_norm = value.get<double>();
      else if (key == "patience") set_unless(flag_given(cmd, "--patience"), o.trainer.patience, value.get<int>());
      else if (key == "seed") set_unless(flag_given(cmd, "--seed"), o.seed, value.get<uint64_t>());
      else throw ConfigError("config: unknown key '" + key + "' in " + o.config);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("config: bad value in " + o.config + ": " + e.what());
  }
}

std::vector<std::u32string> read_plain_sentences(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("input: cannot open " + path);
  std::vector<std::u32string> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(utf8_decode(line, path + ":" + std::to_string(lineno)));
  }
  if (out.empty()) throw DataError("input: no sentences in " + path);
  return out;
}

std::unique_ptr<std::ofstream> open_output(const std::string& path) {
  if (path.empty()) return nullptr;
  auto f = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*f) throw DataError("output: cannot write " + path);
  return f;
}

std::vector<EncodedSentence> encode_all(const TaggerModel& model,
                                        const std::vector<RawSentence>& data, const Lexicon* lex,
                                        const FreqTable* freq, bool with_labels) {
  std::vector<EncodedSentence> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(model.encode(s, lex, freq, with_labels));
  return out;
}

nlohmann::json metrics_json(const EvalResult& ev) {
  nlohmann::json j;
  j["precision"] = ev.overall.precision();
  j["recall"] = ev.overall.recall();
  j["f1"] = ev.overall.f1();
  j["true_positives"] = ev.overall.tp;
  j["false_positives"] = ev.overall.fp;
  j["false_negatives"] = ev.overall.fn;
  j["sentences_per_sec"] = ev.sentences_per_sec;
  nlohmann::json per_type;
  for (const auto& [type, c] : ev.per_type) {
    per_type[type] = {{"precision", c.precision()},
                      {"recall", c.recall()},
                      {"f1", c.f1()},
                      {"true_positives", c.tp},
                      {"false_positives", c.fp},
                      {"false_negatives", c.fn}};
  }
  j["per_type"] = per_type;
  return j;
}

int cmd_train(Options& o) {
  if (o.model.variant != Variant::CharOnly && o.lexicon.empty())
    throw ConfigError("train: --lexicon is required unless --char-only");

  auto train_data = load_conll(o.train);
  std::vector<RawSentence> dev_data;
  if (!o.dev.empty()) dev_data = load_conll(o.dev);

  std::optional<Lexicon> lex;
  FreqTable freq;
  if (!o.lexicon.empty()) {
    lex = Lexicon::load(o.lexicon);
    // The statistical corpus is the training plus developing data; the test
    // split never feeds the frequency table.
    std::vector<std::u32string> stat;
    stat.reserve(train_data.size() + dev_data.size());
    for (const auto& s : train_data) stat.push_back(s.chars);
    for (const auto& s : dev_data) stat.push_back(s.chars);
    freq = FreqTable::count(*lex, stat);
  }

  Rng rng(o.seed);
  std::optional<EmbeddingTable> pc, pb, pw;
  if (!o.emb_char.empty()) pc = EmbeddingTable::load_text(o.emb_char, o.model.char_dim);
  if (!o.emb_bigram.empty()) pb = EmbeddingTable::load_text(o.emb_bigram, o.model.bigram_dim);
  if (!o.emb_word.empty()) pw = EmbeddingTable::load_text(o.emb_word, o.model.word_dim);

  TaggerModel model = TaggerModel::create(o.model, train_data, lex ? &*lex : nullptr, rng,
                                          pc ? &*pc : nullptr, pb ? &*pb : nullptr,
                                          pw ? &*pw : nullptr);

  auto train_enc = encode_all(model, train_data, lex ? &*lex : nullptr, &freq, true);
  auto dev_enc = encode_all(model, dev_data, lex ? &*lex : nullptr, &freq, true);

  o.trainer.batch_size = o.batch_size;
  o.trainer.eval_threads = o.threads;
  auto log_file = open_output(o.log);
  auto on_epoch = [&](const EpochRecord& rec) {
    nlohmann::json j;
    j["epoch"] = rec.epoch;
    j["loss"] = rec.train_loss;
    j["dev_precision"] = rec.dev_precision;
    j["dev_recall"] = rec.dev_recall;
    j["dev_f1"] = rec.dev_f1;
    if (log_file) *log_file << j.dump() << '\n';
  };
  FitResult fit_result = fit(model, train_enc, dev_enc, o.trainer, rng, on_epoch);
  if (log_file) {
    log_file->flush();
    if (!*log_file) throw DataError("log: write failed for " + o.log);
  }

  if (!o.checkpoint.empty())
    save_checkpoint(o.checkpoint, model, lex ? &*lex : nullptr, &freq);

  nlohmann::json summary;
  summary["epochs_run"] = fit_result.log.size();
  summary["best_epoch"] = fit_result.best_epoch;
  summary["best_dev_f1"] = fit_result.best_dev_f1;
  if (!o.test.empty()) {
    auto test_enc = encode_all(model, load_conll(o.test), lex ? &*lex : nullptr, &freq, true);
    summary["test"] = metrics_json(evaluate(model, test_enc, o.trainer.eval_batch_size, o.threads));
    // keep the summary reproducible: identical runs print identical bytes
    summary["test"].erase("sentences_per_sec");
  }
  std::cout << summary.dump(2) << std::endl;
  return 0;
}

int cmd_eval(Options& o) {
  Checkpoint ckpt = load_checkpoint(o.checkpoint);
  auto data = load_conll(o.test);
  const Lexicon* lex = ckpt.lexicon ? &*ckpt.lexicon : nullptr;
  auto enc = encode_all(ckpt.model, data, lex, &ckpt.freq, true);
  EvalResult ev = evaluate(ckpt.model, enc, o.batch_size, o.threads);
  auto out = open_output(o.output);
  (out ? *out : std::cout) << metrics_json(ev).dump(2) << std::endl;
  return 0;
}

int cmd_predict(Options& o) {
  Checkpoint ckpt = load_checkpoint(o.checkpoint);
  auto sentences = read_plain_sentences(o.input);
  const Lexicon* lex = ckpt.lexicon ? &*ckpt.lexicon : nullptr;

  std::vector<RawSentence> raw(sentences.size());
  for (size_t i = 0; i < sentences.size(); ++i) raw[i].chars = sentences[i];
  auto enc = encode_all(ckpt.model, raw, lex, &ckpt.freq, false);
  std::vector<const EncodedSentence*> ptrs;
  ptrs.reserve(enc.size());
  for (const auto& e : enc) ptrs.push_back(&e);

  InferenceEngine<double> engine(ckpt.model);
  auto paths = engine.decode(ptrs, o.batch_size, o.threads);

  auto out_file = open_output(o.output);
  std::ostream& out = out_file ? *out_file : std::cout;
  const LabelVocab& labels = ckpt.model.labels();
  for (size_t i = 0; i < sentences.size(); ++i) {
    for (size_t t = 0; t < sentences[i].size(); ++t)
      out << utf8_encode(sentences[i][t]) << '\t' << labels.tag(paths[i][t]) << '\n';
    out << '\n';
  }
  out.flush();
  return 0;
}

int cmd_bench(Options& o) {
  Checkpoint ckpt = load_checkpoint(o.checkpoint);
  auto sentences = read_plain_sentences(o.input);
  const Lexicon* lex = ckpt.lexicon ? &*ckpt.lexicon : nullptr;

  // Warmup cycles the measurement sentences until the requested count.
  std::vector<std::u32string> warmup;
  const int wanted = std::max(o.warmup, 100);
  warmup.reserve(static_cast<size_t>(wanted));
  for (int i = 0; i < wanted; ++i) warmup.push_back(sentences[static_cast<size_t>(i) % sentences.size()]);

  BenchReport report =
      o.f32 ? bench_throughput<float>(ckpt.model, lex, &ckpt.freq, warmup, sentences,
                                      o.batch_size, o.threads, o.passes)
            : bench_throughput<double>(ckpt.model, lex, &ckpt.freq, warmup, sentences,
                                       o.batch_size, o.threads, o.passes);

  auto out = open_output(o.output);
  write_bench_json(out ? *out : std::cout, report);
  if (!o.bench_tsv.empty()) {
    auto tsv = open_output(o.bench_tsv);
    write_bench_tsv(*tsv, report);
  }
  return 0;
}

int cmd_freq(Options& o) {
  Lexicon lex = Lexicon::load(o.lexicon);
  std::vector<std::u32string> corpus;
  for (const std::string& path : {o.train, o.dev, o.test}) {
    if (path.empty()) continue;
    for (auto& s : load_conll(path)) corpus.push_back(std::move(s.chars));
  }
  if (!o.input.empty())
    for (auto& s : read_plain_sentences(o.input)) corpus.push_back(std::move(s));
  FreqTable freq = FreqTable::count(lex, corpus);
  freq.save(o.output, lex);
  log_info("freq: counted " + std::to_string(corpus.size()) + " sentences over " +
           std::to_string(lex.size()) + " words");
  return 0;
}

int cmd_features(Options& o) {
  Lexicon lex = Lexicon::load(o.lexicon);
  auto sentences = read_plain_sentences(o.input);
  auto out_file = open_output(o.output);
  std::ostream& out = out_file ? *out_file : std::cout;
  for (const auto& chars : sentences) {
    auto spans = lex.match_spans(chars);
    out << "# " << utf8_encode(chars) << '\n';
    dump_features(out, chars, lex, bmes_sets(spans, static_cast<int>(chars.size())),
                  exsoftword_flags(spans, static_cast<int>(chars.size())));
    out << '\n';
  }
  out.flush();
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  Options o;
  CLI::App app{"lexicon-augmented character tagger"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  bool char_only = false, exsoftword_only = false, use_bigram = false;
  bool drop_m = false, merge = false;
  std::string pooling, normalization;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "JSON config file");
    cmd->add_option("--seed", o.seed, "master RNG seed");
    cmd->add_option("--batch-size", o.batch_size, "sentences per batch");
    cmd->add_option("--threads", o.threads, "worker threads for decoding");
  };
  auto add_variant = [&](CLI::App* cmd) {
    cmd->add_flag("--char-only", char_only, "no lexicon features");
    cmd->add_flag("--exsoftword-only", exsoftword_only, "5-dim segmentation flags instead of word sets");
    cmd->add_flag("--use-bigram", use_bigram, "append bigram embeddings");
    cmd->add_option("--pooling", pooling, "mean | weighted")
        ->check(CLI::IsMember({"mean", "weighted"}));
    cmd->add_option("--normalization", normalization, "overall | per-group")
        ->check(CLI::IsMember({"overall", "per-group"}));
    cmd->add_flag("--drop-m-group", drop_m, "ablation: drop the M word set");
    cmd->add_flag("--merge-groups", merge, "ablation: sum the pooled set vectors");
  };

  CLI::App* train_cmd = app.add_subcommand("train", "fit a tagger");
  add_common(train_cmd);
  add_variant(train_cmd);
  train_cmd->add_option("--lexicon", o.lexicon, "lexicon word list");
  train_cmd->add_option("--embeddings-char", o.emb_char, "pretrained character vectors");
  train_cmd->add_option("--embeddings-bigram", o.emb_bigram, "pretrained bigram vectors");
  train_cmd->add_option("--embeddings-word", o.emb_word, "pretrained word vectors");
  train_cmd->add_option("--train", o.train, "training data (CoNLL)")->required();
  train_cmd->add_option("--dev", o.dev, "development data (CoNLL)");
  train_cmd->add_option("--test", o.test, "optional test data, scored after training");
  train_cmd->add_option("--checkpoint", o.checkpoint, "checkpoint output path");
  train_cmd->add_option("--log", o.log, "JSONL per-epoch training log");
  train_cmd->add_option("--epochs", o.trainer.epochs, "epoch budget");
  train_cmd->add_option("--lr", o.trainer.lr, "initial learning rate");
  train_cmd->add_option("--hidden", o.model.hidden, "BiLSTM hidden size");
  train_cmd->add_option("--dropout", o.model.dropout, "dropout rate");
  train_cmd->add_option("--patience", o.trainer.patience, "early-stopping patience (0 disables)");

  CLI::App* eval_cmd = app.add_subcommand("eval", "score a checkpoint on gold data");
  add_common(eval_cmd);
  eval_cmd->add_option("--checkpoint", o.checkpoint, "checkpoint path")->required();
  eval_cmd->add_option("--test", o.test, "gold data (CoNLL)")->required();
  eval_cmd->add_option("--output", o.output, "metrics JSON path (default stdout)");

  CLI::App* predict_cmd = app.add_subcommand("predict", "tag plain sentences");
  add_common(predict_cmd);
  predict_cmd->add_option("--checkpoint", o.checkpoint, "checkpoint path")->required();
  predict_cmd->add_option("--input", o.input, "plain sentences, one per line")->required();
  predict_cmd->add_option("--output", o.output, "CoNLL output path (default stdout)");

  CLI::App* bench_cmd = app.add_subcommand("bench", "inference throughput by sentence length");
  add_common(bench_cmd);
  bench_cmd->add_option("--checkpoint", o.checkpoint, "checkpoint path")->required();
  bench_cmd->add_option("--input", o.input, "plain sentences, one per line")->required();
  bench_cmd->add_option("--output", o.output, "report JSON path (default stdout)");
  bench_cmd->add_option("--bench-tsv", o.bench_tsv, "plot data TSV (bucket midpoint, sps)");
  bench_cmd->add_option("--warmup", o.warmup, "warmup sentence count (min 100)");
  bench_cmd->add_option("--passes", o.passes, "timed passes; the median is reported");
  bench_cmd->add_flag("--f32", o.f32, "32-bit inference arithmetic");

  CLI::App* freq_cmd = app.add_subcommand("freq", "build and export a word-frequency table");
  add_common(freq_cmd);
  freq_cmd->add_option("--lexicon", o.lexicon, "lexicon word list")->required();
  freq_cmd->add_option("--train", o.train, "CoNLL corpus");
  freq_cmd->add_option("--dev", o.dev, "CoNLL corpus");
  freq_cmd->add_option("--test", o.test, "CoNLL corpus");
  freq_cmd->add_option("--input", o.input, "plain sentences, one per line");
  freq_cmd->add_option("--output", o.output, "frequency table output path")->required();

  CLI::App* features_cmd = app.add_subcommand("features", "dump word-set features per character");
  add_common(features_cmd);
  features_cmd->add_option("--lexicon", o.lexicon, "lexicon word list")->required();
  features_cmd->add_option("--input", o.input, "plain sentences, one per line")->required();
  features_cmd->add_option("--output", o.output, "TSV output path (default stdout)");

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const std::vector<CLI::App*> parsed = app.get_subcommands();
    apply_config_file(o, *parsed.front());
    if (char_only && exsoftword_only)
      throw ConfigError("flags --char-only and --exsoftword-only conflict");
    if (char_only) o.model.variant = Variant::CharOnly;
    if (exsoftword_only) o.model.variant = Variant::ExSoftword;
    if (use_bigram) o.model.use_bigram = true;
    if (!pooling.empty()) o.model.pool.pooling = pooling_from_name(pooling);
    if (!normalization.empty())
      o.model.pool.normalization = normalization_from_name(normalization);
    if (drop_m) o.model.pool.drop_m_group = true;
    if (merge) o.model.pool.merge_groups = true;

    if (train_cmd->parsed()) return cmd_train(o);
    if (eval_cmd->parsed()) return cmd_eval(o);
    if (predict_cmd->parsed()) return cmd_predict(o);
    if (bench_cmd->parsed()) return cmd_bench(o);
    if (freq_cmd->parsed()) return cmd_freq(o);
    if (features_cmd->parsed()) return cmd_features(o);
    std::cerr << app.help() << std::endl;
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << std::endl;
    return 2;
  }
}

}  // namespace softlex::cli
