#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "softlex/data.hpp"
#include "softlex/embeddings.hpp"
#include "softlex/encoder.hpp"
#include "softlex/lexicon.hpp"
#include "softlex/net.hpp"
#include "softlex/rng.hpp"
#include "softlex/tape.hpp"

namespace softlex {

// What feeds the character representation besides the character embedding.
enum class Variant { CharOnly, ExSoftword, SoftLexicon };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct ModelConfig {
  Variant variant = Variant::SoftLexicon;
  bool use_bigram = false;
  int char_dim = 50;
  int bigram_dim = 50;
  int word_dim = 50;
  int hidden = 200;
  double dropout = 0.5;
  PoolOptions pool;
};

// A sentence converted to model inputs once; reusable across epochs. Word-set
// construction is cached here, embedding rows are looked up live during the
// forward pass.
struct EncodedSentence {
  std::u32string chars;
  std::vector<int> labels;  // empty when unlabeled
  std::vector<std::string> tags;
  std::vector<int> char_rows;
  std::vector<int> bigram_rows;  // empty unless use_bigram
  // [position][group] -> (word-table row, coefficient)
  std::vector<std::vector<std::vector<std::pair<int, double>>>> pool_terms;
  std::vector<SoftwordFlags> flags;  // empty unless ExSoftword

  int length() const { return static_cast<int>(chars.size()); }
};

// BiLSTM-CRF character tagger with optional lexicon word-set features.
// Owns every learnable parameter plus the vocabularies needed to encode raw
// text; together with a Lexicon and FreqTable it is self-contained.
class TaggerModel {
 public:
  TaggerModel() = default;

  // Builds vocabularies from the training corpus (characters, bigrams, the
  // label set) and initializes all weights from rng. A pretrained table,
  // when given, is used as-is; tokens outside it fall back to its <unk> row.
  static TaggerModel create(const ModelConfig& cfg, const std::vector<RawSentence>& train,
                            const Lexicon* lex, Rng& rng,
                            const EmbeddingTable* pre_char = nullptr,
                            const EmbeddingTable* pre_bigram = nullptr,
                            const EmbeddingTable* pre_word = nullptr);

  const ModelConfig& config() const { return cfg_; }
  const LabelVocab& labels() const { return labels_; }

  // Learnable tensors in a fixed order (stable across runs and checkpoints).
  std::vector<net::Parameter*> parameters();
  std::vector<const net::Parameter*> parameters() const;

  int char_row(char32_t c) const;
  // The sentence-final position pairs with the <end> row instead of a
  // following character.
  int bigram_row(char32_t a, char32_t b) const;
  int bigram_end_row(char32_t last) const;
  int word_table_row(int word_id) const;  // kNoneWord maps to the <none> row
  int input_dim() const;

  // Maps lexicon word ids to word-table rows. Must run before encoding
  // SoftLexicon features (create() does it; restored models need it again).
  void bind_lexicon(const Lexicon& lex);

  // lex/freq may be null only for CharOnly.
  EncodedSentence encode(const RawSentence& s, const Lexicon* lex, const FreqTable* freq,
                         bool with_labels) const;

  // Mean CRF negative log-likelihood over a batch. dropout_rng enables
  // inverted dropout on the character representation and on the BiLSTM
  // output; pass nullptr for a deterministic (evaluation) pass.
  net::Var batch_loss(net::Tape& tape, const std::vector<const EncodedSentence*>& batch,
                      Rng* dropout_rng);

  // Emission matrix (length x |Y|) for one sentence, no dropout. The tape
  // path and the inference engine share this definition of the forward pass.
  Eigen::MatrixXd emissions(const EncodedSentence& s);

  std::vector<int> predict_one(const EncodedSentence& s);

  // Checkpoint plumbing.
  const std::vector<std::string>& char_keys() const { return char_keys_; }
  const std::vector<std::string>& bigram_keys() const { return bigram_keys_; }
  const std::vector<std::string>& word_keys() const { return word_keys_; }
  static TaggerModel restore(const ModelConfig& cfg, std::vector<std::string> labels,
                             std::vector<std::string> char_keys,
                             std::vector<std::string> bigram_keys,
                             std::vector<std::string> word_keys);

  net::Parameter emb_char, emb_bigram, emb_word;
  net::Parameter lstm_fwd_W, lstm_fwd_b, lstm_bwd_W, lstm_bwd_b;
  net::Parameter emit_W, emit_b;
  net::Parameter crf_trans;

 private:
  void build_index();
  int feature_dim() const;
  std::vector<net::Var> positional_inputs(net::Tape& tape, const EncodedSentence& s,
                                          Rng* dropout_rng);

  ModelConfig cfg_;
  LabelVocab labels_;
  std::vector<std::string> char_keys_, bigram_keys_, word_keys_;
  std::unordered_map<std::string, int> char_index_, bigram_index_, word_index_;
  std::vector<int> word_rows_;  // lexicon word id -> word-table row
  int none_row_ = -1;
};

std::string bigram_key(char32_t a, char32_t b);

}  // namespace softlex
