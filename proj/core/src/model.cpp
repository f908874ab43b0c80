#include "softlex/model.hpp"

#include <cmath>
#include <set>

#include "softlex/errors.hpp"
#include "softlex/unicode.hpp"

namespace softlex {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::CharOnly: return "char-only";
    case Variant::ExSoftword: return "exsoftword";
    case Variant::SoftLexicon: return "softlexicon";
  }
  throw ConfigError("model: unknown variant");
}

Variant variant_from_name(const std::string& name) {
  if (name == "char-only") return Variant::CharOnly;
  if (name == "exsoftword") return Variant::ExSoftword;
  if (name == "softlexicon") return Variant::SoftLexicon;
  throw ConfigError("model: unknown variant '" + name + "'");
}

std::string bigram_key(char32_t a, char32_t b) { return utf8_encode(a) + utf8_encode(b); }

namespace {

void check_config(const ModelConfig& cfg) {
  if (cfg.char_dim <= 0 || cfg.hidden <= 0) throw ConfigError("model: dims must be positive");
  if (cfg.use_bigram && cfg.bigram_dim <= 0) throw ConfigError("model: bigram_dim must be positive");
  if (cfg.variant == Variant::SoftLexicon && cfg.word_dim <= 0)
    throw ConfigError("model: word_dim must be positive");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0)
    throw ConfigError("model: dropout must be in [0, 1)");
}

// Fan-balanced uniform init for the dense layers; the embedding init rule
// covers only lookup tables.
void init_dense(net::Parameter& p, Rng& rng) {
  const double b = std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
  fill_uniform(p.value, -b, b, rng);
}

}  // namespace

int TaggerModel::feature_dim() const {
  switch (cfg_.variant) {
    case Variant::CharOnly: return 0;
    case Variant::ExSoftword: return 5;
    case Variant::SoftLexicon: return pooled_group_count(cfg_.pool) * cfg_.word_dim;
  }
  throw ConfigError("model: unknown variant");
}

int TaggerModel::input_dim() const {
  return cfg_.char_dim + (cfg_.use_bigram ? cfg_.bigram_dim : 0) + feature_dim();
}

void TaggerModel::build_index() {
  char_index_.clear();
  bigram_index_.clear();
  word_index_.clear();
  for (size_t i = 0; i < char_keys_.size(); ++i)
    char_index_.emplace(char_keys_[i], static_cast<int>(i));
  for (size_t i = 0; i < bigram_keys_.size(); ++i)
    bigram_index_.emplace(bigram_keys_[i], static_cast<int>(i));
  for (size_t i = 0; i < word_keys_.size(); ++i)
    word_index_.emplace(word_keys_[i], static_cast<int>(i));
  if (!char_index_.count(kUnkKey)) throw IntegrityError("model: char table lacks <unk>");
  if (cfg_.use_bigram && !bigram_index_.count(kUnkKey))
    throw IntegrityError("model: bigram table lacks <unk>");
  if (cfg_.variant == Variant::SoftLexicon) {
    auto it = word_index_.find(kNoneKey);
    if (it == word_index_.end()) throw IntegrityError("model: word table lacks <none>");
    none_row_ = it->second;
  }
}

void TaggerModel::bind_lexicon(const Lexicon& lex) {
  if (cfg_.variant != Variant::SoftLexicon) return;
  word_rows_.resize(static_cast<size_t>(lex.size()));
  const int unk = word_index_.at(kUnkKey);
  for (int id = 0; id < lex.size(); ++id) {
    auto it = word_index_.find(lex.word_utf8(id));
    word_rows_[static_cast<size_t>(id)] = it == word_index_.end() ? unk : it->second;
  }
}

int TaggerModel::char_row(char32_t c) const {
  auto it = char_index_.find(utf8_encode(c));
  return it == char_index_.end() ? char_index_.at(kUnkKey) : it->second;
}

int TaggerModel::bigram_row(char32_t a, char32_t b) const {
  auto it = bigram_index_.find(bigram_key(a, b));
  return it == bigram_index_.end() ? bigram_index_.at(kUnkKey) : it->second;
}

int TaggerModel::bigram_end_row(char32_t) const { return bigram_index_.at(kEndKey); }

int TaggerModel::word_table_row(int word_id) const {
  if (word_id == kNoneWord) return none_row_;
  if (word_id < 0 || static_cast<size_t>(word_id) >= word_rows_.size())
    throw IntegrityError("model: word id not bound to the word table");
  return word_rows_[static_cast<size_t>(word_id)];
}

TaggerModel TaggerModel::create(const ModelConfig& cfg, const std::vector<RawSentence>& train,
                                const Lexicon* lex, Rng& rng, const EmbeddingTable* pre_char,
                                const EmbeddingTable* pre_bigram, const EmbeddingTable* pre_word) {
  check_config(cfg);
  if (train.empty()) throw ConfigError("model: empty training corpus");
  if (cfg.variant != Variant::CharOnly && lex == nullptr)
    throw ConfigError("model: this variant needs a lexicon");

  TaggerModel m;
  m.cfg_ = cfg;
  m.labels_ = LabelVocab::build(train);

  // Vocabularies are sorted sets, so ids depend only on corpus content.
  auto take = [](const EmbeddingTable& t, net::Parameter& p, std::vector<std::string>& keys,
                 int want_dim, const char* what) {
    if (t.dim() != want_dim)
      throw ConfigError(std::string("model: ") + what + " table dim " + std::to_string(t.dim()) +
                        " != configured " + std::to_string(want_dim));
    keys = t.keys();
    p.value = t.matrix();
    p.grad = Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols());
  };

  {
    std::set<std::string> chars;
    for (const auto& s : train)
      for (char32_t c : s.chars) chars.insert(utf8_encode(c));
    std::vector<std::string> vocab(chars.begin(), chars.end());
    EmbeddingTable t = pre_char ? *pre_char : EmbeddingTable::init_random(vocab, cfg.char_dim, rng);
    m.emb_char.name = "emb_char";
    take(t, m.emb_char, m.char_keys_, cfg.char_dim, "char");
  }
  if (cfg.use_bigram) {
    std::set<std::string> bigrams;
    for (const auto& s : train)
      for (size_t t = 0; t + 1 < s.chars.size(); ++t)
        bigrams.insert(bigram_key(s.chars[t], s.chars[t + 1]));
    std::vector<std::string> vocab(bigrams.begin(), bigrams.end());
    EmbeddingTable t =
        pre_bigram ? *pre_bigram : EmbeddingTable::init_random(vocab, cfg.bigram_dim, rng);
    m.emb_bigram.name = "emb_bigram";
    take(t, m.emb_bigram, m.bigram_keys_, cfg.bigram_dim, "bigram");
  }
  if (cfg.variant == Variant::SoftLexicon) {
    std::vector<std::string> vocab;
    vocab.reserve(static_cast<size_t>(lex->size()));
    for (int id = 0; id < lex->size(); ++id) vocab.push_back(lex->word_utf8(id));
    EmbeddingTable t = pre_word ? *pre_word : EmbeddingTable::init_random(vocab, cfg.word_dim, rng);
    m.emb_word.name = "emb_word";
    take(t, m.emb_word, m.word_keys_, cfg.word_dim, "word");
  }

  const int in = m.input_dim(), h = cfg.hidden, y = m.labels_.size();
  m.lstm_fwd_W = net::Parameter("lstm_fwd_W", net::kGateBlocks * h, in + h);
  m.lstm_fwd_b = net::Parameter("lstm_fwd_b", net::kGateBlocks * h, 1);
  m.lstm_bwd_W = net::Parameter("lstm_bwd_W", net::kGateBlocks * h, in + h);
  m.lstm_bwd_b = net::Parameter("lstm_bwd_b", net::kGateBlocks * h, 1);
  m.emit_W = net::Parameter("emit_W", y, 2 * h);
  m.emit_b = net::Parameter("emit_b", y, 1);
  m.crf_trans = net::Parameter("crf_trans", y + 2, y + 2);
  init_dense(m.lstm_fwd_W, rng);
  init_dense(m.lstm_bwd_W, rng);
  init_dense(m.emit_W, rng);
  m.crf_trans.value = net::make_transitions(y);

  m.build_index();
  if (lex) m.bind_lexicon(*lex);
  return m;
}

TaggerModel TaggerModel::restore(const ModelConfig& cfg, std::vector<std::string> labels,
                                 std::vector<std::string> char_keys,
                                 std::vector<std::string> bigram_keys,
                                 std::vector<std::string> word_keys) {
  check_config(cfg);
  TaggerModel m;
  m.cfg_ = cfg;
  m.labels_ = LabelVocab::from_tags(std::move(labels));
  m.char_keys_ = std::move(char_keys);
  m.bigram_keys_ = std::move(bigram_keys);
  m.word_keys_ = std::move(word_keys);
  m.build_index();

  const int in = m.input_dim(), h = cfg.hidden, y = m.labels_.size();
  m.emb_char = net::Parameter("emb_char", static_cast<Eigen::Index>(m.char_keys_.size()),
                              cfg.char_dim);
  if (cfg.use_bigram)
    m.emb_bigram = net::Parameter("emb_bigram", static_cast<Eigen::Index>(m.bigram_keys_.size()),
                                  cfg.bigram_dim);
  if (cfg.variant == Variant::SoftLexicon)
    m.emb_word = net::Parameter("emb_word", static_cast<Eigen::Index>(m.word_keys_.size()),
                                cfg.word_dim);
  m.lstm_fwd_W = net::Parameter("lstm_fwd_W", net::kGateBlocks * h, in + h);
  m.lstm_fwd_b = net::Parameter("lstm_fwd_b", net::kGateBlocks * h, 1);
  m.lstm_bwd_W = net::Parameter("lstm_bwd_W", net::kGateBlocks * h, in + h);
  m.lstm_bwd_b = net::Parameter("lstm_bwd_b", net::kGateBlocks * h, 1);
  m.emit_W = net::Parameter("emit_W", y, 2 * h);
  m.emit_b = net::Parameter("emit_b", y, 1);
  m.crf_trans = net::Parameter("crf_trans", y + 2, y + 2);
  return m;
}

std::vector<net::Parameter*> TaggerModel::parameters() {
  std::vector<net::Parameter*> ps{&emb_char};
  if (cfg_.use_bigram) ps.push_back(&emb_bigram);
  if (cfg_.variant == Variant::SoftLexicon) ps.push_back(&emb_word);
  ps.insert(ps.end(), {&lstm_fwd_W, &lstm_fwd_b, &lstm_bwd_W, &lstm_bwd_b, &emit_W, &emit_b,
                       &crf_trans});
  return ps;
}

std::vector<const net::Parameter*> TaggerModel::parameters() const {
  auto ps = const_cast<TaggerModel*>(this)->parameters();
  return {ps.begin(), ps.end()};
}

EncodedSentence TaggerModel::encode(const RawSentence& s, const Lexicon* lex,
                                    const FreqTable* freq, bool with_labels) const {
  if (s.chars.empty()) throw DataError("model: cannot encode an empty sentence");
  EncodedSentence enc;
  enc.chars = s.chars;
  enc.tags = s.tags;
  const int n = enc.length();
  if (with_labels) {
    if (s.tags.size() != s.chars.size())
      throw IntegrityError("model: tags and characters differ in length");
    enc.labels.reserve(s.tags.size());
    for (const auto& tag : s.tags) enc.labels.push_back(labels_.id_of(tag));
  }
  enc.char_rows.resize(static_cast<size_t>(n));
  for (int t = 0; t < n; ++t) enc.char_rows[static_cast<size_t>(t)] = char_row(s.chars[static_cast<size_t>(t)]);
  if (cfg_.use_bigram) {
    enc.bigram_rows.resize(static_cast<size_t>(n));
    for (int t = 0; t + 1 < n; ++t)
      enc.bigram_rows[static_cast<size_t>(t)] = bigram_row(s.chars[static_cast<size_t>(t)], s.chars[static_cast<size_t>(t) + 1]);
    enc.bigram_rows[static_cast<size_t>(n) - 1] = bigram_end_row(s.chars.back());
  }
  if (cfg_.variant == Variant::CharOnly) return enc;
  if (!lex) throw ConfigError("model: this variant needs a lexicon to encode");
  auto spans = lex->match_spans(enc.chars);
  if (cfg_.variant == Variant::ExSoftword) {
    enc.flags = exsoftword_flags(spans, n);
    return enc;
  }
  if (!freq) throw ConfigError("model: soft lexicon features need a frequency table");
  auto sets = bmes_sets(spans, n);
  enc.pool_terms.resize(static_cast<size_t>(n));
  for (int t = 0; t < n; ++t) {
    PoolWeights pw = pool_weights(sets[static_cast<size_t>(t)], *freq, cfg_.pool);
    auto& out = enc.pool_terms[static_cast<size_t>(t)];
    out.resize(pw.groups.size());
    for (size_t g = 0; g < pw.groups.size(); ++g) {
      out[g].reserve(pw.groups[g].size());
      for (const PoolTerm& term : pw.groups[g])
        out[g].emplace_back(word_table_row(term.word_id), term.coeff);
    }
  }
  return enc;
}

std::vector<net::Var> TaggerModel::positional_inputs(net::Tape& tape, const EncodedSentence& s,
                                                     Rng* dropout_rng) {
  const int n = s.length();
  std::vector<net::Var> xs;
  xs.reserve(static_cast<size_t>(n));
  for (int t = 0; t < n; ++t) {
    std::vector<net::Var> parts;
    parts.push_back(tape.embed_row(emb_char, s.char_rows[static_cast<size_t>(t)]));
    if (cfg_.use_bigram)
      parts.push_back(tape.embed_row(emb_bigram, s.bigram_rows[static_cast<size_t>(t)]));
    if (cfg_.variant == Variant::SoftLexicon) {
      for (const auto& terms : s.pool_terms[static_cast<size_t>(t)])
        parts.push_back(tape.weighted_rows(emb_word, terms));
    } else if (cfg_.variant == Variant::ExSoftword) {
      Eigen::MatrixXd f(5, 1);
      for (int k = 0; k < 5; ++k)
        f(k, 0) = s.flags[static_cast<size_t>(t)].flag[static_cast<size_t>(k)] ? 1.0 : 0.0;
      parts.push_back(tape.constant(std::move(f)));
    }
    net::Var x = parts.size() == 1 ? parts[0] : tape.concat(parts);
    if (dropout_rng && cfg_.dropout > 0.0) {
      Eigen::VectorXd mask(input_dim());
      const double keep = 1.0 - cfg_.dropout;
      for (Eigen::Index k = 0; k < mask.size(); ++k)
        mask(k) = dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
      x = tape.dropout(x, mask);
    }
    xs.push_back(x);
  }
  return xs;
}

net::Var TaggerModel::batch_loss(net::Tape& tape, const std::vector<const EncodedSentence*>& batch,
                                 Rng* dropout_rng) {
  if (batch.empty()) throw IntegrityError("model: empty batch");
  std::vector<net::Var> losses;
  losses.reserve(batch.size());
  for (const EncodedSentence* s : batch) {
    if (s->labels.empty()) throw IntegrityError("model: batch sentence lacks labels");
    auto xs = positional_inputs(tape, *s, dropout_rng);
    auto fwd = net::lstm_sequence(tape, lstm_fwd_W, lstm_fwd_b, xs, false);
    auto bwd = net::lstm_sequence(tape, lstm_bwd_W, lstm_bwd_b, xs, true);
    std::vector<net::Var> emissions;
    emissions.reserve(xs.size());
    for (size_t t = 0; t < xs.size(); ++t) {
      net::Var h = tape.concat({fwd[t], bwd[t]});
      if (dropout_rng && cfg_.dropout > 0.0) {
        Eigen::VectorXd mask(2 * cfg_.hidden);
        const double keep = 1.0 - cfg_.dropout;
        for (Eigen::Index k = 0; k < mask.size(); ++k)
          mask(k) = dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
        h = tape.dropout(h, mask);
      }
      emissions.push_back(tape.affine(emit_W, emit_b, h));
    }
    losses.push_back(tape.crf_nll(emissions, crf_trans, s->labels));
  }
  return losses.size() == 1 ? losses[0] : tape.average(losses);
}

Eigen::MatrixXd TaggerModel::emissions(const EncodedSentence& s) {
  // Dropout-free forward pass on plain matrices; mirrors batch_loss exactly.
  const int n = s.length(), h = cfg_.hidden, in = input_dim();
  Eigen::MatrixXd X(in, n);
  for (int t = 0; t < n; ++t) {
    Eigen::Index off = 0;
    X.block(off, t, cfg_.char_dim, 1) =
        emb_char.value.row(s.char_rows[static_cast<size_t>(t)]).transpose();
    off += cfg_.char_dim;
    if (cfg_.use_bigram) {
      X.block(off, t, cfg_.bigram_dim, 1) =
          emb_bigram.value.row(s.bigram_rows[static_cast<size_t>(t)]).transpose();
      off += cfg_.bigram_dim;
    }
    if (cfg_.variant == Variant::SoftLexicon) {
      for (const auto& terms : s.pool_terms[static_cast<size_t>(t)]) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(cfg_.word_dim);
        for (const auto& [row, coeff] : terms) v += coeff * emb_word.value.row(row).transpose();
        X.block(off, t, cfg_.word_dim, 1) = v;
        off += cfg_.word_dim;
      }
    } else if (cfg_.variant == Variant::ExSoftword) {
      for (int k = 0; k < 5; ++k)
        X(off + k, t) = s.flags[static_cast<size_t>(t)].flag[static_cast<size_t>(k)] ? 1.0 : 0.0;
      off += 5;
    }
    if (off != in) throw IntegrityError("model: feature assembly dimension mismatch");
  }

  Eigen::MatrixXd hf = Eigen::MatrixXd::Zero(h, 1), cf = Eigen::MatrixXd::Zero(h, 1);
  Eigen::MatrixXd hb = Eigen::MatrixXd::Zero(h, 1), cb = Eigen::MatrixXd::Zero(h, 1);
  Eigen::MatrixXd HF(h, n), HB(h, n);
  for (int t = 0; t < n; ++t) {
    net::lstm_step<double>(lstm_fwd_W.value, lstm_fwd_b.value.col(0), X.col(t), hf, cf);
    HF.col(t) = hf;
  }
  for (int t = n - 1; t >= 0; --t) {
    net::lstm_step<double>(lstm_bwd_W.value, lstm_bwd_b.value.col(0), X.col(t), hb, cb);
    HB.col(t) = hb;
  }

  Eigen::MatrixXd H(2 * h, n);
  H.topRows(h) = HF;
  H.bottomRows(h) = HB;
  Eigen::MatrixXd E = ((emit_W.value * H).colwise() + emit_b.value.col(0)).transpose();
  return E;  // n x |Y|
}

std::vector<int> TaggerModel::predict_one(const EncodedSentence& s) {
  return net::viterbi<double>(emissions(s), crf_trans.value);
}

}  // namespace softlex
