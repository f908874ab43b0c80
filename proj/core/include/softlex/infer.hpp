#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <numeric>
#include <thread>
#include <vector>

#include "softlex/errors.hpp"
#include "softlex/model.hpp"
#include "softlex/net.hpp"

namespace softlex {

// Forward-only batched decoder over a frozen model. Scalar=double matches
// training arithmetic; Scalar=float is the benchmark-mode precision trade.
// Weights are cast and cached once at construction.
template <typename Scalar>
class InferenceEngine {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

 public:
  explicit InferenceEngine(const TaggerModel& model)
      : cfg_(model.config()),
        in_dim_(model.input_dim()),
        labels_(model.labels().size()),
        emb_char_(model.emb_char.value.template cast<Scalar>()),
        fwd_W_(model.lstm_fwd_W.value.template cast<Scalar>()),
        fwd_b_(model.lstm_fwd_b.value.col(0).template cast<Scalar>()),
        bwd_W_(model.lstm_bwd_W.value.template cast<Scalar>()),
        bwd_b_(model.lstm_bwd_b.value.col(0).template cast<Scalar>()),
        emit_W_(model.emit_W.value.template cast<Scalar>()),
        emit_b_(model.emit_b.value.col(0).template cast<Scalar>()),
        trans_(model.crf_trans.value.template cast<Scalar>()) {
    if (cfg_.use_bigram) emb_bigram_ = model.emb_bigram.value.template cast<Scalar>();
    if (cfg_.variant == Variant::SoftLexicon)
      emb_word_ = model.emb_word.value.template cast<Scalar>();
  }

  // Label paths in input order. Sentences are sorted by length internally and
  // grouped into batches of batch_size; the grouping (and therefore every
  // arithmetic op) is independent of the thread count.
  std::vector<std::vector<int>> decode(const std::vector<const EncodedSentence*>& sents,
                                       int batch_size, int threads = 1) const {
    if (batch_size < 1) throw ConfigError("infer: batch_size must be >= 1");
    if (threads < 1) throw ConfigError("infer: threads must be >= 1");
    const size_t count = sents.size();
    std::vector<std::vector<int>> out(count);
    if (count == 0) return out;

    std::vector<size_t> order(count);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return sents[a]->length() > sents[b]->length();
    });

    std::vector<std::pair<size_t, size_t>> chunks;  // [first, last) into order
    for (size_t first = 0; first < count; first += static_cast<size_t>(batch_size))
      chunks.emplace_back(first, std::min(count, first + static_cast<size_t>(batch_size)));

    auto work = [&](size_t shard) {
      for (size_t c = shard; c < chunks.size(); c += static_cast<size_t>(threads))
        decode_chunk(sents, order, chunks[c].first, chunks[c].second, out);
    };
    if (threads == 1 || chunks.size() <= 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      const int used = std::min<int>(threads, static_cast<int>(chunks.size()));
      pool.reserve(static_cast<size_t>(used));
      for (int k = 0; k < used; ++k) pool.emplace_back(work, static_cast<size_t>(k));
      for (auto& th : pool) th.join();
    }
    return out;
  }

  // Feature matrix (input_dim x length), the augmented character
  // representations of one sentence.
  Mat features(const EncodedSentence& s) const {
    const int n = s.length();
    Mat X(in_dim_, n);
    for (int t = 0; t < n; ++t) {
      Eigen::Index off = 0;
      X.block(off, t, cfg_.char_dim, 1) =
          emb_char_.row(s.char_rows[static_cast<size_t>(t)]).transpose();
      off += cfg_.char_dim;
      if (cfg_.use_bigram) {
        X.block(off, t, cfg_.bigram_dim, 1) =
            emb_bigram_.row(s.bigram_rows[static_cast<size_t>(t)]).transpose();
        off += cfg_.bigram_dim;
      }
      if (cfg_.variant == Variant::SoftLexicon) {
        for (const auto& terms : s.pool_terms[static_cast<size_t>(t)]) {
          Vec v = Vec::Zero(cfg_.word_dim);
          for (const auto& [row, coeff] : terms)
            v += static_cast<Scalar>(coeff) * emb_word_.row(row).transpose();
          X.block(off, t, cfg_.word_dim, 1) = v;
          off += cfg_.word_dim;
        }
      } else if (cfg_.variant == Variant::ExSoftword) {
        for (int k = 0; k < 5; ++k)
          X(off + k, t) =
              s.flags[static_cast<size_t>(t)].flag[static_cast<size_t>(k)] ? Scalar(1) : Scalar(0);
        off += 5;
      }
      if (off != in_dim_) throw IntegrityError("infer: feature assembly dimension mismatch");
    }
    return X;
  }

  // Emission matrix (length x |Y|) for one sentence (batch of one).
  Mat emissions(const EncodedSentence& s) const {
    std::vector<const EncodedSentence*> one{&s};
    std::vector<Mat> e = chunk_emissions(one, {0}, 0, 1);
    return std::move(e[0]);
  }

 private:
  // Packed forward over order[first..last): sentences sorted by descending
  // length, state columns beyond a sentence's length stay untouched zeros.
  std::vector<Mat> chunk_emissions(const std::vector<const EncodedSentence*>& sents,
                                   const std::vector<size_t>& order, size_t first,
                                   size_t last) const {
    const int batch = static_cast<int>(last - first);
    const int h = cfg_.hidden;
    std::vector<Mat> feats(static_cast<size_t>(batch));
    std::vector<int> lens(static_cast<size_t>(batch));
    int max_len = 0;
    for (int j = 0; j < batch; ++j) {
      const EncodedSentence& s = *sents[order[first + static_cast<size_t>(j)]];
      feats[static_cast<size_t>(j)] = features(s);
      lens[static_cast<size_t>(j)] = s.length();
      max_len = std::max(max_len, s.length());
    }
    for (int j = 1; j < batch; ++j)
      if (lens[static_cast<size_t>(j)] > lens[static_cast<size_t>(j) - 1])
        throw IntegrityError("infer: chunk not sorted by length");

    auto active_at = [&](int t) {
      int a = 0;
      while (a < batch && lens[static_cast<size_t>(a)] > t) ++a;
      return a;
    };

    std::vector<Mat> hf(static_cast<size_t>(batch)), hb(static_cast<size_t>(batch));
    for (int j = 0; j < batch; ++j) {
      hf[static_cast<size_t>(j)].resize(h, lens[static_cast<size_t>(j)]);
      hb[static_cast<size_t>(j)].resize(h, lens[static_cast<size_t>(j)]);
    }

    Mat H = Mat::Zero(h, batch), C = Mat::Zero(h, batch), X(in_dim_, batch);
    for (int t = 0; t < max_len; ++t) {
      const int active = active_at(t);
      for (int j = 0; j < active; ++j) X.col(j) = feats[static_cast<size_t>(j)].col(t);
      Mat Ha = H.leftCols(active), Ca = C.leftCols(active);
      Mat Xa = X.leftCols(active);
      net::lstm_step<Scalar>(fwd_W_, fwd_b_, Xa, Ha, Ca);
      H.leftCols(active) = Ha;
      C.leftCols(active) = Ca;
      for (int j = 0; j < active; ++j) hf[static_cast<size_t>(j)].col(t) = Ha.col(j);
    }

    H.setZero();
    C.setZero();
    for (int t = max_len - 1; t >= 0; --t) {
      const int active = active_at(t);
      for (int j = 0; j < active; ++j) X.col(j) = feats[static_cast<size_t>(j)].col(t);
      Mat Ha = H.leftCols(active), Ca = C.leftCols(active);
      Mat Xa = X.leftCols(active);
      net::lstm_step<Scalar>(bwd_W_, bwd_b_, Xa, Ha, Ca);
      H.leftCols(active) = Ha;
      C.leftCols(active) = Ca;
      for (int j = 0; j < active; ++j) hb[static_cast<size_t>(j)].col(t) = Ha.col(j);
    }

    std::vector<Mat> out(static_cast<size_t>(batch));
    for (int j = 0; j < batch; ++j) {
      const int n = lens[static_cast<size_t>(j)];
      Mat both(2 * h, n);
      both.topRows(h) = hf[static_cast<size_t>(j)];
      both.bottomRows(h) = hb[static_cast<size_t>(j)];
      out[static_cast<size_t>(j)] = ((emit_W_ * both).colwise() + emit_b_).transpose();
    }
    return out;
  }

  void decode_chunk(const std::vector<const EncodedSentence*>& sents,
                    const std::vector<size_t>& order, size_t first, size_t last,
                    std::vector<std::vector<int>>& out) const {
    std::vector<Mat> em = chunk_emissions(sents, order, first, last);
    for (size_t j = first; j < last; ++j)
      out[order[j]] = net::viterbi<Scalar>(em[j - first], trans_);
  }

  ModelConfig cfg_;
  int in_dim_;
  int labels_;
  Mat emb_char_, emb_bigram_, emb_word_;
  Mat fwd_W_;
  Vec fwd_b_;
  Mat bwd_W_;
  Vec bwd_b_;
  Mat emit_W_;
  Vec emit_b_;
  Mat trans_;
};

}  // namespace softlex
