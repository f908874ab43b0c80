#pragma once

#include <algorithm>
#include <chrono>
#include <ostream>
#include <string>
#include <vector>

#include "softlex/infer.hpp"
#include "softlex/model.hpp"

namespace softlex {

struct BenchBucket {
  int lo = 0;
  int hi = 0;  // inclusive; 0 marks the open-ended last bucket
  int sentences = 0;
  double sentences_per_sec = 0.0;
};

struct BenchReport {
  std::vector<BenchBucket> buckets;
  double overall_sps = 0.0;
  int batch_size = 1;
  int threads = 1;
  std::string variant;
  int warmup_sentences = 0;
  int measured_sentences = 0;
  int passes = 0;
  std::string clock = "steady_clock";
  std::string precision = "float64";
};

void write_bench_json(std::ostream& out, const BenchReport& report);
// bucket midpoint (open bucket: lo + width/2) and sentences/sec per line
void write_bench_tsv(std::ostream& out, const BenchReport& report);

inline constexpr int kBenchBucketWidth = 20;
inline constexpr int kBenchBucketCount = 6;  // 1-20 ... 81-100, 101+

inline int bench_bucket_of(int len) {
  const int idx = (len - 1) / kBenchBucketWidth;
  return std::min(idx, kBenchBucketCount - 1);
}

// Times the full inference path (lexicon matching, feature construction,
// BiLSTM forward, Viterbi) per length bucket on a frozen model; model setup
// and I/O stay outside the clock. Reports the median of `passes` passes.
// pred_tags, when non-null, receives the decoded tags of `sentences` in
// order (identical across passes; the work is never discarded).
template <typename Scalar>
BenchReport bench_throughput(const TaggerModel& model, const Lexicon* lex, const FreqTable* freq,
                             const std::vector<std::u32string>& warmup,
                             const std::vector<std::u32string>& sentences, int batch_size,
                             int threads = 1, int passes = 3,
                             std::vector<std::vector<std::string>>* pred_tags = nullptr) {
  if (sentences.empty()) throw ConfigError("bench: empty measurement set");
  if (static_cast<int>(warmup.size()) < 100)
    throw ConfigError("bench: need at least 100 warmup sentences");
  if (passes < 1) throw ConfigError("bench: need at least one pass");

  // Engine construction (weight casting) is model setup, kept off the clock.
  InferenceEngine<Scalar> engine(model);

  auto run_batchset = [&](const std::vector<const std::u32string*>& raw,
                          std::vector<std::vector<int>>* paths_out) {
    std::vector<EncodedSentence> enc;
    enc.reserve(raw.size());
    for (const auto* chars : raw) {
      RawSentence rs;
      rs.chars = *chars;
      enc.push_back(model.encode(rs, lex, freq, false));
    }
    std::vector<const EncodedSentence*> ptrs;
    ptrs.reserve(enc.size());
    for (const auto& e : enc) ptrs.push_back(&e);
    auto paths = engine.decode(ptrs, batch_size, threads);
    if (paths_out) *paths_out = std::move(paths);
  };

  {
    std::vector<const std::u32string*> w;
    w.reserve(warmup.size());
    for (const auto& s : warmup) w.push_back(&s);
    run_batchset(w, nullptr);
  }

  std::vector<std::vector<const std::u32string*>> by_bucket(kBenchBucketCount);
  for (const auto& s : sentences)
    by_bucket[static_cast<size_t>(bench_bucket_of(static_cast<int>(s.size())))].push_back(&s);

  std::vector<std::vector<double>> bucket_secs(kBenchBucketCount);
  std::vector<double> total_secs;
  std::vector<std::vector<std::vector<int>>> last_paths(kBenchBucketCount);
  for (int pass = 0; pass < passes; ++pass) {
    double total = 0.0;
    for (int b = 0; b < kBenchBucketCount; ++b) {
      if (by_bucket[static_cast<size_t>(b)].empty()) continue;
      const auto t0 = std::chrono::steady_clock::now();
      run_batchset(by_bucket[static_cast<size_t>(b)], &last_paths[static_cast<size_t>(b)]);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      bucket_secs[static_cast<size_t>(b)].push_back(secs);
      total += secs;
    }
    total_secs.push_back(total);
  }

  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };

  BenchReport report;
  report.batch_size = batch_size;
  report.threads = threads;
  report.variant = variant_name(model.config().variant);
  report.warmup_sentences = static_cast<int>(warmup.size());
  report.measured_sentences = static_cast<int>(sentences.size());
  report.passes = passes;
  report.precision = sizeof(Scalar) == 4 ? "float32" : "float64";
  for (int b = 0; b < kBenchBucketCount; ++b) {
    BenchBucket bucket;
    bucket.lo = b * kBenchBucketWidth + 1;
    bucket.hi = b + 1 == kBenchBucketCount ? 0 : (b + 1) * kBenchBucketWidth;
    bucket.sentences = static_cast<int>(by_bucket[static_cast<size_t>(b)].size());
    if (bucket.sentences > 0) {
      const double secs = median(bucket_secs[static_cast<size_t>(b)]);
      bucket.sentences_per_sec = secs > 0.0 ? bucket.sentences / secs : 0.0;
    }
    report.buckets.push_back(bucket);
  }
  report.overall_sps = static_cast<double>(sentences.size()) / median(total_secs);

  if (pred_tags) {
    pred_tags->assign(sentences.size(), {});
    std::vector<size_t> cursor(kBenchBucketCount, 0);
    const LabelVocab& labels = model.labels();
    for (size_t i = 0; i < sentences.size(); ++i) {
      const int b = bench_bucket_of(static_cast<int>(sentences[i].size()));
      const auto& path =
          last_paths[static_cast<size_t>(b)][cursor[static_cast<size_t>(b)]++];
      auto& tags = (*pred_tags)[i];
      tags.reserve(path.size());
      for (int id : path) tags.push_back(labels.tag(id));
    }
  }
  return report;
}

}  // namespace softlex
