#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "softlex/data.hpp"
#include "softlex/rng.hpp"

namespace softlex {

// Synthetic NER corpus over a small CJK-range alphabet. Entity mentions are
// drawn from per-type word inventories; the lexicon additionally carries
// distractor words (single characters, substrings of entity words, random
// words) so that lexicon matches are ambiguous at the character level.
// Sentences are rejection-sampled so no entity word occurs outside a gold
// mention, keeping the gold annotation consistent.
struct SynthConfig {
  int entity_words_per_type = 120;  // per type, lengths 2..4
  int single_char_distractors = 20;
  int substring_distractors = 60;
  int random_distractors = 60;
  int train_sentences = 3000;
  int dev_sentences = 500;
  int test_sentences = 500;
  int min_len = 10;
  int max_len = 30;
  uint64_t seed = 42;
};

struct SynthCorpus {
  std::vector<std::string> lexicon_words;  // entity words then distractors
  std::vector<RawSentence> train, dev, test;
};

inline constexpr const char* kSynthTypes[3] = {"PER", "LOC", "ORG"};

SynthCorpus generate_corpus(const SynthConfig& cfg);

// Unlabeled sentences from the same generator, lengths uniform in
// [min_len, max_len]; for throughput measurement across length buckets.
std::vector<std::u32string> generate_bench_sentences(const SynthConfig& cfg, int count,
                                                     int min_len, int max_len, uint64_t seed);

}  // namespace softlex
