#pragma once

#include <array>
#include <string>
#include <vector>

#include "softlex/lexicon.hpp"

namespace softlex {

// Word-set groups per character position: words Beginning here, continuing
// through the Middle, Ending here, or matching this Single character.
enum class Group : int { B = 0, M = 1, E = 2, S = 3 };
inline constexpr int kNumGroups = 4;
inline constexpr const char* kGroupNames[kNumGroups] = {"B", "M", "E", "S"};

// Sentinel filler for an empty group, so every group always yields at least
// one embedding row.
inline constexpr int kNoneWord = -1;

// The four word-id sets at one character position. Ids are sorted ascending;
// an empty group is stored as exactly {kNoneWord}.
struct WordSets {
  std::array<std::vector<int>, kNumGroups> sets;

  const std::vector<int>& of(Group g) const { return sets[static_cast<size_t>(g)]; }
  std::vector<int>& of(Group g) { return sets[static_cast<size_t>(g)]; }
  bool empty_group(Group g) const {
    const auto& s = of(g);
    return s.size() == 1 && s[0] == kNoneWord;
  }
  friend bool operator==(const WordSets&, const WordSets&) = default;
};

// Per-character sets for the whole sentence, built from matched spans.
// Position t gets: B += words starting at t+1 with length > 1, M += words
// strictly covering t+1 in their interior, E += words ending at t+1 with
// length > 1, S += single-character words matching at t+1.
std::vector<WordSets> bmes_sets(const std::vector<Span>& spans, int sentence_len);

// Inverse of bmes_sets: reconstructs the exact span set. Throws
// IntegrityError if the input is not a valid image (cross-checked by
// rebuilding the sets from the answer).
std::vector<Span> restore_spans(const std::vector<WordSets>& sets, const Lexicon& lex);

// Collapsed five-flag encoding {B,M,E,S,O} per character. O is set only when
// none of the other four is. Order: B,M,E,S,O.
struct SoftwordFlags {
  std::array<bool, 5> flag{};
  friend bool operator==(const SoftwordFlags&, const SoftwordFlags&) = default;
};
std::vector<SoftwordFlags> exsoftword_flags(const std::vector<Span>& spans, int sentence_len);

enum class Pooling { Mean, Weighted };
// Weighted pooling divides by the combined mass of all four groups (one
// shared Z per position) by default; PerGroup renormalizes each group alone.
enum class Normalization { Overall, PerGroup };

const char* pooling_name(Pooling p);
Pooling pooling_from_name(const std::string& name);
const char* normalization_name(Normalization n);
Normalization normalization_from_name(const std::string& name);

struct PoolOptions {
  Pooling pooling = Pooling::Weighted;
  Normalization normalization = Normalization::Overall;
  bool drop_m_group = false;         // exclude M from both the output and Z
  bool merge_groups = false;         // sum the pooled group vectors into one
  int64_t none_frequency = 1;        // z assigned to the NONE filler
  int64_t unseen_word_floor = 1;     // effective z = max(raw count, floor)

  friend bool operator==(const PoolOptions&, const PoolOptions&) = default;
};

// One summand of a pooled group vector: coeff * embedding_row(word_id).
// kNoneWord rows refer to the dedicated none embedding.
struct PoolTerm {
  int word_id;
  double coeff;
  friend bool operator==(const PoolTerm&, const PoolTerm&) = default;
};

// Pooling weights for every output vector at one position. groups.size() is
// 4 normally (B, M, E, S order) and 3 with drop_m_group. Weighted pooling
// uses coeff = 4 * z(w) / Z; mean pooling uses coeff = 1/|set|. Under
// weighted pooling with overall normalization the coefficients of all groups
// combined sum to exactly 4. merge_groups folds the per-group term lists
// into a single list, i.e. the sum of the pooled group vectors.
struct PoolWeights {
  std::vector<std::vector<PoolTerm>> groups;
};

PoolWeights pool_weights(const WordSets& sets, const FreqTable& freq, const PoolOptions& opt);

// Number of word-embedding copies concatenated after the char vector.
int pooled_group_count(const PoolOptions& opt);

// Rebuilds the per-character sets, flags and weights for inspection. Columns:
// 1-based position, character, B/M/E/S members ("<none>" for the filler,
// comma-joined), ExSoftword flags as a 5-char bitstring.
void dump_features(std::ostream& out, std::u32string_view sentence, const Lexicon& lex,
                   const std::vector<WordSets>& sets, const std::vector<SoftwordFlags>& flags);

}  // namespace softlex
