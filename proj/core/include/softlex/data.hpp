#pragma once

#include <map>
#include <string>
#include <vector>

namespace softlex {

// One labeled sentence as read from disk: characters plus their tag strings
// (BMES-style "B-TYPE"/"M-TYPE"/"E-TYPE"/"S-TYPE" and "O").
struct RawSentence {
  std::u32string chars;
  std::vector<std::string> tags;
};

// char<TAB>tag lines, blank line between sentences. A line must hold exactly
// one character before the tab; every tag must be "O" or role-TYPE with role
// in {B,M,E,S}, and each sentence's tag sequence must be scheme-valid (its
// decoded entities re-encode to the same tags).
std::vector<RawSentence> load_conll(const std::string& path);
void save_conll(const std::string& path, const std::vector<RawSentence>& sentences);

// Tag ids sorted lexicographically, so the id assignment depends only on the
// tag set, not on corpus order.
class LabelVocab {
 public:
  static LabelVocab build(const std::vector<RawSentence>& sentences);
  static LabelVocab from_tags(std::vector<std::string> tags);

  int size() const { return static_cast<int>(tags_.size()); }
  int id_of(const std::string& tag) const;  // DataError when unknown
  const std::string& tag(int id) const { return tags_.at(static_cast<size_t>(id)); }
  const std::vector<std::string>& tags() const { return tags_; }

 private:
  std::vector<std::string> tags_;
  std::map<std::string, int> index_;
};

// A decoded mention: 1-based inclusive character span plus its type.
struct Entity {
  std::string type;
  int start = 0;
  int end = 0;
  friend bool operator==(const Entity&, const Entity&) = default;
  friend auto operator<=>(const Entity& a, const Entity& b) {
    return std::tie(a.start, a.end, a.type) <=> std::tie(b.start, b.end, b.type);
  }
};

// Strict BMES decoding. An entity is S-X, or B-X M-X* E-X with one type
// throughout. A fragment that breaks the pattern is dropped and scanning
// resumes at the position that broke it. Tags outside the scheme count as O.
std::vector<Entity> decode_entities(const std::vector<std::string>& tags);

// Entities (non-overlapping, in range) back to a length-n tag sequence,
// everything else "O". Inverse of decode_entities on valid sequences.
std::vector<std::string> encode_tags(const std::vector<Entity>& entities, int n);

struct PrfCounts {
  long long tp = 0, fp = 0, fn = 0;
  double precision() const { return tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp); }
  double recall() const { return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn); }
  double f1() const {
    double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
};

// Entity-level scores: a prediction counts only on exact (type, span) match.
struct EvalResult {
  PrfCounts overall;
  std::map<std::string, PrfCounts> per_type;
  double sentences_per_sec = 0.0;

  void add(const std::vector<std::string>& gold_tags, const std::vector<std::string>& pred_tags);
};

}  // namespace softlex
