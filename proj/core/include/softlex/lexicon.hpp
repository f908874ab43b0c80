#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace softlex {

// A matched lexicon occurrence. Character indices are 1-based and inclusive
// on both ends, mirroring the w_{i,j} sub-sequence convention used across the
// feature definitions; span (i,i) is a single-character match.
struct Span {
  int start = 0;
  int end = 0;
  int word_id = -1;

  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span& a, const Span& b) {
    return std::tie(a.start, a.end, a.word_id) <=> std::tie(b.start, b.end, b.word_id);
  }
  int length() const { return end - start + 1; }
};

// Immutable word list compiled into a prefix trie. Word ids are dense in
// [0, size()) in first-occurrence order. Safe for concurrent reads.
class Lexicon {
 public:
  // Builds from UTF-8 entries. Entries are trimmed; duplicates keep the first
  // id; an entry with interior whitespace or an empty entry is rejected with
  // a diagnostic naming its (1-based) position in `entries`.
  static Lexicon build(const std::vector<std::string>& entries);

  // Loads the `word[\tcount]` one-per-line UTF-8 file format. Pre-supplied
  // counts (if any) are kept for FreqTable seeding.
  static Lexicon load(const std::string& path);

  int size() const { return static_cast<int>(words_.size()); }
  int max_word_len() const { return max_len_; }

  // -1 when absent.
  int id_of(std::u32string_view word) const;
  bool contains(std::u32string_view word) const { return id_of(word) >= 0; }

  const std::u32string& word(int id) const { return words_.at(static_cast<size_t>(id)); }
  std::string word_utf8(int id) const;
  const std::vector<std::u32string>& words() const { return words_; }

  // All (i,j) with sentence[i..j] in the lexicon, sorted by (start, end).
  // Per-position bounded trie walk, O(len * max_word_len).
  std::vector<Span> match_spans(std::u32string_view sentence) const;

  // Counts from the lexicon file's optional TAB column; empty when the file
  // carried none (or the lexicon was built in memory).
  const std::vector<int64_t>& seed_counts() const { return seed_counts_; }

 private:
  struct TrieNode {
    std::map<char32_t, int32_t> next;
    int32_t word_id = -1;
  };

  void insert(const std::u32string& w, int id);

  std::vector<TrieNode> trie_{TrieNode{}};
  std::vector<std::u32string> words_;
  std::unordered_map<std::u32string, int> index_;
  std::vector<int64_t> seed_counts_;
  int max_len_ = 0;
};

// word_id -> occurrence count z(w) over a statistical corpus. An occurrence
// is not counted when its span is strictly contained inside another matched
// span of the same sentence; partial overlap never suppresses a count.
// Immutable after construction; safe for concurrent reads.
class FreqTable {
 public:
  FreqTable() = default;
  explicit FreqTable(int lexicon_size) : counts_(static_cast<size_t>(lexicon_size), 0) {}

  static FreqTable count(const Lexicon& lex, const std::vector<std::u32string>& corpus);

  // Seeds counts from the lexicon file's TAB column (all zero when absent).
  static FreqTable from_seed(const Lexicon& lex);

  static FreqTable from_counts(std::vector<int64_t> counts, int64_t total_sentences);

  static FreqTable load(const std::string& path, const Lexicon& lex);

  // `word\tcount` for every lexicon word in id order; counts mandatory.
  void save(const std::string& path, const Lexicon& lex) const;

  int64_t count_of(int word_id) const {
    if (word_id < 0 || static_cast<size_t>(word_id) >= counts_.size()) return 0;
    return counts_[static_cast<size_t>(word_id)];
  }
  int size() const { return static_cast<int>(counts_.size()); }
  int64_t total_sentences() const { return total_sentences_; }

  void add_sentence(const Lexicon& lex, std::u32string_view sentence);

 private:
  std::vector<int64_t> counts_;
  int64_t total_sentences_ = 0;
};

}  // namespace softlex
