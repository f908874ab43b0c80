#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "softlex/rng.hpp"

namespace softlex {

inline constexpr const char* kUnkKey = "<unk>";
inline constexpr const char* kNoneKey = "<none>";
inline constexpr const char* kEndKey = "<end>";

// Dense lookup table keyed by UTF-8 tokens. Three special tokens are always
// present: "<unk>" (fallback for missing keys), "<none>" (empty word-set
// filler), "<end>" (sentence-final bigram pairing). All rows are trainable.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  // Fresh table over the specials plus `vocab` (deduplicated, order kept),
  // every row drawn uniform on +/- sqrt(3/dim).
  static EmbeddingTable init_random(const std::vector<std::string>& vocab, int dim, Rng& rng);

  // word2vec text format: optional "count dim" header, then
  // "token v1 v2 ... vdim" lines. Missing specials are appended with zero
  // rows. A parsed dim different from expected_dim is an error.
  static EmbeddingTable load_text(const std::string& path,
                                  std::optional<int> expected_dim = std::nullopt);

  // Same format with the header line, values at %.9g. save -> load -> save
  // reproduces the bytes exactly.
  void save_text(const std::string& path) const;

  int dim() const { return static_cast<int>(matrix_.cols()); }
  int size() const { return static_cast<int>(matrix_.rows()); }

  int row_of(const std::string& key) const;  // the <unk> row when absent
  bool has(const std::string& key) const { return index_.count(key) > 0; }
  const std::string& key(int row) const { return keys_.at(static_cast<size_t>(row)); }
  const std::vector<std::string>& keys() const { return keys_; }

  Eigen::MatrixXd& matrix() { return matrix_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

 private:
  int push_key(const std::string& key);

  std::vector<std::string> keys_;
  std::unordered_map<std::string, int> index_;
  Eigen::MatrixXd matrix_;  // size() x dim, one row per key
};

void fill_uniform(Eigen::Ref<Eigen::MatrixXd> m, double lo, double hi, Rng& rng);

}  // namespace softlex
