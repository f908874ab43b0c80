#include "softlex/embeddings.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "softlex/errors.hpp"

namespace softlex {

void fill_uniform(Eigen::Ref<Eigen::MatrixXd> m, double lo, double hi, Rng& rng) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(lo, hi);
}

int EmbeddingTable::row_of(const std::string& key) const {
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  return index_.at(kUnkKey);
}

int EmbeddingTable::push_key(const std::string& key) {
  auto [it, fresh] = index_.try_emplace(key, static_cast<int>(keys_.size()));
  if (fresh) keys_.push_back(key);
  return it->second;
}

EmbeddingTable EmbeddingTable::init_random(const std::vector<std::string>& vocab, int dim,
                                           Rng& rng) {
  if (dim <= 0) throw ConfigError("embeddings: dim must be positive");
  if (vocab.empty()) throw ConfigError("embeddings: empty vocab");
  EmbeddingTable t;
  t.push_key(kUnkKey);
  t.push_key(kNoneKey);
  t.push_key(kEndKey);
  for (const auto& k : vocab) t.push_key(k);
  t.matrix_.resize(static_cast<Eigen::Index>(t.keys_.size()), dim);
  const double b = std::sqrt(3.0 / dim);
  fill_uniform(t.matrix_, -b, b, rng);
  return t;
}

EmbeddingTable EmbeddingTable::load_text(const std::string& path, std::optional<int> expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("embeddings: cannot open " + path);

  std::string line;
  size_t lineno = 0;
  int dim = -1;
  std::vector<std::string> keys;
  std::vector<std::vector<double>> rows;

  auto parse_row = [&](std::string_view sv, const std::string& ctx) {
    size_t sp = sv.find(' ');
    if (sp == std::string_view::npos || sp == 0)
      throw DataError(ctx + ": expected token and values");
    std::string key(sv.substr(0, sp));
    std::vector<double> vals;
    size_t pos = sp;
    while (pos < sv.size()) {
      while (pos < sv.size() && sv[pos] == ' ') ++pos;
      if (pos >= sv.size()) break;
      size_t next = sv.find(' ', pos);
      if (next == std::string_view::npos) next = sv.size();
      std::string tok(sv.substr(pos, next - pos));
      try {
        size_t used = 0;
        vals.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw DataError(ctx + ": bad value '" + tok + "'");
      }
      pos = next;
    }
    if (vals.empty()) throw DataError(ctx + ": no values for token '" + key + "'");
    if (dim < 0) dim = static_cast<int>(vals.size());
    if (static_cast<int>(vals.size()) != dim)
      throw DataError(ctx + ": expected " + std::to_string(dim) + " values, got " +
                      std::to_string(vals.size()));
    keys.push_back(std::move(key));
    rows.push_back(std::move(vals));
  };

  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string ctx = path + ":" + std::to_string(lineno);
    if (first) {
      first = false;
      // a header is exactly two positive integers: count dim
      std::istringstream hs(line);
      long long cnt = 0, hdim = 0;
      std::string extra;
      if ((hs >> cnt >> hdim) && !(hs >> extra) && cnt > 0 && hdim > 0) {
        dim = static_cast<int>(hdim);
        continue;
      }
    }
    parse_row(line, ctx);
  }
  if (keys.empty()) throw DataError("embeddings: no vectors in " + path);
  if (expected_dim && dim != *expected_dim)
    throw DataError("embeddings: " + path + " has dim " + std::to_string(dim) + ", expected " +
                    std::to_string(*expected_dim));

  EmbeddingTable t;
  std::vector<const std::vector<double>*> kept;
  for (size_t i = 0; i < keys.size(); ++i) {
    if (t.index_.count(keys[i])) continue;  // duplicate token, first wins
    t.push_key(keys[i]);
    kept.push_back(&rows[i]);
  }
  for (const char* sp : {kUnkKey, kNoneKey, kEndKey}) {
    if (!t.index_.count(sp)) {
      t.push_key(sp);
      kept.push_back(nullptr);  // zero row, trained later
    }
  }
  t.matrix_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.keys_.size()), dim);
  for (size_t r = 0; r < kept.size(); ++r)
    if (kept[r])
      for (int c = 0; c < dim; ++c)
        t.matrix_(static_cast<Eigen::Index>(r), c) = (*kept[r])[static_cast<size_t>(c)];
  return t;
}

void EmbeddingTable::save_text(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("embeddings: cannot write " + path);
  out << size() << ' ' << dim() << '\n';
  char buf[64];
  for (int r = 0; r < size(); ++r) {
    out << keys_[static_cast<size_t>(r)];
    for (int c = 0; c < dim(); ++c) {
      std::snprintf(buf, sizeof buf, "%.9g", matrix_(r, c));
      out << ' ' << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("embeddings: write failed for " + path);
}

}  // namespace softlex
