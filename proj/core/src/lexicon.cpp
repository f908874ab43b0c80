#include "softlex/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "softlex/errors.hpp"
#include "softlex/unicode.hpp"

namespace softlex {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

bool has_whitespace(std::u32string_view w) {
  for (char32_t c : w)
    if (c == U' ' || c == U'\t' || c == U'\r' || c == U'\n') return true;
  return false;
}

}  // namespace

void Lexicon::insert(const std::u32string& w, int id) {
  int32_t node = 0;
  for (char32_t c : w) {
    auto it = trie_[static_cast<size_t>(node)].next.find(c);
    if (it == trie_[static_cast<size_t>(node)].next.end()) {
      int32_t child = static_cast<int32_t>(trie_.size());
      trie_[static_cast<size_t>(node)].next.emplace(c, child);
      trie_.emplace_back();
      node = child;
    } else {
      node = it->second;
    }
  }
  trie_[static_cast<size_t>(node)].word_id = id;
}

Lexicon Lexicon::build(const std::vector<std::string>& entries) {
  if (entries.empty()) throw ConfigError("lexicon: empty word list");
  Lexicon lex;
  for (size_t i = 0; i < entries.size(); ++i) {
    std::string_view raw = trim(entries[i]);
    if (raw.empty())
      throw ConfigError("lexicon: entry " + std::to_string(i + 1) + " is empty");
    std::u32string w = utf8_decode(raw, "lexicon entry " + std::to_string(i + 1));
    if (has_whitespace(w))
      throw ConfigError("lexicon: entry " + std::to_string(i + 1) + " contains whitespace");
    if (lex.index_.count(w)) continue;
    int id = static_cast<int>(lex.words_.size());
    lex.index_.emplace(w, id);
    lex.words_.push_back(w);
    lex.insert(w, id);
    lex.max_len_ = std::max(lex.max_len_, static_cast<int>(w.size()));
  }
  return lex;
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("lexicon: cannot open " + path);
  Lexicon lex;
  std::string line;
  size_t lineno = 0;
  bool any_count = false;
  std::vector<int64_t> counts;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    std::string ctx = path + ":" + std::to_string(lineno);
    std::string_view word_part = sv;
    int64_t cnt = 0;
    bool has_cnt = false;
    if (auto tab = sv.find('\t'); tab != std::string_view::npos) {
      word_part = trim(sv.substr(0, tab));
      std::string_view cnt_part = trim(sv.substr(tab + 1));
      if (word_part.empty()) throw DataError(ctx + ": empty word before count");
      auto [p, ec] = std::from_chars(cnt_part.data(), cnt_part.data() + cnt_part.size(), cnt);
      if (ec != std::errc{} || p != cnt_part.data() + cnt_part.size() || cnt < 0)
        throw DataError(ctx + ": bad count '" + std::string(cnt_part) + "'");
      has_cnt = true;
    }
    std::u32string w = utf8_decode(word_part, ctx);
    if (has_whitespace(w)) throw DataError(ctx + ": word contains whitespace");
    if (lex.index_.count(w)) continue;
    int id = static_cast<int>(lex.words_.size());
    lex.index_.emplace(w, id);
    lex.words_.push_back(w);
    lex.insert(w, id);
    lex.max_len_ = std::max(lex.max_len_, static_cast<int>(w.size()));
    counts.push_back(cnt);
    any_count = any_count || has_cnt;
  }
  if (lex.words_.empty()) throw DataError("lexicon: no words in " + path);
  if (any_count) lex.seed_counts_ = std::move(counts);
  return lex;
}

int Lexicon::id_of(std::u32string_view word) const {
  auto it = index_.find(std::u32string(word));
  return it == index_.end() ? -1 : it->second;
}

std::string Lexicon::word_utf8(int id) const { return utf8_encode(word(id)); }

std::vector<Span> Lexicon::match_spans(std::u32string_view sentence) const {
  std::vector<Span> out;
  const int n = static_cast<int>(sentence.size());
  for (int i = 0; i < n; ++i) {
    int32_t node = 0;
    const int stop = std::min(n, i + max_len_);
    for (int j = i; j < stop; ++j) {
      auto it = trie_[static_cast<size_t>(node)].next.find(sentence[static_cast<size_t>(j)]);
      if (it == trie_[static_cast<size_t>(node)].next.end()) break;
      node = it->second;
      int32_t wid = trie_[static_cast<size_t>(node)].word_id;
      if (wid >= 0) out.push_back(Span{i + 1, j + 1, wid});
    }
  }
  // The scan already emits in (start, end) order; keep the sort as a
  // guarantee of the documented contract.
  std::sort(out.begin(), out.end());
  return out;
}

FreqTable FreqTable::count(const Lexicon& lex, const std::vector<std::u32string>& corpus) {
  FreqTable t(lex.size());
  for (const auto& s : corpus) t.add_sentence(lex, s);
  return t;
}

FreqTable FreqTable::from_counts(std::vector<int64_t> counts, int64_t total_sentences) {
  FreqTable t;
  for (int64_t c : counts)
    if (c < 0) throw IntegrityError("freq: negative count");
  t.counts_ = std::move(counts);
  t.total_sentences_ = total_sentences;
  return t;
}

FreqTable FreqTable::from_seed(const Lexicon& lex) {
  FreqTable t(lex.size());
  const auto& seeds = lex.seed_counts();
  if (!seeds.empty()) {
    if (static_cast<int>(seeds.size()) != lex.size())
      throw IntegrityError("freq: seed count size mismatch");
    t.counts_.assign(seeds.begin(), seeds.end());
  }
  return t;
}

void FreqTable::add_sentence(const Lexicon& lex, std::u32string_view sentence) {
  if (counts_.size() != static_cast<size_t>(lex.size()))
    throw IntegrityError("freq: table not sized for this lexicon");
  auto spans = lex.match_spans(sentence);
  ++total_sentences_;
  for (size_t a = 0; a < spans.size(); ++a) {
    bool covered = false;
    for (size_t b = 0; b < spans.size(); ++b) {
      if (a == b) continue;
      // strictly contained: inside the other span and not equal to it
      if (spans[b].start <= spans[a].start && spans[a].end <= spans[b].end &&
          (spans[b].start < spans[a].start || spans[a].end < spans[b].end)) {
        covered = true;
        break;
      }
    }
    if (!covered) ++counts_[static_cast<size_t>(spans[a].word_id)];
  }
}

FreqTable FreqTable::load(const std::string& path, const Lexicon& lex) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("freq: cannot open " + path);
  FreqTable t(lex.size());
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    std::string ctx = path + ":" + std::to_string(lineno);
    auto tab = sv.find('\t');
    if (tab == std::string_view::npos) throw DataError(ctx + ": expected word<TAB>count");
    std::u32string w = utf8_decode(trim(sv.substr(0, tab)), ctx);
    std::string_view cnt_part = trim(sv.substr(tab + 1));
    int64_t cnt = 0;
    auto [p, ec] = std::from_chars(cnt_part.data(), cnt_part.data() + cnt_part.size(), cnt);
    if (ec != std::errc{} || p != cnt_part.data() + cnt_part.size() || cnt < 0)
      throw DataError(ctx + ": bad count '" + std::string(cnt_part) + "'");
    int id = lex.id_of(w);
    if (id < 0) throw DataError(ctx + ": word not in lexicon");
    t.counts_[static_cast<size_t>(id)] = cnt;
  }
  return t;
}

void FreqTable::save(const std::string& path, const Lexicon& lex) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("freq: cannot write " + path);
  for (int id = 0; id < lex.size(); ++id)
    out << lex.word_utf8(id) << '\t' << count_of(id) << '\n';
  if (!out) throw DataError("freq: write failed for " + path);
}

}  // namespace softlex
