#include "softlex/data.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "softlex/errors.hpp"
#include "softlex/unicode.hpp"

namespace softlex {

namespace {

bool tag_in_scheme(const std::string& tag) {
  if (tag == "O") return true;
  return tag.size() >= 3 && tag[1] == '-' &&
         (tag[0] == 'B' || tag[0] == 'M' || tag[0] == 'E' || tag[0] == 'S');
}

}  // namespace

std::vector<RawSentence> load_conll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("conll: cannot open " + path);
  std::vector<RawSentence> out;
  RawSentence cur;
  std::string line;
  size_t lineno = 0, first_line = 0;
  auto flush = [&] {
    if (!cur.chars.empty()) {
      if (encode_tags(decode_entities(cur.tags), static_cast<int>(cur.tags.size())) != cur.tags)
        throw DataError(path + ":" + std::to_string(first_line) +
                        ": tag sequence is not scheme-valid");
      out.push_back(std::move(cur));
    }
    cur = {};
    first_line = 0;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    std::string ctx = path + ":" + std::to_string(lineno);
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(ctx + ": expected char<TAB>tag");
    std::u32string ch = utf8_decode(std::string_view(line).substr(0, tab), ctx);
    if (ch.size() != 1) throw DataError(ctx + ": expected exactly one character before the tab");
    std::string tag = line.substr(tab + 1);
    if (!tag_in_scheme(tag)) throw DataError(ctx + ": tag '" + tag + "' outside the BMES scheme");
    if (cur.chars.empty()) first_line = lineno;
    cur.chars.push_back(ch[0]);
    cur.tags.push_back(std::move(tag));
  }
  flush();
  if (out.empty()) throw DataError("conll: no sentences in " + path);
  return out;
}

void save_conll(const std::string& path, const std::vector<RawSentence>& sentences) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("conll: cannot write " + path);
  for (size_t s = 0; s < sentences.size(); ++s) {
    const auto& sent = sentences[s];
    if (sent.chars.size() != sent.tags.size())
      throw IntegrityError("conll: sentence " + std::to_string(s + 1) + " length mismatch");
    for (size_t t = 0; t < sent.chars.size(); ++t)
      out << utf8_encode(sent.chars[t]) << '\t' << sent.tags[t] << '\n';
    out << '\n';
  }
  if (!out) throw DataError("conll: write failed for " + path);
}

LabelVocab LabelVocab::build(const std::vector<RawSentence>& sentences) {
  std::set<std::string> uniq;
  for (const auto& s : sentences) uniq.insert(s.tags.begin(), s.tags.end());
  return from_tags(std::vector<std::string>(uniq.begin(), uniq.end()));
}

LabelVocab LabelVocab::from_tags(std::vector<std::string> tags) {
  if (tags.empty()) throw ConfigError("labels: empty tag set");
  LabelVocab v;
  std::sort(tags.begin(), tags.end());
  tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
  v.tags_ = std::move(tags);
  for (size_t i = 0; i < v.tags_.size(); ++i) v.index_.emplace(v.tags_[i], static_cast<int>(i));
  return v;
}

int LabelVocab::id_of(const std::string& tag) const {
  auto it = index_.find(tag);
  if (it == index_.end()) throw DataError("labels: unknown tag '" + tag + "'");
  return it->second;
}

namespace {

// Splits "B-PER" into role 'B' and type "PER"; returns role 0 for anything
// outside the scheme.
std::pair<char, std::string_view> split_tag(const std::string& tag) {
  if (tag.size() >= 3 && tag[1] == '-' &&
      (tag[0] == 'B' || tag[0] == 'M' || tag[0] == 'E' || tag[0] == 'S'))
    return {tag[0], std::string_view(tag).substr(2)};
  return {0, {}};
}

}  // namespace

std::vector<Entity> decode_entities(const std::vector<std::string>& tags) {
  std::vector<Entity> out;
  const int n = static_cast<int>(tags.size());
  int t = 0;
  while (t < n) {
    auto [role, type] = split_tag(tags[static_cast<size_t>(t)]);
    if (role == 'S') {
      out.push_back(Entity{std::string(type), t + 1, t + 1});
      ++t;
      continue;
    }
    if (role != 'B') {
      ++t;
      continue;
    }
    int j = t + 1;
    while (j < n) {
      auto [r2, t2] = split_tag(tags[static_cast<size_t>(j)]);
      if (r2 == 'M' && t2 == type) {
        ++j;
        continue;
      }
      if (r2 == 'E' && t2 == type) {
        out.push_back(Entity{std::string(type), t + 1, j + 1});
        ++j;
      }
      break;
    }
    // either consumed a full entity or hit the breaking position; rescan there
    t = std::max(j, t + 1);
  }
  return out;
}

std::vector<std::string> encode_tags(const std::vector<Entity>& entities, int n) {
  std::vector<std::string> tags(static_cast<size_t>(n), "O");
  std::vector<bool> used(static_cast<size_t>(n), false);
  for (const auto& e : entities) {
    if (e.start < 1 || e.end > n || e.start > e.end)
      throw IntegrityError("encode_tags: entity out of range");
    for (int t = e.start; t <= e.end; ++t) {
      if (used[static_cast<size_t>(t - 1)]) throw IntegrityError("encode_tags: entities overlap");
      used[static_cast<size_t>(t - 1)] = true;
    }
    if (e.start == e.end) {
      tags[static_cast<size_t>(e.start - 1)] = "S-" + e.type;
      continue;
    }
    tags[static_cast<size_t>(e.start - 1)] = "B-" + e.type;
    tags[static_cast<size_t>(e.end - 1)] = "E-" + e.type;
    for (int t = e.start + 1; t < e.end; ++t) tags[static_cast<size_t>(t - 1)] = "M-" + e.type;
  }
  return tags;
}

void EvalResult::add(const std::vector<std::string>& gold_tags,
                     const std::vector<std::string>& pred_tags) {
  if (gold_tags.size() != pred_tags.size())
    throw IntegrityError("eval: gold and prediction lengths differ");
  auto gold = decode_entities(gold_tags);
  auto pred = decode_entities(pred_tags);
  std::set<Entity> gold_set(gold.begin(), gold.end());
  for (const auto& e : pred) {
    auto it = gold_set.find(e);
    if (it != gold_set.end()) {
      ++overall.tp;
      ++per_type[e.type].tp;
      gold_set.erase(it);
    } else {
      ++overall.fp;
      ++per_type[e.type].fp;
    }
  }
  for (const auto& e : gold_set) {
    ++overall.fn;
    ++per_type[e.type].fn;
  }
}

}  // namespace softlex
