#include "softlex/synth.hpp"

#include <set>

#include "softlex/errors.hpp"
#include "softlex/lexicon.hpp"
#include "softlex/unicode.hpp"

namespace softlex {

namespace {

constexpr int kAlphabet = 48;

char32_t alpha_char(int i) { return static_cast<char32_t>(0x4E00 + i); }

std::u32string random_word(Rng& rng, int len) {
  std::u32string w;
  w.reserve(static_cast<size_t>(len));
  for (int i = 0; i < len; ++i) w.push_back(alpha_char(rng.uniform_int(0, kAlphabet - 1)));
  return w;
}

bool contains(const std::u32string& hay, const std::u32string& needle) {
  return hay.find(needle) != std::u32string::npos;
}

// Rank-weighted pick: weight of item i is 1/(i+1), so a few words dominate
// and the frequency table ends up skewed like natural text.
class ZipfPicker {
 public:
  explicit ZipfPicker(size_t n) {
    cum_.reserve(n);
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      total += 1.0 / static_cast<double>(i + 1);
      cum_.push_back(total);
    }
  }
  size_t pick(Rng& rng) const {
    const double u = rng.uniform() * cum_.back();
    size_t lo = 0, hi = cum_.size() - 1;
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      if (cum_[mid] < u)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;
  }

 private:
  std::vector<double> cum_;
};

struct WordInventory {
  std::vector<std::vector<std::u32string>> entities;  // [type][rank]
  std::vector<std::u32string> distractors;
  std::vector<std::string> lexicon_words;
  Lexicon entity_matcher;
};

WordInventory build_words(const SynthConfig& cfg, Rng& rng) {
  WordInventory inv;
  std::set<std::u32string> used;
  std::vector<std::u32string> all_entities;

  auto entity_safe = [&](const std::u32string& w) {
    if (used.count(w)) return false;
    for (const auto& e : all_entities)
      if (contains(w, e) || contains(e, w)) return false;
    return true;
  };

  inv.entities.resize(3);
  for (int type = 0; type < 3; ++type) {
    while (static_cast<int>(inv.entities[static_cast<size_t>(type)].size()) <
           cfg.entity_words_per_type) {
      std::u32string w = random_word(rng, 2 + rng.uniform_int(0, 2));
      if (!entity_safe(w)) continue;
      used.insert(w);
      all_entities.push_back(w);
      inv.entities[static_cast<size_t>(type)].push_back(w);
    }
  }

  auto distractor_safe = [&](const std::u32string& w) {
    if (used.count(w)) return false;
    for (const auto& e : all_entities)
      if (contains(w, e)) return false;  // would corrupt gold annotations
    return true;
  };

  int made = 0;
  while (made < cfg.single_char_distractors) {
    std::u32string w = random_word(rng, 1);
    if (!distractor_safe(w)) continue;
    used.insert(w);
    inv.distractors.push_back(w);
    ++made;
  }
  made = 0;
  while (made < cfg.substring_distractors) {
    const auto& src = all_entities[static_cast<size_t>(
        rng.uniform_int(0, static_cast<int>(all_entities.size()) - 1))];
    const int len = 1 + rng.uniform_int(0, static_cast<int>(src.size()) - 2);
    const int start = rng.uniform_int(0, static_cast<int>(src.size()) - len);
    std::u32string w = src.substr(static_cast<size_t>(start), static_cast<size_t>(len));
    if (!distractor_safe(w)) continue;
    used.insert(w);
    inv.distractors.push_back(w);
    ++made;
  }
  made = 0;
  while (made < cfg.random_distractors) {
    std::u32string w = random_word(rng, 2 + rng.uniform_int(0, 2));
    if (!distractor_safe(w)) continue;
    used.insert(w);
    inv.distractors.push_back(w);
    ++made;
  }

  for (const auto& per_type : inv.entities)
    for (const auto& w : per_type) inv.lexicon_words.push_back(utf8_encode(w));
  for (const auto& w : inv.distractors) inv.lexicon_words.push_back(utf8_encode(w));
  inv.entity_matcher = Lexicon::build([&] {
    std::vector<std::string> es;
    for (const auto& per_type : inv.entities)
      for (const auto& w : per_type) es.push_back(utf8_encode(w));
    return es;
  }());
  return inv;
}

struct SentenceDraft {
  std::u32string chars;
  std::vector<Entity> entities;
};

SentenceDraft draft_sentence(const WordInventory& inv, const ZipfPicker& entity_pick,
                             const ZipfPicker& distractor_pick, Rng& rng, int target_len,
                             bool with_entities) {
  SentenceDraft d;
  while (static_cast<int>(d.chars.size()) < target_len) {
    const double r = rng.uniform();
    if (with_entities && r < 0.35) {
      const int type = rng.uniform_int(0, 2);
      const auto& w = inv.entities[static_cast<size_t>(type)][entity_pick.pick(rng)];
      const int start = static_cast<int>(d.chars.size()) + 1;
      d.entities.push_back(
          Entity{kSynthTypes[type], start, start + static_cast<int>(w.size()) - 1});
      d.chars += w;
    } else if (r < 0.75) {
      d.chars += inv.distractors[distractor_pick.pick(rng)];
    } else {
      const int k = 1 + rng.uniform_int(0, 2);
      for (int i = 0; i < k; ++i) d.chars.push_back(alpha_char(rng.uniform_int(0, kAlphabet - 1)));
    }
  }
  return d;
}

// A draft is usable only when entity words occur exactly at the gold
// mentions; accidental occurrences (across segment boundaries, inside random
// runs) would make the annotation wrong, so those drafts are thrown away.
bool consistent(const WordInventory& inv, const SentenceDraft& d) {
  std::set<std::pair<int, int>> gold;
  for (const auto& e : d.entities) gold.emplace(e.start, e.end);
  auto spans = inv.entity_matcher.match_spans(d.chars);
  if (spans.size() != gold.size()) return false;
  for (const auto& sp : spans)
    if (!gold.count({sp.start, sp.end})) return false;
  return true;
}

RawSentence labeled_sentence(const WordInventory& inv, const ZipfPicker& ep, const ZipfPicker& dp,
                             Rng& rng, int min_len, int max_len) {
  for (int attempt = 0; attempt < 500; ++attempt) {
    const int target = rng.uniform_int(min_len, max_len);
    SentenceDraft d = draft_sentence(inv, ep, dp, rng, target, true);
    if (!consistent(inv, d)) continue;
    RawSentence s;
    s.chars = std::move(d.chars);
    s.tags = encode_tags(d.entities, static_cast<int>(s.chars.size()));
    return s;
  }
  throw IntegrityError("synth: could not draw a consistent sentence in 500 attempts");
}

}  // namespace

SynthCorpus generate_corpus(const SynthConfig& cfg) {
  if (cfg.entity_words_per_type < 1 || cfg.min_len < 4 || cfg.max_len < cfg.min_len)
    throw ConfigError("synth: bad generator settings");
  Rng rng(cfg.seed);
  WordInventory inv = build_words(cfg, rng);
  ZipfPicker ep(static_cast<size_t>(cfg.entity_words_per_type));
  ZipfPicker dp(inv.distractors.size());

  SynthCorpus out;
  out.lexicon_words = inv.lexicon_words;
  auto fill = [&](std::vector<RawSentence>& dst, int count) {
    dst.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i)
      dst.push_back(labeled_sentence(inv, ep, dp, rng, cfg.min_len, cfg.max_len));
  };
  fill(out.train, cfg.train_sentences);
  fill(out.dev, cfg.dev_sentences);
  fill(out.test, cfg.test_sentences);
  return out;
}

std::vector<std::u32string> generate_bench_sentences(const SynthConfig& cfg, int count,
                                                     int min_len, int max_len, uint64_t seed) {
  if (count < 1 || min_len < 1 || max_len < min_len)
    throw ConfigError("synth: bad bench settings");
  Rng word_rng(cfg.seed);
  WordInventory inv = build_words(cfg, word_rng);
  ZipfPicker ep(static_cast<size_t>(cfg.entity_words_per_type));
  ZipfPicker dp(inv.distractors.size());

  Rng rng(seed);
  std::vector<std::u32string> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int target = rng.uniform_int(min_len, max_len);
    SentenceDraft d = draft_sentence(inv, ep, dp, rng, target, true);
    d.chars.resize(static_cast<size_t>(target));  // exact length, even buckets
    out.push_back(std::move(d.chars));
  }
  return out;
}

}  // namespace softlex
