#include "softlex/encoder.hpp"

#include <algorithm>
#include <ostream>

#include "softlex/embeddings.hpp"
#include "softlex/errors.hpp"
#include "softlex/unicode.hpp"

namespace softlex {

namespace {

void finalize(std::vector<int>& s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  if (s.empty()) s.push_back(kNoneWord);
}

}  // namespace

const char* pooling_name(Pooling p) { return p == Pooling::Mean ? "mean" : "weighted"; }

Pooling pooling_from_name(const std::string& name) {
  if (name == "mean") return Pooling::Mean;
  if (name == "weighted") return Pooling::Weighted;
  throw ConfigError("pool: unknown pooling '" + name + "'");
}

const char* normalization_name(Normalization n) {
  return n == Normalization::Overall ? "overall" : "per-group";
}

Normalization normalization_from_name(const std::string& name) {
  if (name == "overall") return Normalization::Overall;
  if (name == "per-group") return Normalization::PerGroup;
  throw ConfigError("pool: unknown normalization '" + name + "'");
}

std::vector<WordSets> bmes_sets(const std::vector<Span>& spans, int sentence_len) {
  if (sentence_len < 0) throw ConfigError("bmes_sets: negative sentence length");
  std::vector<WordSets> out(static_cast<size_t>(sentence_len));
  for (const Span& sp : spans) {
    if (sp.start < 1 || sp.end > sentence_len || sp.start > sp.end)
      throw IntegrityError("bmes_sets: span out of range");
    if (sp.start == sp.end) {
      out[static_cast<size_t>(sp.start - 1)].of(Group::S).push_back(sp.word_id);
    } else {
      out[static_cast<size_t>(sp.start - 1)].of(Group::B).push_back(sp.word_id);
      out[static_cast<size_t>(sp.end - 1)].of(Group::E).push_back(sp.word_id);
      for (int t = sp.start + 1; t < sp.end; ++t)
        out[static_cast<size_t>(t - 1)].of(Group::M).push_back(sp.word_id);
    }
  }
  for (auto& ws : out)
    for (auto& s : ws.sets) finalize(s);
  return out;
}

std::vector<Span> restore_spans(const std::vector<WordSets>& sets, const Lexicon& lex) {
  const int n = static_cast<int>(sets.size());
  std::vector<Span> spans;
  for (int t = 1; t <= n; ++t) {
    const WordSets& ws = sets[static_cast<size_t>(t - 1)];
    for (int wid : ws.of(Group::B)) {
      if (wid == kNoneWord) continue;
      if (wid < 0 || wid >= lex.size()) throw IntegrityError("restore_spans: unknown word id");
      int len = static_cast<int>(lex.word(wid).size());
      if (len < 2 || t + len - 1 > n)
        throw IntegrityError("restore_spans: B entry does not fit the sentence");
      spans.push_back(Span{t, t + len - 1, wid});
    }
    for (int wid : ws.of(Group::S)) {
      if (wid == kNoneWord) continue;
      if (wid < 0 || wid >= lex.size()) throw IntegrityError("restore_spans: unknown word id");
      if (lex.word(wid).size() != 1)
        throw IntegrityError("restore_spans: S entry is not single-character");
      spans.push_back(Span{t, t, wid});
    }
  }
  std::sort(spans.begin(), spans.end());
  if (bmes_sets(spans, n) != sets)
    throw IntegrityError("restore_spans: sets are not a valid image of any span set");
  return spans;
}

std::vector<SoftwordFlags> exsoftword_flags(const std::vector<Span>& spans, int sentence_len) {
  std::vector<SoftwordFlags> out(static_cast<size_t>(sentence_len));
  for (const Span& sp : spans) {
    if (sp.start < 1 || sp.end > sentence_len || sp.start > sp.end)
      throw IntegrityError("exsoftword_flags: span out of range");
    if (sp.start == sp.end) {
      out[static_cast<size_t>(sp.start - 1)].flag[3] = true;  // S
    } else {
      out[static_cast<size_t>(sp.start - 1)].flag[0] = true;  // B
      out[static_cast<size_t>(sp.end - 1)].flag[2] = true;    // E
      for (int t = sp.start + 1; t < sp.end; ++t)
        out[static_cast<size_t>(t - 1)].flag[1] = true;  // M
    }
  }
  for (auto& f : out)
    if (!f.flag[0] && !f.flag[1] && !f.flag[2] && !f.flag[3]) f.flag[4] = true;  // O
  return out;
}

int pooled_group_count(const PoolOptions& opt) {
  if (opt.merge_groups) return 1;
  return opt.drop_m_group ? 3 : 4;
}

PoolWeights pool_weights(const WordSets& sets, const FreqTable& freq, const PoolOptions& opt) {
  if (opt.none_frequency <= 0) throw ConfigError("pool: none_frequency must be positive");
  if (opt.unseen_word_floor < 0) throw ConfigError("pool: unseen_word_floor must be >= 0");
  // Flooring keeps every effective frequency positive so Z never vanishes; a
  // word absent from the statistical corpus still carries `floor` units.
  auto mass = [&](int wid) -> double {
    if (wid == kNoneWord) return static_cast<double>(opt.none_frequency);
    if (wid < 0 || (freq.size() > 0 && wid >= freq.size()))
      throw IntegrityError("pool: word id outside the frequency table");
    return static_cast<double>(std::max(freq.count_of(wid), opt.unseen_word_floor));
  };

  std::vector<const std::vector<int>*> active;
  for (int g = 0; g < kNumGroups; ++g) {
    if (opt.drop_m_group && g == static_cast<int>(Group::M)) continue;
    active.push_back(&sets.sets[static_cast<size_t>(g)]);
  }

  PoolWeights pw;
  pw.groups.resize(active.size());

  if (opt.pooling == Pooling::Mean) {
    for (size_t g = 0; g < active.size(); ++g) {
      const auto& s = *active[g];
      const double c = 1.0 / static_cast<double>(s.size());
      for (int wid : s) pw.groups[g].push_back(PoolTerm{wid, c});
    }
  } else if (opt.normalization == Normalization::PerGroup) {
    for (size_t g = 0; g < active.size(); ++g) {
      const auto& s = *active[g];
      double zg = 0.0;
      for (int wid : s) zg += mass(wid);
      if (zg <= 0.0) throw ConfigError("pool: group frequency mass is zero");
      for (int wid : s) pw.groups[g].push_back(PoolTerm{wid, mass(wid) / zg});
    }
  } else {
    // Overall: one Z across every active group, each word weighted 4*z(w)/Z,
    // so all coefficients together sum to exactly 4.
    double z = 0.0;
    for (const auto* s : active)
      for (int wid : *s) z += mass(wid);
    if (z <= 0.0) throw ConfigError("pool: total frequency mass is zero");
    for (size_t g = 0; g < active.size(); ++g)
      for (int wid : *active[g])
        pw.groups[g].push_back(PoolTerm{wid, 4.0 * mass(wid) / z});
  }

  if (opt.merge_groups) {
    // No distinction between the groups: the pooled vectors are added up, so
    // their term lists concatenate into one.
    std::vector<PoolTerm> all;
    for (auto& g : pw.groups) all.insert(all.end(), g.begin(), g.end());
    pw.groups.assign(1, std::move(all));
  }
  return pw;
}

void dump_features(std::ostream& out, std::u32string_view sentence, const Lexicon& lex,
                   const std::vector<WordSets>& sets, const std::vector<SoftwordFlags>& flags) {
  if (sets.size() != sentence.size() || flags.size() != sentence.size())
    throw IntegrityError("dump_features: length mismatch");
  out << "pos\tchar\tB\tM\tE\tS\tflags\n";
  for (size_t t = 0; t < sentence.size(); ++t) {
    out << (t + 1) << '\t' << utf8_encode(sentence[t]);
    for (int g = 0; g < kNumGroups; ++g) {
      out << '\t';
      const auto& s = sets[t].sets[static_cast<size_t>(g)];
      for (size_t k = 0; k < s.size(); ++k) {
        if (k) out << ',';
        out << (s[k] == kNoneWord ? std::string(kNoneKey) : lex.word_utf8(s[k]));
      }
    }
    out << '\t';
    for (int f = 0; f < 5; ++f) out << (flags[t].flag[static_cast<size_t>(f)] ? '1' : '0');
    out << '\n';
  }
}

}  // namespace softlex
