#include "softlex/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "softlex/errors.hpp"
#include "softlex/unicode.hpp"

namespace softlex {

namespace {

constexpr char kMagic[8] = {'S', 'L', 'X', 'C', 'K', 'P', 'T', '1'};

void write_u32(std::ofstream& out, uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.write(buf, 4);
}

uint32_t read_u32(std::ifstream& in, const std::string& path) {
  char buf[4];
  if (!in.read(buf, 4)) throw DataError("checkpoint: truncated file " + path);
  uint32_t v;
  std::memcpy(&v, buf, 4);
  return v;
}

void write_section(std::ofstream& out, const net::Parameter& p) {
  write_u32(out, static_cast<uint32_t>(p.name.size()));
  out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
  write_u32(out, static_cast<uint32_t>(p.value.rows()));
  write_u32(out, static_cast<uint32_t>(p.value.cols()));
  std::vector<double> buf(static_cast<size_t>(p.value.size()));
  size_t k = 0;
  for (Eigen::Index r = 0; r < p.value.rows(); ++r)
    for (Eigen::Index c = 0; c < p.value.cols(); ++c) buf[k++] = p.value(r, c);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
}

nlohmann::json config_json(const ModelConfig& cfg) {
  return {
      {"variant", variant_name(cfg.variant)},
      {"use_bigram", cfg.use_bigram},
      {"char_dim", cfg.char_dim},
      {"bigram_dim", cfg.bigram_dim},
      {"word_dim", cfg.word_dim},
      {"hidden", cfg.hidden},
      {"dropout", cfg.dropout},
      {"pooling", pooling_name(cfg.pool.pooling)},
      {"normalization", normalization_name(cfg.pool.normalization)},
      {"drop_m_group", cfg.pool.drop_m_group},
      {"merge_groups", cfg.pool.merge_groups},
      {"none_frequency", cfg.pool.none_frequency},
      {"unseen_word_floor", cfg.pool.unseen_word_floor},
  };
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.variant = variant_from_name(j.at("variant").get<std::string>());
  cfg.use_bigram = j.at("use_bigram").get<bool>();
  cfg.char_dim = j.at("char_dim").get<int>();
  cfg.bigram_dim = j.at("bigram_dim").get<int>();
  cfg.word_dim = j.at("word_dim").get<int>();
  cfg.hidden = j.at("hidden").get<int>();
  cfg.dropout = j.at("dropout").get<double>();
  cfg.pool.pooling = pooling_from_name(j.at("pooling").get<std::string>());
  cfg.pool.normalization = normalization_from_name(j.at("normalization").get<std::string>());
  cfg.pool.drop_m_group = j.at("drop_m_group").get<bool>();
  cfg.pool.merge_groups = j.at("merge_groups").get<bool>();
  cfg.pool.none_frequency = j.at("none_frequency").get<int64_t>();
  cfg.pool.unseen_word_floor = j.at("unseen_word_floor").get<int64_t>();
  return cfg;
}

}  // namespace

void save_checkpoint(const std::string& path, const TaggerModel& model, const Lexicon* lexicon,
                     const FreqTable* freq) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("checkpoint: cannot write " + path);
    out.write(kMagic, sizeof kMagic);
    auto params = model.parameters();
    write_u32(out, static_cast<uint32_t>(params.size()));
    for (const auto* p : params) write_section(out, *p);
    if (!out) throw DataError("checkpoint: write failed for " + path);
  }

  nlohmann::json j;
  j["format"] = "softlex-checkpoint";
  j["version"] = 1;
  j["config"] = config_json(model.config());
  j["labels"] = model.labels().tags();
  j["char_keys"] = model.char_keys();
  j["bigram_keys"] = model.bigram_keys();
  j["word_keys"] = model.word_keys();
  std::vector<std::string> words;
  std::vector<int64_t> counts;
  int64_t total = 0;
  if (lexicon) {
    words.reserve(static_cast<size_t>(lexicon->size()));
    counts.reserve(static_cast<size_t>(lexicon->size()));
    for (int id = 0; id < lexicon->size(); ++id) {
      words.push_back(lexicon->word_utf8(id));
      counts.push_back(freq ? freq->count_of(id) : 0);
    }
    total = freq ? freq->total_sentences() : 0;
  }
  j["lexicon"] = words;
  j["freq"] = counts;
  j["freq_total_sentences"] = total;

  std::ofstream side(path + ".json", std::ios::binary);
  if (!side) throw DataError("checkpoint: cannot write " + path + ".json");
  side << j.dump(2) << '\n';
  if (!side) throw DataError("checkpoint: write failed for " + path + ".json");
}

Checkpoint load_checkpoint(const std::string& path) {
  nlohmann::json j;
  {
    std::ifstream side(path + ".json", std::ios::binary);
    if (!side) throw DataError("checkpoint: cannot open " + path + ".json");
    try {
      side >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("checkpoint: bad sidecar " + path + ".json: " + e.what());
    }
  }

  Checkpoint ckpt;
  try {
    if (j.at("format").get<std::string>() != "softlex-checkpoint")
      throw DataError("checkpoint: " + path + ".json is not a checkpoint sidecar");
    if (j.at("version").get<int>() != 1)
      throw DataError("checkpoint: unsupported version in " + path + ".json");
    ModelConfig cfg = config_from_json(j.at("config"));
    ckpt.model = TaggerModel::restore(
        cfg, j.at("labels").get<std::vector<std::string>>(),
        j.at("char_keys").get<std::vector<std::string>>(),
        j.at("bigram_keys").get<std::vector<std::string>>(),
        j.at("word_keys").get<std::vector<std::string>>());
    auto words = j.at("lexicon").get<std::vector<std::string>>();
    if (!words.empty()) {
      ckpt.lexicon = Lexicon::build(words);
      ckpt.freq = FreqTable::from_counts(j.at("freq").get<std::vector<int64_t>>(),
                                         j.at("freq_total_sentences").get<int64_t>());
      if (ckpt.freq.size() != ckpt.lexicon->size())
        throw DataError("checkpoint: frequency table does not match the lexicon");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint: bad sidecar " + path + ".json: " + e.what());
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open " + path);
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw DataError("checkpoint: " + path + " is not a checkpoint (bad magic)");

  auto params = ckpt.model.parameters();
  const uint32_t sections = read_u32(in, path);
  if (sections != params.size())
    throw DataError("checkpoint: " + path + " has " + std::to_string(sections) +
                    " sections, expected " + std::to_string(params.size()));
  for (auto* p : params) {
    const uint32_t name_len = read_u32(in, path);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw DataError("checkpoint: truncated file " + path);
    if (name != p->name)
      throw DataError("checkpoint: section '" + name + "' where '" + p->name + "' expected");
    const uint32_t rows = read_u32(in, path), cols = read_u32(in, path);
    if (static_cast<Eigen::Index>(rows) != p->value.rows() ||
        static_cast<Eigen::Index>(cols) != p->value.cols())
      throw DataError("checkpoint: section '" + name + "' is " + std::to_string(rows) + "x" +
                      std::to_string(cols) + ", expected " + std::to_string(p->value.rows()) +
                      "x" + std::to_string(p->value.cols()));
    std::vector<double> buf(static_cast<size_t>(rows) * cols);
    if (!in.read(reinterpret_cast<char*>(buf.data()),
                 static_cast<std::streamsize>(buf.size() * sizeof(double))))
      throw DataError("checkpoint: truncated file " + path);
    size_t k = 0;
    for (uint32_t r = 0; r < rows; ++r)
      for (uint32_t c = 0; c < cols; ++c) p->value(r, c) = buf[k++];
  }

  if (ckpt.lexicon) ckpt.model.bind_lexicon(*ckpt.lexicon);
  return ckpt;
}

}  // namespace softlex
