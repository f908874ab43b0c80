#pragma once

#include <optional>
#include <string>

#include "softlex/lexicon.hpp"
#include "softlex/model.hpp"

namespace softlex {

// On-disk model snapshot, two files:
//   <path>       binary, magic "SLXCKPT1", then little-endian sections
//                (u32 name length, name bytes, u32 rows, u32 cols,
//                 rows*cols float64 values in row-major order), one per
//                 parameter tensor;
//   <path>.json  sidecar with the model config, label set, vocabularies,
//                lexicon words, and frequency counts.
// Identical models produce byte-identical files.
struct Checkpoint {
  TaggerModel model;
  std::optional<Lexicon> lexicon;
  FreqTable freq;
};

void save_checkpoint(const std::string& path, const TaggerModel& model, const Lexicon* lexicon,
                     const FreqTable* freq);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace softlex
