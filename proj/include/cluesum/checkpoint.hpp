#pragma once

#include <string>

#include "cluesum/model.hpp"

namespace cluesum {

/// A self-contained trained model snapshot: configuration, both
/// vocabularies, the lexicon, clue-extraction settings, and every tensor.
struct Checkpoint {
  ModelConfig model;
  ClueConfig clue;
  Vocabulary src_vocab;
  Vocabulary tgt_vocab;
  BilingualLexicon lexicon;
  ParamSet params;
};

/// Binary layout: 8-byte magic, u32 format version, u64 header length,
/// header JSON (model/clue config, vocabularies, lexicon), u64 tensor
/// count, then per tensor: u32 name length, name bytes, u8 dtype (0 =
/// float64), u32 rows, u32 cols, row-major little-endian values.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cluesum
