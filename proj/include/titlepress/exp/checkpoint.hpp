#pragma once

#include <cstdint>
#include <string>

#include "titlepress/model/model.hpp"

namespace titlepress::exp {

/// Single-file archive: magic, length-prefixed JSON header (model config,
/// vocabulary hash, step, tensor name index with shapes), then raw
/// little-endian float64 tensor data in row-major order. Round trips are
/// bit-exact.
void save_checkpoint(const std::string& path, const model::Model& model,
                     uint64_t vocab_hash, int64_t step = 0);

struct LoadedCheckpoint {
  model::Model model;
  uint64_t vocab_hash = 0;
  int64_t step = 0;
};

/// Loads a checkpoint. When expected_vocab_hash is nonzero and differs
/// from the stored hash, a warning is printed to stderr (loading still
/// succeeds). Shape mismatches against the stored config raise.
LoadedCheckpoint load_checkpoint(const std::string& path, uint64_t expected_vocab_hash = 0);

/// Restores tensors into an existing model; throws listing mismatched
/// shapes when the checkpoint does not fit the architecture.
void load_checkpoint_into(const std::string& path, model::Model& model,
                          uint64_t expected_vocab_hash = 0);

}  // namespace titlepress::exp
