// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include "faceanim/model/network.hpp"

namespace faceanim {

/// Run metadata carried alongside the weights.
struct CheckpointMeta {
  uint64_t seed = 0;
  bool loss_normalized = true;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

// Checkpoint container: a directory holding manifest.json (architecture
// dims, S, V, fusion mode, seed, format version and the parameter list)
// plus one TNS1 tensor file per parameter:
//   magic "TNS1" | u8 rank | u32 dims[rank] | float32 LE payload, row-major.

void save_checkpoint(const Model& model, const CheckpointMeta& meta,
                     const std::string& dir);

struct LoadedCheckpoint {
  std::unique_ptr<Model> model;
  CheckpointMeta meta;
};

LoadedCheckpoint load_checkpoint(const std::string& dir);

/// FNV-1a 64 fingerprint of the manifest bytes, as 16 hex digits.
std::string checkpoint_manifest_hash(const std::string& dir);

}  // namespace faceanim
