// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "faceanim/core/mesh.hpp"

namespace faceanim {

/// Parameters of the synthetic audio+text+mesh corpus. The generator plants
/// two couplings that make the modality-ablation orderings testable:
/// lower-face motion follows the audio amplitude envelope (which carries a
/// per-word random gain the transcript cannot reveal), and upper-face motion
/// follows a per-word expressiveness coefficient (carrier frequencies are
/// quantized into a few bins shared by expressive and plain words, so the
/// audio cannot reveal it).
struct SynthSpec {
  int grid_rows = 26;  // V = rows * cols = 338 by default
  int grid_cols = 13;
  uint32_t speakers = 2;
  int utterances_per_speaker = 8;       // "train" split
  int test_utterances_per_speaker = 2;  // "test" split
  double min_duration = 3.5;            // seconds
  double max_duration = 4.5;
  std::vector<std::string> vocabulary;  // default set when empty
  std::vector<std::string> expressive;  // subset of vocabulary
  uint16_t frame_rate = 25;
  uint64_t seed = 0;

  // planted-coupling constants
  double expressive_coeff = 1.0;
  double plain_coeff = 0.2;

  int vertex_count() const { return grid_rows * grid_cols; }
  void validate() const;

  /// Fills vocabulary/expressive with the built-in word lists.
  static SynthSpec with_defaults();
};

/// Deterministic per-word carrier frequency bin; expressive and plain words
/// are interleaved across bins.
int carrier_bin(const SynthSpec& spec, const std::string& word);

/// Writes the whole corpus (WAV, alignment JSON, MSQ1 meshes, region mask,
/// template, manifest.json) under out_dir and returns the manifest path.
/// Rerunning with the same spec produces byte-identical files.
std::string generate_corpus(const SynthSpec& spec, const std::string& out_dir);

/// Template grid geometry, shared with tests.
TemplateMesh make_grid_template(int rows, int cols);
RegionMask make_grid_region_mask(int rows, int cols);

}  // namespace faceanim
