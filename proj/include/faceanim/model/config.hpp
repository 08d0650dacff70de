// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "faceanim/common/error.hpp"

namespace faceanim {

enum class FusionMode { kTensor, kConcat, kAudioOnly, kTextOnly };

std::string to_string(FusionMode mode);
FusionMode fusion_mode_from_string(const std::string& s);

/// Table 3 row label for a fusion mode ("Audio Only", "Audio+Text (TF)", ...).
std::string fusion_mode_label(FusionMode mode);

/// Network dimensions. Defaults are the reference architecture: 128-channel
/// mel input, four 128-filter dilated convolutions, 128-dim audio embedding,
/// 768 -> 128 -> 64 text encoder, and a 128/128 decoder. V and S have no
/// sensible default and must be set per run.
struct ArchConfig {
  int mel_channels = 128;  // conv filter count equals this (residual adds)
  int audio_embed = 128;   // d_a
  int text_dim = 768;
  int text_hidden = 128;
  int text_embed = 64;     // d_l
  int dec_hidden = 128;    // width after the first decoder FC
  int blstm_hidden = 128;  // per direction
  int vertex_count = 0;    // V
  int speaker_count = 0;   // S
  int conv_kernel = 3;
  std::array<int, 4> dilations = {1, 2, 4, 8};
  double leaky_slope = 0.01;

  /// Decoder input width for a fusion mode.
  int fused_width(FusionMode mode) const {
    switch (mode) {
      case FusionMode::kTensor: return (audio_embed + 1) * (text_embed + 1);
      case FusionMode::kConcat: return audio_embed + text_embed;
      case FusionMode::kAudioOnly: return audio_embed + 1;
      case FusionMode::kTextOnly: return text_embed + 1;
    }
    throw ConfigError("unknown fusion mode");
  }

  void validate() const {
    if (mel_channels < 1 || audio_embed < 1 || text_dim < 1 || text_hidden < 1 ||
        text_embed < 1 || dec_hidden < 1 || blstm_hidden < 1) {
      throw ConfigError("all architecture dimensions must be positive");
    }
    if (vertex_count < 1) throw ConfigError("vertex_count must be set");
    if (speaker_count < 1) throw ConfigError("speaker_count must be set");
    if (conv_kernel != 3) throw ConfigError("conv kernel must be 3");
  }
};

}  // namespace faceanim
