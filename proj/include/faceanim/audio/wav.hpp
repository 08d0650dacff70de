// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace faceanim {

/// Mono audio, samples normalized to [-1, 1].
struct AudioClip {
  uint32_t sample_rate = 0;
  std::vector<double> samples;

  double duration_seconds() const {
    return sample_rate ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

/// Reads a RIFF/WAVE stream. Only PCM 16-bit mono is accepted; samples are
/// scaled by 1/32768.
AudioClip load_audio(std::istream& is);
AudioClip load_audio_file(const std::string& path);

/// Writes PCM 16-bit mono. Samples are clamped to [-1, 1] and scaled by
/// 32767 before rounding.
void save_audio_file(const AudioClip& clip, const std::string& path);

}  // namespace faceanim
