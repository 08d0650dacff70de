// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "faceanim/audio/wav.hpp"

namespace faceanim {

// Extraction parameters fixed for format version 1 of the feature cache.
// The working sample rate makes the hop integral at 25 fps (16000/25 = 640).
struct MelParams {
  static constexpr int kChannels = 128;
  static constexpr uint32_t kSampleRate = 16000;
  static constexpr int kWindow = 1024;
  static constexpr int kFftSize = 1024;
  static constexpr double kDbFloor = -80.0;
  static constexpr double kDbReference = 1.0;
};

/// Per-video-frame 128-channel mel power spectrogram in decibels.
struct MelFrames {
  uint16_t frame_rate = 25;
  Eigen::MatrixXd values;  // T x 128, every entry >= kDbFloor

  int frame_count() const { return static_cast<int>(values.rows()); }
  int channels() const { return static_cast<int>(values.cols()); }
};

/// Resamples to a new rate by linear interpolation. Returns the input
/// unchanged when the rates already match.
AudioClip resample_linear(const AudioClip& clip, uint32_t target_rate);

/// Extracts exactly `target_frames` frames of 128-dim dB mel features,
/// one per video frame at `frame_rate` fps. The raw frame count is
/// floor(N/hop) after resampling to 16 kHz; the sequence is right-padded
/// with floor-dB frames or truncated to hit `target_frames`.
MelFrames mel_features(const AudioClip& audio, uint16_t frame_rate, int target_frames);

/// Raw analysis frame count for a clip: floor(N / hop) after resampling.
int mel_raw_frame_count(const AudioClip& audio, uint16_t frame_rate);

/// Center frequencies / band edges of the triangular mel filters, in Hz.
/// band[m] = {lower edge, center, upper edge} of filter m.
std::vector<std::array<double, 3>> mel_filter_bands();

// MFQ1 feature cache: MSQ1-style header with channels in place of V, then
// the extraction parameters (sample rate, window, FFT size, dB floor), then
// T*C float32 little-endian values.
void save_mel_cache(const MelFrames& mel, const std::string& path);
MelFrames load_mel_cache(const std::string& path);

}  // namespace faceanim
