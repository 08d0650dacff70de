// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include <Eigen/Core>

#include "faceanim/text/alignment.hpp"
#include "faceanim/text/embedding.hpp"

namespace faceanim {

/// Per-video-frame text features, one 768-dim row per frame.
struct TextFrames {
  Eigen::MatrixXd values;  // T x 768

  int frame_count() const { return static_cast<int>(values.rows()); }
  int dimension() const { return static_cast<int>(values.cols()); }
};

/// Assigns each frame the embedding of the word whose interval contains the
/// frame center (f + 0.5) / frame_rate; frames in pauses get zero vectors.
TextFrames expand_to_frames(const WordAlignment& alignment,
                            const EmbeddingProvider& provider, int frames,
                            double frame_rate,
                            const std::string& utterance_id = "");

/// Windowed mean over [t - past, t + future] clipped to the sequence,
/// dividing by the number of in-range frames.
TextFrames smooth_frames(const TextFrames& frames, int past = 8, int future = 7);

}  // namespace faceanim
