// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#include "faceanim/text/frames.hpp"

#include <algorithm>

#include "faceanim/common/error.hpp"

namespace faceanim {

TextFrames expand_to_frames(const WordAlignment& alignment,
                            const EmbeddingProvider& provider, int frames,
                            double frame_rate, const std::string& utterance_id) {
  if (frames < 1) throw InputError("frame count must be >= 1");
  if (frame_rate <= 0.0) throw InputError("frame rate must be positive");
  TextFrames out;
  out.values = Eigen::MatrixXd::Zero(frames, provider.dimension());
  int last_word = -2;
  Eigen::VectorXd current;
  for (int f = 0; f < frames; ++f) {
    double center = (f + 0.5) / frame_rate;
    int w = alignment.word_at(center);
    if (w < 0) continue;
    if (w != last_word) {
      current = provider.lookup(utterance_id, static_cast<uint32_t>(w),
                                alignment.entries[w].word);
      last_word = w;
    }
    out.values.row(f) = current.transpose();
  }
  return out;
}

TextFrames smooth_frames(const TextFrames& frames, int past, int future) {
  const int T = frames.frame_count();
  TextFrames out;
  out.values.resizeLike(frames.values);
  for (int t = 0; t < T; ++t) {
    int lo = std::max(0, t - past);
    int hi = std::min(T - 1, t + future);
    int n = hi - lo + 1;
    out.values.row(t) = frames.values.middleRows(lo, n).colwise().mean();
  }
  return out;
}

}  // namespace faceanim
