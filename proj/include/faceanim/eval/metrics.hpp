// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "faceanim/core/mesh.hpp"
#include "faceanim/text/alignment.hpp"

namespace faceanim {

/// Mean per-vertex Euclidean error split by face region.
struct RegionErrorReport {
  double upper_mae = 0.0;
  double lower_mae = 0.0;
  struct PerUtterance {
    std::string id;
    double upper_mae = 0.0;
    double lower_mae = 0.0;
  };
  std::vector<PerUtterance> per_utterance;
};

/// Mean over frames and region vertices of ||pred - truth|| per region.
RegionErrorReport region_mae(const MeshSequence& pred, const MeshSequence& truth,
                             const RegionMask& mask);

/// Pooled report over several (id, pred, truth) triples, frame-weighted,
/// with a per-utterance breakdown merged in id order.
RegionErrorReport region_mae_pooled(
    const std::vector<std::tuple<std::string, MeshSequence, MeshSequence>>& pairs,
    const RegionMask& mask);

enum class CorrelationReduce { kMeanAbs, kMaxAbs };

/// Per-vertex |Pearson| score of a feature matrix against offset magnitudes.
struct CorrelationMap {
  std::string modality;  // "audio" or "text"
  std::vector<double> scores;  // one value in [0, 1] per vertex
};

/// score(v) = reduce over feature dims d of |corr(features[:,d], ||offsets[:,v]||)|.
/// Constant series contribute 0. Requires T >= 3.
CorrelationMap pearson_map(const Eigen::MatrixXd& features, const OffsetSequence& offsets,
                           const std::string& modality,
                           CorrelationReduce reduce = CorrelationReduce::kMeanAbs);

/// CSV export of text-encoder outputs: frame, word (empty in pauses), then
/// one column per embedding dimension at float32 precision.
void export_embeddings(const Eigen::MatrixXd& h_l, const WordAlignment& alignment,
                       double frame_rate, std::ostream& os);

void write_region_report_csv(const RegionErrorReport& report, std::ostream& os);

}  // namespace faceanim
