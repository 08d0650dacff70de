// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "faceanim/eval/metrics.hpp"
#include "faceanim/train/trainer.hpp"

namespace faceanim {

/// One trained-and-evaluated variant.
struct AblationRow {
  uint64_t seed = 0;
  FusionMode mode = FusionMode::kTensor;
  double upper_mae = 0.0;
  double lower_mae = 0.0;
};

struct AblationSummary {
  FusionMode mode = FusionMode::kTensor;
  std::string label;  // Table-style row label
  double upper_mean = 0.0, upper_std = 0.0;
  double lower_mean = 0.0, lower_std = 0.0;
};

struct AblationTable {
  std::vector<AblationRow> rows;  // ordered by (seed, variant)
  std::vector<AblationSummary> summary;
};

/// Trains the four variants {audio_only, text_only, concat, tensor} for each
/// seed with identical data order, evaluates region MAE on the test split,
/// and aggregates mean/stddev per variant. Runs are independent, so up to
/// `jobs` of them execute concurrently; results are merged in (seed, variant)
/// order and are deterministic given the seeds.
AblationTable run_ablation(const TrainConfig& base, const ArchConfig& arch,
                           const std::vector<PreparedUtterance>& train_data,
                           const std::vector<PreparedUtterance>& test_data,
                           const TemplateMesh& tmpl, const RegionMask& mask,
                           const std::vector<uint64_t>& seeds, int jobs = 1);

/// Region MAE of one trained model on a prepared test set.
RegionErrorReport evaluate_region_mae(const Model& model,
                                      const std::vector<PreparedUtterance>& test_data,
                                      const TemplateMesh& tmpl, const RegionMask& mask,
                                      uint16_t frame_rate);

void write_ablation_csv(const AblationTable& table, std::ostream& os);
void write_ablation_summary(const AblationTable& table, std::ostream& os);

}  // namespace faceanim
