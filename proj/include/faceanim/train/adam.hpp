// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <Eigen/Core>

#include "faceanim/model/layers.hpp"

namespace faceanim {

/// Adam state: per-parameter first/second moments plus the step counter.
/// Moment buffers are allocated lazily on the first step so that
/// forward-only model use never pays for them.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Eigen::MatrixXd> m;
  std::vector<Eigen::MatrixXd> v;
};

/// One Adam update with bias correction over the parameter registry.
/// Throws InputError naming the parameter if any gradient is non-finite.
void adam_step(std::vector<Param*>& params, AdamState& state, double lr);

}  // namespace faceanim
