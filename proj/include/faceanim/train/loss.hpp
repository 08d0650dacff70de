// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include "faceanim/core/mesh.hpp"

namespace faceanim {

/// Sum over frames and vertices of the squared Euclidean distance between
/// prediction and ground truth.
double mse_loss(const MeshSequence& pred, const MeshSequence& truth);

/// Same sum divided by T*V, the scale-free variant used for training and
/// reporting at reduced vertex counts.
double mse_loss_normalized(const MeshSequence& pred, const MeshSequence& truth);

/// Training-path loss on double-precision offset matrices (T x 3V):
/// loss(pred_offsets, truth_offsets) plus its gradient w.r.t. pred.
/// When `normalized`, both are divided by T*V.
double offset_loss_and_grad(const Eigen::MatrixXd& pred_offsets,
                            const Eigen::MatrixXd& truth_offsets, bool normalized,
                            Eigen::MatrixXd* d_pred);

}  // namespace faceanim
