// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#include "faceanim/train/loss.hpp"

namespace faceanim {

namespace {

void check_shapes(const MeshSequence& pred, const MeshSequence& truth) {
  if (pred.frame_count != truth.frame_count || pred.vertex_count != truth.vertex_count) {
    throw DimensionError("loss: prediction is " + std::to_string(pred.frame_count) +
                         "x" + std::to_string(pred.vertex_count) + ", truth is " +
                         std::to_string(truth.frame_count) + "x" +
                         std::to_string(truth.vertex_count));
  }
}

}  // namespace

double mse_loss(const MeshSequence& pred, const MeshSequence& truth) {
  check_shapes(pred, truth);
  double sum = 0.0;
  for (size_t i = 0; i < pred.vertices.size(); ++i) {
    double d = static_cast<double>(pred.vertices[i]) -
               static_cast<double>(truth.vertices[i]);
    sum += d * d;
  }
  return sum;
}

double mse_loss_normalized(const MeshSequence& pred, const MeshSequence& truth) {
  return mse_loss(pred, truth) /
         (static_cast<double>(pred.frame_count) * pred.vertex_count);
}

double offset_loss_and_grad(const Eigen::MatrixXd& pred_offsets,
                            const Eigen::MatrixXd& truth_offsets, bool normalized,
                            Eigen::MatrixXd* d_pred) {
  if (pred_offsets.rows() != truth_offsets.rows() ||
      pred_offsets.cols() != truth_offsets.cols()) {
    throw DimensionError("offset loss: shape mismatch");
  }
  double scale = 1.0;
  if (normalized) {
    scale = 1.0 / (static_cast<double>(pred_offsets.rows()) *
                   (static_cast<double>(pred_offsets.cols()) / 3.0));
  }
  Eigen::MatrixXd diff = pred_offsets - truth_offsets;
  if (d_pred) *d_pred = 2.0 * scale * diff;
  return scale * diff.squaredNorm();
}

}  // namespace faceanim
