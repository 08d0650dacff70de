// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "faceanim/common/rng.hpp"

namespace faceanim {

/// A learnable tensor with its gradient slot. Vectors are stored as n x 1
/// matrices; `rank` records the logical rank for serialization.
struct Param {
  std::string name;
  int rank = 2;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;

  void init_uniform(Rng& rng, double bound) {
    for (Eigen::Index j = 0; j < value.cols(); ++j) {
      for (Eigen::Index i = 0; i < value.rows(); ++i) {
        value(i, j) = rng.uniform(-bound, bound);
      }
    }
  }
  void zero_grad() { grad.setZero(); }
};

Param make_matrix_param(const std::string& name, int rows, int cols);
Param make_vector_param(const std::string& name, int n);

/// y = x W^T + b applied to every row of a T x in matrix.
struct Dense {
  Param w;  // out x in
  Param b;  // out x 1

  int in() const { return static_cast<int>(w.value.cols()); }
  int out() const { return static_cast<int>(w.value.rows()); }
};

Dense make_dense(const std::string& name, int in, int out);
void init_dense(Dense& d, Rng& rng);
Eigen::MatrixXd dense_forward(const Dense& d, const Eigen::MatrixXd& x);
/// Accumulates parameter gradients; returns dL/dx.
Eigen::MatrixXd dense_backward(Dense& d, const Eigen::MatrixXd& x,
                               const Eigen::MatrixXd& dy);

/// Temporal convolution with 3 taps at offsets {-l, 0, +l} and symmetric
/// zero padding. Input and output are T x C / T x F with frames as rows.
struct DilatedConv {
  Param w_prev;    // F x C, tap at t - dilation
  Param w_center;  // F x C
  Param w_next;    // F x C, tap at t + dilation
  Param b;         // F x 1
  int dilation = 1;

  int in() const { return static_cast<int>(w_center.value.cols()); }
  int out() const { return static_cast<int>(w_center.value.rows()); }
};

DilatedConv make_dilated_conv(const std::string& name, int in, int out, int dilation);
void init_dilated_conv(DilatedConv& c, Rng& rng);
/// Pre-activation output.
Eigen::MatrixXd conv_forward(const DilatedConv& c, const Eigen::MatrixXd& x);
Eigen::MatrixXd conv_backward(DilatedConv& c, const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd& dy);

Eigen::MatrixXd leaky_relu(const Eigen::MatrixXd& x, double slope);
/// dL/dx given the pre-activation input.
Eigen::MatrixXd leaky_relu_backward(const Eigen::MatrixXd& x,
                                    const Eigen::MatrixXd& dy, double slope);

/// Single-direction LSTM with standard input/forget/cell/output gates,
/// sigmoid gate activations, tanh cell activation, zero initial state.
/// Gate blocks are stacked [i, f, g, o] along the 4H axis.
struct LstmCell {
  Param wx;  // 4H x In
  Param wh;  // 4H x H
  Param b;   // 4H x 1

  int in() const { return static_cast<int>(wx.value.cols()); }
  int hidden() const { return static_cast<int>(wh.value.cols()); }
};

LstmCell make_lstm(const std::string& name, int in, int hidden);
void init_lstm(LstmCell& c, Rng& rng);

/// Everything the backward pass needs from a forward run.
struct LstmTrace {
  Eigen::MatrixXd gates;   // T x 4H, post-activation
  Eigen::MatrixXd cells;   // T x H
  Eigen::MatrixXd tanh_c;  // T x H
  Eigen::MatrixXd h;       // T x H
};

LstmTrace lstm_forward(const LstmCell& c, const Eigen::MatrixXd& x);
/// dh_ext is dL/dh at every step from downstream consumers.
Eigen::MatrixXd lstm_backward(LstmCell& c, const Eigen::MatrixXd& x,
                              const LstmTrace& trace, const Eigen::MatrixXd& dh_ext);

/// Bidirectional layer: forward and backward LSTMs over the same input,
/// outputs concatenated to T x 2H.
struct BlstmLayer {
  LstmCell fwd;
  LstmCell bwd;

  int hidden() const { return fwd.hidden(); }
};

BlstmLayer make_blstm(const std::string& name, int in, int hidden);
void init_blstm(BlstmLayer& l, Rng& rng);

struct BlstmTrace {
  LstmTrace fwd;
  Eigen::MatrixXd x_rev;  // time-reversed input fed to the backward cell
  LstmTrace bwd;          // in reversed time order
  Eigen::MatrixXd out;    // T x 2H
};

BlstmTrace blstm_forward(const BlstmLayer& l, const Eigen::MatrixXd& x);
Eigen::MatrixXd blstm_backward(BlstmLayer& l, const Eigen::MatrixXd& x,
                               const BlstmTrace& trace, const Eigen::MatrixXd& dout);

/// Reverses the row (time) order of a sequence matrix.
inline Eigen::MatrixXd reverse_rows(const Eigen::MatrixXd& x) {
  return x.colwise().reverse();
}

}  // namespace faceanim
