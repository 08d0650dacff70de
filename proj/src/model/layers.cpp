// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#include "faceanim/model/layers.hpp"

#include <cmath>

#include "faceanim/common/error.hpp"

namespace faceanim {

namespace {

/// Rows of the result are x shifted by `offset`: out.row(t) = x.row(t + offset),
/// zero where t + offset falls outside [0, T).
Eigen::MatrixXd shift_rows(const Eigen::MatrixXd& x, int offset) {
  const Eigen::Index T = x.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(T, x.cols());
  if (offset >= 0) {
    if (offset < T) out.topRows(T - offset) = x.bottomRows(T - offset);
  } else {
    if (-offset < T) out.bottomRows(T + offset) = x.topRows(T + offset);
  }
  return out;
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
  return 1.0 / (1.0 + (-x.array()).exp());
}

}  // namespace

Param make_matrix_param(const std::string& name, int rows, int cols) {
  Param p;
  p.name = name;
  p.rank = 2;
  p.value = Eigen::MatrixXd::Zero(rows, cols);
  p.grad = Eigen::MatrixXd::Zero(rows, cols);
  return p;
}

Param make_vector_param(const std::string& name, int n) {
  Param p;
  p.name = name;
  p.rank = 1;
  p.value = Eigen::MatrixXd::Zero(n, 1);
  p.grad = Eigen::MatrixXd::Zero(n, 1);
  return p;
}

Dense make_dense(const std::string& name, int in, int out) {
  Dense d;
  d.w = make_matrix_param(name + ".w", out, in);
  d.b = make_vector_param(name + ".b", out);
  return d;
}

void init_dense(Dense& d, Rng& rng) {
  double bound = std::sqrt(1.0 / d.in());
  d.w.init_uniform(rng, bound);
  d.b.init_uniform(rng, bound);
}

Eigen::MatrixXd dense_forward(const Dense& d, const Eigen::MatrixXd& x) {
  if (x.cols() != d.w.value.cols()) {
    throw DimensionError(d.w.name + ": input has " + std::to_string(x.cols()) +
                         " features, expected " + std::to_string(d.w.value.cols()));
  }
  return (x * d.w.value.transpose()).rowwise() + d.b.value.col(0).transpose();
}

Eigen::MatrixXd dense_backward(Dense& d, const Eigen::MatrixXd& x,
                               const Eigen::MatrixXd& dy) {
  d.w.grad.noalias() += dy.transpose() * x;
  d.b.grad.col(0).noalias() += dy.colwise().sum().transpose();
  return dy * d.w.value;
}

DilatedConv make_dilated_conv(const std::string& name, int in, int out, int dilation) {
  DilatedConv c;
  c.w_prev = make_matrix_param(name + ".w_prev", out, in);
  c.w_center = make_matrix_param(name + ".w_center", out, in);
  c.w_next = make_matrix_param(name + ".w_next", out, in);
  c.b = make_vector_param(name + ".b", out);
  c.dilation = dilation;
  return c;
}

void init_dilated_conv(DilatedConv& c, Rng& rng) {
  double bound = std::sqrt(1.0 / (3.0 * c.in()));
  c.w_prev.init_uniform(rng, bound);
  c.w_center.init_uniform(rng, bound);
  c.w_next.init_uniform(rng, bound);
  c.b.init_uniform(rng, bound);
}

Eigen::MatrixXd conv_forward(const DilatedConv& c, const Eigen::MatrixXd& x) {
  if (x.cols() != c.in()) {
    throw DimensionError(c.w_center.name + ": input has " + std::to_string(x.cols()) +
                         " channels, expected " + std::to_string(c.in()));
  }
  const int l = c.dilation;
  Eigen::MatrixXd y = x * c.w_center.value.transpose();
  y.noalias() += shift_rows(x, -l) * c.w_prev.value.transpose();
  y.noalias() += shift_rows(x, l) * c.w_next.value.transpose();
  y.rowwise() += c.b.value.col(0).transpose();
  return y;
}

Eigen::MatrixXd conv_backward(DilatedConv& c, const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd& dy) {
  const int l = c.dilation;
  c.w_center.grad.noalias() += dy.transpose() * x;
  c.w_prev.grad.noalias() += dy.transpose() * shift_rows(x, -l);
  c.w_next.grad.noalias() += dy.transpose() * shift_rows(x, l);
  c.b.grad.col(0).noalias() += dy.colwise().sum().transpose();
  Eigen::MatrixXd dx = dy * c.w_center.value;
  dx.noalias() += shift_rows(dy * c.w_prev.value, l);
  dx.noalias() += shift_rows(dy * c.w_next.value, -l);
  return dx;
}

Eigen::MatrixXd leaky_relu(const Eigen::MatrixXd& x, double slope) {
  return x.array().max(x.array() * slope);
}

Eigen::MatrixXd leaky_relu_backward(const Eigen::MatrixXd& x,
                                    const Eigen::MatrixXd& dy, double slope) {
  return dy.array() * (x.array() > 0.0).select(
      Eigen::ArrayXXd::Ones(x.rows(), x.cols()),
      Eigen::ArrayXXd::Constant(x.rows(), x.cols(), slope));
}

LstmCell make_lstm(const std::string& name, int in, int hidden) {
  LstmCell c;
  c.wx = make_matrix_param(name + ".wx", 4 * hidden, in);
  c.wh = make_matrix_param(name + ".wh", 4 * hidden, hidden);
  c.b = make_vector_param(name + ".b", 4 * hidden);
  return c;
}

void init_lstm(LstmCell& c, Rng& rng) {
  c.wx.init_uniform(rng, std::sqrt(1.0 / c.in()));
  c.wh.init_uniform(rng, std::sqrt(1.0 / c.hidden()));
  c.b.init_uniform(rng, std::sqrt(1.0 / c.hidden()));
}

LstmTrace lstm_forward(const LstmCell& c, const Eigen::MatrixXd& x) {
  if (x.cols() != c.in()) {
    throw DimensionError(c.wx.name + ": input has " + std::to_string(x.cols()) +
                         " features, expected " + std::to_string(c.in()));
  }
  const int T = static_cast<int>(x.rows());
  const int H = c.hidden();
  LstmTrace tr;
  tr.gates.resize(T, 4 * H);
  tr.cells.resize(T, H);
  tr.tanh_c.resize(T, H);
  tr.h.resize(T, H);
  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(H);
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd pre = c.wx.value * x.row(t).transpose() +
                          c.wh.value * h_prev + c.b.value.col(0);
    Eigen::VectorXd i = sigmoid(pre.segment(0, H));
    Eigen::VectorXd f = sigmoid(pre.segment(H, H));
    Eigen::VectorXd g = pre.segment(2 * H, H).array().tanh();
    Eigen::VectorXd o = sigmoid(pre.segment(3 * H, H));
    Eigen::VectorXd ct = f.array() * c_prev.array() + i.array() * g.array();
    Eigen::VectorXd tc = ct.array().tanh();
    Eigen::VectorXd ht = o.array() * tc.array();
    tr.gates.row(t).segment(0, H) = i.transpose();
    tr.gates.row(t).segment(H, H) = f.transpose();
    tr.gates.row(t).segment(2 * H, H) = g.transpose();
    tr.gates.row(t).segment(3 * H, H) = o.transpose();
    tr.cells.row(t) = ct.transpose();
    tr.tanh_c.row(t) = tc.transpose();
    tr.h.row(t) = ht.transpose();
    h_prev = ht;
    c_prev = ct;
  }
  return tr;
}

Eigen::MatrixXd lstm_backward(LstmCell& c, const Eigen::MatrixXd& x,
                              const LstmTrace& trace, const Eigen::MatrixXd& dh_ext) {
  const int T = static_cast<int>(x.rows());
  const int H = c.hidden();
  Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(T, x.cols());
  Eigen::VectorXd dh_carry = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd dc_carry = Eigen::VectorXd::Zero(H);
  for (int t = T - 1; t >= 0; --t) {
    Eigen::ArrayXd i = trace.gates.row(t).segment(0, H).transpose().array();
    Eigen::ArrayXd f = trace.gates.row(t).segment(H, H).transpose().array();
    Eigen::ArrayXd g = trace.gates.row(t).segment(2 * H, H).transpose().array();
    Eigen::ArrayXd o = trace.gates.row(t).segment(3 * H, H).transpose().array();
    Eigen::ArrayXd tc = trace.tanh_c.row(t).transpose().array();
    Eigen::ArrayXd c_prev = Eigen::ArrayXd::Zero(H);
    if (t > 0) c_prev = trace.cells.row(t - 1).transpose().array();
    Eigen::ArrayXd dh = dh_ext.row(t).transpose().array() + dh_carry.array();
    Eigen::ArrayXd do_ = dh * tc;
    Eigen::ArrayXd dc = dc_carry.array() + dh * o * (1.0 - tc.square());
    Eigen::ArrayXd di = dc * g;
    Eigen::ArrayXd dg = dc * i;
    Eigen::ArrayXd df = dc * c_prev;
    dc_carry = (dc * f).matrix();
    Eigen::VectorXd dpre(4 * H);
    dpre.segment(0, H) = (di * i * (1.0 - i)).matrix();
    dpre.segment(H, H) = (df * f * (1.0 - f)).matrix();
    dpre.segment(2 * H, H) = (dg * (1.0 - g.square())).matrix();
    dpre.segment(3 * H, H) = (do_ * o * (1.0 - o)).matrix();
    c.wx.grad.noalias() += dpre * x.row(t);
    if (t > 0) c.wh.grad.noalias() += dpre * trace.h.row(t - 1);
    c.b.grad.col(0).noalias() += dpre;
    dx.row(t) = (c.wx.value.transpose() * dpre).transpose();
    dh_carry = c.wh.value.transpose() * dpre;
  }
  return dx;
}

BlstmLayer make_blstm(const std::string& name, int in, int hidden) {
  BlstmLayer l;
  l.fwd = make_lstm(name + ".fwd", in, hidden);
  l.bwd = make_lstm(name + ".bwd", in, hidden);
  return l;
}

void init_blstm(BlstmLayer& l, Rng& rng) {
  init_lstm(l.fwd, rng);
  init_lstm(l.bwd, rng);
}

BlstmTrace blstm_forward(const BlstmLayer& l, const Eigen::MatrixXd& x) {
  BlstmTrace tr;
  tr.fwd = lstm_forward(l.fwd, x);
  tr.x_rev = reverse_rows(x);
  tr.bwd = lstm_forward(l.bwd, tr.x_rev);
  const int H = l.hidden();
  tr.out.resize(x.rows(), 2 * H);
  tr.out.leftCols(H) = tr.fwd.h;
  tr.out.rightCols(H) = reverse_rows(tr.bwd.h);
  return tr;
}

Eigen::MatrixXd blstm_backward(BlstmLayer& l, const Eigen::MatrixXd& x,
                               const BlstmTrace& trace, const Eigen::MatrixXd& dout) {
  const int H = l.hidden();
  Eigen::MatrixXd dx = lstm_backward(l.fwd, x, trace.fwd, dout.leftCols(H));
  Eigen::MatrixXd dx_rev = lstm_backward(l.bwd, trace.x_rev, trace.bwd,
                                         reverse_rows(dout.rightCols(H)));
  dx.noalias() += reverse_rows(dx_rev);
  return dx;
}

}  // namespace faceanim
