// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#include "faceanim/train/adam.hpp"

#include <cmath>

#include "faceanim/common/error.hpp"

namespace faceanim {

void adam_step(std::vector<Param*>& params, AdamState& state, double lr) {
  if (state.m.empty()) {
    state.m.reserve(params.size());
    state.v.reserve(params.size());
    for (const Param* p : params) {
      state.m.push_back(Eigen::MatrixXd::Zero(p->value.rows(), p->value.cols()));
      state.v.push_back(Eigen::MatrixXd::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (state.m.size() != params.size()) {
    throw DimensionError("adam state does not match parameter registry");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t k = 0; k < params.size(); ++k) {
    Param& p = *params[k];
    if (!p.grad.allFinite()) {
      throw InputError("non-finite gradient for parameter " + p.name);
    }
    Eigen::MatrixXd& m = state.m[k];
    Eigen::MatrixXd& v = state.v[k];
    m = state.beta1 * m + (1.0 - state.beta1) * p.grad;
    v = state.beta2 * v.array().matrix() +
        (1.0 - state.beta2) * p.grad.array().square().matrix();
    Eigen::ArrayXXd m_hat = m.array() / bc1;
    Eigen::ArrayXXd v_hat = v.array() / bc2;
    p.value.array() -= lr * m_hat / (v_hat.sqrt() + state.eps);
  }
}

}  // namespace faceanim
