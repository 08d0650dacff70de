// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "faceanim/common/rng.hpp"
#include "faceanim/model/network.hpp"
#include "faceanim/train/loss.hpp"

using namespace faceanim;

namespace {

ArchConfig tiny_arch() {
  ArchConfig cfg;
  cfg.mel_channels = 7;
  cfg.audio_embed = 5;
  cfg.text_dim = 9;
  cfg.text_hidden = 6;
  cfg.text_embed = 3;
  cfg.dec_hidden = 8;
  cfg.blstm_hidden = 4;
  cfg.vertex_count = 4;
  cfg.speaker_count = 2;
  return cfg;
}

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  }
  return m;
}

void zero_all_params(Model& model) {
  for (Param* p : model.params()) p->value.setZero();
}

struct FdProblem {
  Eigen::MatrixXd mel, text, target;
  int speaker = 0;
};

FdProblem make_problem(const ArchConfig& cfg, int T, uint64_t seed) {
  Rng rng(seed);
  FdProblem p;
  p.mel = random_matrix(rng, T, cfg.mel_channels, 0.8);
  p.text = random_matrix(rng, T, cfg.text_dim, 0.8);
  p.target = random_matrix(rng, T, 3 * cfg.vertex_count, 0.3);
  p.speaker = 1;
  return p;
}

double problem_loss(const Model& model, const FdProblem& p) {
  Eigen::MatrixXd offsets = model.forward(p.mel, p.text, p.speaker, nullptr);
  return offset_loss_and_grad(offsets, p.target, true, nullptr);
}

/// Central finite differences over every parameter entry. Returns the worst
/// relative error against the analytic gradient.
double max_grad_rel_error(Model& model, const FdProblem& p, double eps = 1e-5) {
  ForwardTrace trace;
  Eigen::MatrixXd offsets = model.forward(p.mel, p.text, p.speaker, &trace);
  Eigen::MatrixXd d_offsets;
  offset_loss_and_grad(offsets, p.target, true, &d_offsets);
  model.zero_grads();
  model.backward(trace, d_offsets);

  double worst = 0.0;
  for (Param* param : model.params()) {
    for (Eigen::Index i = 0; i < param->value.rows(); ++i) {
      for (Eigen::Index j = 0; j < param->value.cols(); ++j) {
        double saved = param->value(i, j);
        param->value(i, j) = saved + eps;
        double up = problem_loss(model, p);
        param->value(i, j) = saved - eps;
        double down = problem_loss(model, p);
        param->value(i, j) = saved;
        double fd = (up - down) / (2.0 * eps);
        double an = param->grad(i, j);
        double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-4});
        worst = std::max(worst, rel);
      }
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("dilated conv: identity kernel passes input through") {
  DilatedConv c = make_dilated_conv("c", 3, 3, 4);
  c.w_center.value.setIdentity();
  Rng rng(1);
  Eigen::MatrixXd x = random_matrix(rng, 10, 3);
  Eigen::MatrixXd y = conv_forward(c, x);
  CHECK((y - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dilated conv: zero input yields the bias") {
  DilatedConv c = make_dilated_conv("c", 2, 5, 2);
  c.b.value << 1.5, -0.25, 0.0, 3.0, 2.0;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(7, 2);
  Eigen::MatrixXd y = conv_forward(c, x);
  for (int t = 0; t < 7; ++t) {
    for (int f = 0; f < 5; ++f) CHECK(y(t, f) == c.b.value(f, 0));
  }
}

TEST_CASE("dilated conv: [1,2,3,4,5] * [1,1,1] at dilation 2 = [4,6,9,6,8]") {
  DilatedConv c = make_dilated_conv("c", 1, 1, 2);
  c.w_prev.value(0, 0) = 1.0;
  c.w_center.value(0, 0) = 1.0;
  c.w_next.value(0, 0) = 1.0;
  Eigen::MatrixXd x(5, 1);
  x << 1, 2, 3, 4, 5;
  Eigen::MatrixXd y = conv_forward(c, x);
  Eigen::MatrixXd want(5, 1);
  want << 4, 6, 9, 6, 8;
  CHECK((y - want).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dilated conv: shape mismatch raises") {
  DilatedConv c = make_dilated_conv("c", 4, 4, 1);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(5, 3);
  CHECK_THROWS_AS(conv_forward(c, x), DimensionError);
}

TEST_CASE("audio encoder: zero weights leave only the fc bias") {
  ArchConfig cfg = tiny_arch();
  Model model(cfg, FusionMode::kTensor);
  zero_all_params(model);
  Rng rng(2);
  for (Eigen::Index i = 0; i < model.audio_fc.b.value.rows(); ++i) {
    model.audio_fc.b.value(i, 0) = rng.normal();
  }
  Eigen::MatrixXd mel = random_matrix(rng, 6, cfg.mel_channels);
  Eigen::MatrixXd h_a = model.audio_encode(mel, 0, nullptr);
  for (int t = 0; t < 6; ++t) {
    for (int f = 0; f < cfg.audio_embed; ++f) {
      CHECK(h_a(t, f) == doctest::Approx(model.audio_fc.b.value(f, 0)).epsilon(1e-15));
    }
  }
}

TEST_CASE("audio encoder: paper-scale output shape is T x 128") {
  ArchConfig cfg;
  cfg.vertex_count = 10;  // decoder width does not matter here
  cfg.speaker_count = 6;
  Model model(cfg, FusionMode::kTensor);
  model.init_params(3);
  Rng rng(4);
  Eigen::MatrixXd mel = random_matrix(rng, 40, 128);
  Eigen::MatrixXd h_a = model.audio_encode(mel, 2, nullptr);
  CHECK(h_a.rows() == 40);
  CHECK(h_a.cols() == 128);
}

TEST_CASE("audio encoder: impulse response stays within radius 15 <= 30") {
  ArchConfig cfg = tiny_arch();
  Model model(cfg, FusionMode::kTensor);
  model.init_params(5);
  const int T = 80, hit = 40;
  Rng rng(6);
  Eigen::MatrixXd mel = random_matrix(rng, T, cfg.mel_channels);
  Eigen::MatrixXd base = model.audio_encode(mel, 0, nullptr);
  Eigen::MatrixXd bumped = mel;
  bumped(hit, 2) += 1.0;
  Eigen::MatrixXd pert = model.audio_encode(bumped, 0, nullptr);
  Eigen::VectorXd diff = (pert - base).cwiseAbs().rowwise().maxCoeff();
  int radius = 0;
  for (int t = 0; t < T; ++t) {
    if (diff[t] != 0.0) radius = std::max(radius, std::abs(t - hit));
  }
  // kernel 3 with dilations 1+2+4+8 gives an exact radius of 15
  CHECK(radius == 15);
  for (int t = 0; t < T; ++t) {
    if (std::abs(t - hit) > 30) CHECK(diff[t] == 0.0);
  }
  CHECK(diff[hit] > 0.0);
}

TEST_CASE("audio encoder: speaker one-hot validation") {
  ArchConfig cfg = tiny_arch();
  Model model(cfg, FusionMode::kTensor);
  model.init_params(8);
  Rng rng(9);
  Eigen::MatrixXd mel = random_matrix(rng, 4, cfg.mel_channels);
  CHECK_THROWS_AS(model.audio_encode(mel, 5, nullptr), InputError);

  Eigen::VectorXd bad_hot(2);
  bad_hot << 1.0, 1.0;
  CHECK_THROWS_AS(audio_encode(model, mel, bad_hot), InputError);
  Eigen::VectorXd not_hot(2);
  not_hot << 0.3, 0.7;
  CHECK_THROWS_AS(audio_encode(model, mel, not_hot), InputError);
  Eigen::VectorXd good(2);
  good << 0.0, 1.0;
  Eigen::MatrixXd via_hot = audio_encode(model, mel, good);
  Eigen::MatrixXd via_index = model.audio_encode(mel, 1, nullptr);
  CHECK((via_hot - via_index).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("text encoder: all-zero parameters give all-zero embeddings") {
  ArchConfig cfg = tiny_arch();
  Model model(cfg, FusionMode::kTensor);
  zero_all_params(model);
  Rng rng(10);
  Eigen::MatrixXd text = random_matrix(rng, 12, cfg.text_dim);
  Eigen::MatrixXd h_l = model.text_encode(text, nullptr);
  CHECK(h_l.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("text encoder: output shape is T x 64 at paper scale") {
  ArchConfig cfg;
  cfg.vertex_count = 10;
  cfg.speaker_count = 6;
  Model model(cfg, FusionMode::kTensor);
  model.init_params(11);
  Rng rng(12);
  Eigen::MatrixXd text = random_matrix(rng, 40, 768);
  Eigen::MatrixXd h_l = model.text_encode(text, nullptr);
  CHECK(h_l.rows() == 40);
  CHECK(h_l.cols() == 64);
}

TEST_CASE("text encoder: forward LSTM is causal") {
  ArchConfig cfg = tiny_arch();
  Model model(cfg, FusionMode::kTensor);
  model.init_params(13);
  Rng rng(14);
  const int T = 20, hit = 11;
  Eigen::MatrixXd text = random_matrix(rng, T, cfg.text_dim);
  Eigen::MatrixXd base = model.text_encode(text, nullptr);
  Eigen::MatrixXd bumped = text;
  bumped(hit, 3) += 1.0;
  Eigen::MatrixXd pert = model.text_encode(bumped, nullptr);
  for (int t = 0; t < hit; ++t) {
    CHECK((pert.row(t) - base.row(t)).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK((pert.row(hit) - base.row(hit)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("tensor fusion: 2x2 hand example") {
  Eigen::VectorXd h_a(1), h_l(1);
  h_a << 2.0;
  h_l << 3.0;
  Eigen::VectorXd fused = tensor_fuse(h_a, h_l);
  REQUIRE(fused.size() == 4);
  CHECK(fused[0] == 6.0);
  CHECK(fused[1] == 2.0);
  CHECK(fused[2] == 3.0);
  CHECK(fused[3] == 1.0);
}

TEST_CASE("tensor fusion: zero embeddings leave only the constant cell") {
  Eigen::VectorXd h_a = Eigen::VectorXd::Zero(5);
  Eigen::VectorXd h_l = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd fused = tensor_fuse(h_a, h_l);
  REQUIRE(fused.size() == 24);
  for (int i = 0; i < 23; ++i) CHECK(fused[i] == 0.0);
  CHECK(fused[23] == 1.0);
}

TEST_CASE("tensor fusion: paper-scale width and slice recovery") {
  Rng rng(15);
  Eigen::VectorXd h_a = random_matrix(rng, 128, 1).col(0);
  Eigen::VectorXd h_l = random_matrix(rng, 64, 1).col(0);
  Eigen::VectorXd fused = tensor_fuse(h_a, h_l);
  CHECK(fused.size() == 8385);  // (128 + 1) * (64 + 1)
  // constant-column slice recovers h_a, constant-row slice recovers h_l
  for (int i = 0; i < 128; ++i) CHECK(fused[i * 65 + 64] == h_a[i]);
  for (int j = 0; j < 64; ++j) CHECK(fused[128 * 65 + j] == h_l[j]);
  CHECK(fused[8384] == 1.0);
}

TEST_CASE("concat fusion") {
  Eigen::VectorXd h_a(2), h_l(1);
  h_a << 1.0, 2.0;
  h_l << 3.0;
  Eigen::VectorXd fused = concat_fuse(h_a, h_l);
  REQUIRE(fused.size() == 3);
  CHECK(fused[0] == 1.0);
  CHECK(fused[1] == 2.0);
  CHECK(fused[2] == 3.0);
  CHECK(concat_fuse(Eigen::VectorXd::Zero(128), Eigen::VectorXd::Zero(64)).size() == 192);
}

TEST_CASE("decoder: zero final fc reproduces the template") {
  ArchConfig cfg = tiny_arch();
  Model model(cfg, FusionMode::kTensor);
  model.init_params(16);
  model.dec_fc2.w.value.setZero();
  model.dec_fc2.b.value.setZero();
  Rng rng(17);
  Eigen::MatrixXd mel = random_matrix(rng, 5, cfg.mel_channels);
  Eigen::MatrixXd text = random_matrix(rng, 5, cfg.text_dim);
  std::vector<float> tv(static_cast<size_t>(cfg.vertex_count) * 3);
  for (float& f : tv) f = static_cast<float>(rng.normal());
  TemplateMesh tmpl = TemplateMesh::create(static_cast<uint32_t>(cfg.vertex_count), tv);
  MeshSequence out = model_predict(model, mel, text, 0, tmpl, 25);
  REQUIRE(out.frame_count == 5);
  for (uint32_t t = 0; t < 5; ++t) {
    for (uint32_t v = 0; v < out.vertex_count; ++v) {
      for (int k = 0; k < 3; ++k) CHECK(out.at(t, v)[k] == tmpl.at(v)[k]);
    }
  }
}

TEST_CASE("decoder: backward direction carries the last frame to the first") {
  ArchConfig cfg = tiny_arch();
  Model model(cfg, FusionMode::kTensor);
  model.init_params(18);
  Rng rng(19);
  const int T = 12;
  Eigen::MatrixXd fused = random_matrix(rng, T, cfg.fused_width(FusionMode::kTensor));
  Eigen::MatrixXd base = model.decode(fused, nullptr);
  Eigen::MatrixXd bumped = fused;
  bumped(T - 1, 0) += 1.0;
  Eigen::MatrixXd pert = model.decode(bumped, nullptr);
  CHECK((pert.row(0) - base.row(0)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("forward: output shape contract and determinism") {
  ArchConfig cfg = tiny_arch();
  cfg.vertex_count = 100;
  Model model(cfg, FusionMode::kTensor);
  model.init_params(20);
  Rng rng(21);
  Eigen::MatrixXd mel = random_matrix(rng, 40, cfg.mel_channels);
  Eigen::MatrixXd text = random_matrix(rng, 40, cfg.text_dim);
  Eigen::MatrixXd a = model.forward(mel, text, 1, nullptr);
  CHECK(a.rows() == 40);
  CHECK(a.cols() == 300);
  Eigen::MatrixXd b = model.forward(mel, text, 1, nullptr);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);  // bit-identical
}

TEST_CASE("forward: sequence length mismatch reports both lengths") {
  ArchConfig cfg = tiny_arch();
  Model model(cfg, FusionMode::kTensor);
  model.init_params(22);
  Rng rng(23);
  Eigen::MatrixXd mel = random_matrix(rng, 8, cfg.mel_channels);
  Eigen::MatrixXd text = random_matrix(rng, 9, cfg.text_dim);
  CHECK_THROWS_WITH_AS(model.forward(mel, text, 0, nullptr),
                       doctest::Contains("8"), DimensionError);
}

TEST_CASE("forward: speaker conditioning changes the audio embedding") {
  ArchConfig cfg = tiny_arch();
  Model model(cfg, FusionMode::kTensor);
  model.init_params(24);
  Rng rng(25);
  Eigen::MatrixXd mel = random_matrix(rng, 6, cfg.mel_channels);
  Eigen::MatrixXd h0 = model.audio_encode(mel, 0, nullptr);
  Eigen::MatrixXd h1 = model.audio_encode(mel, 1, nullptr);
  // audio_fc speaker-block weights are nonzero after init, so H^a must move
  CHECK((h0 - h1).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("unimodal modes bypass the absent encoder") {
  ArchConfig cfg = tiny_arch();
  Rng rng(26);
  Eigen::MatrixXd mel = random_matrix(rng, 7, cfg.mel_channels);
  Eigen::MatrixXd text = random_matrix(rng, 7, cfg.text_dim);

  Model audio_model(cfg, FusionMode::kAudioOnly);
  audio_model.init_params(27);
  Eigen::MatrixXd out_a = audio_model.forward(mel, Eigen::MatrixXd(), 0, nullptr);
  CHECK(out_a.rows() == 7);

  Model text_model(cfg, FusionMode::kTextOnly);
  text_model.init_params(28);
  Eigen::MatrixXd out_t = text_model.forward(Eigen::MatrixXd(), text, 0, nullptr);
  CHECK(out_t.rows() == 7);
}

TEST_CASE("gradients: parameters the loss cannot see stay at zero") {
  ArchConfig cfg = tiny_arch();
  Model model(cfg, FusionMode::kAudioOnly);
  model.init_params(29);
  FdProblem p = make_problem(cfg, 5, 30);
  ForwardTrace trace;
  Eigen::MatrixXd offsets = model.forward(p.mel, Eigen::MatrixXd(), p.speaker, &trace);
  Eigen::MatrixXd d_offsets;
  offset_loss_and_grad(offsets, p.target, true, &d_offsets);
  model.zero_grads();
  model.backward(trace, d_offsets);
  // the text encoder is bypassed entirely in audio-only mode
  CHECK(model.text_fc1.w.grad.cwiseAbs().maxCoeff() == 0.0);
  CHECK(model.text_fc2.w.grad.cwiseAbs().maxCoeff() == 0.0);
  CHECK(model.text_lstm.wx.grad.cwiseAbs().maxCoeff() == 0.0);
  // while the used path is live
  CHECK(model.dec_fc2.w.grad.cwiseAbs().maxCoeff() > 0.0);
  CHECK(model.audio_fc.w.grad.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("gradients: tensor-fusion backward matches the outer-product rule") {
  // z = [a;1] outer [l;1]; dL/da = G_aug * [l;1] restricted to the a rows
  ArchConfig cfg = tiny_arch();
  cfg.audio_embed = 2;
  cfg.text_embed = 2;
  Model model(cfg, FusionMode::kTensor);
  model.init_params(31);
  FdProblem p = make_problem(cfg, 4, 32);

  ForwardTrace trace;
  Eigen::MatrixXd offsets = model.forward(p.mel, p.text, p.speaker, &trace);
  Eigen::MatrixXd d_offsets;
  offset_loss_and_grad(offsets, p.target, true, &d_offsets);
  model.zero_grads();
  model.backward(trace, d_offsets);

  // The full FD test covers the chain end to end; here check the slice
  // identities the fused trace must satisfy for the outer-product rule.
  const int dl = cfg.text_embed;
  for (int t = 0; t < 4; ++t) {
    for (int i = 0; i < cfg.audio_embed; ++i) {
      CHECK(trace.fused(t, i * (dl + 1) + dl) ==
            doctest::Approx(trace.h_a(t, i)).epsilon(1e-15));
    }
    for (int j = 0; j < dl; ++j) {
      CHECK(trace.fused(t, cfg.audio_embed * (dl + 1) + j) ==
            doctest::Approx(trace.h_l(t, j)).epsilon(1e-15));
    }
    CHECK(trace.fused(t, (cfg.audio_embed + 1) * (dl + 1) - 1) == 1.0);
  }
}

TEST_CASE("gradients: finite differences across all fusion modes") {
  ArchConfig cfg = tiny_arch();
  for (FusionMode mode : {FusionMode::kTensor, FusionMode::kConcat,
                          FusionMode::kAudioOnly, FusionMode::kTextOnly}) {
    CAPTURE(to_string(mode));
    Model model(cfg, mode);
    model.init_params(33);
    FdProblem p = make_problem(cfg, 6, 34);
    if (mode == FusionMode::kAudioOnly) p.text.resize(0, 0);
    if (mode == FusionMode::kTextOnly) p.mel.resize(0, 0);
    double worst = max_grad_rel_error(model, p);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("gradients: input gradients match finite differences") {
  ArchConfig cfg = tiny_arch();
  Model model(cfg, FusionMode::kTensor);
  model.init_params(35);
  FdProblem p = make_problem(cfg, 5, 36);

  ForwardTrace trace;
  Eigen::MatrixXd offsets = model.forward(p.mel, p.text, p.speaker, &trace);
  Eigen::MatrixXd d_offsets;
  offset_loss_and_grad(offsets, p.target, true, &d_offsets);
  model.zero_grads();
  Model::InputGrads grads = model.backward(trace, d_offsets);

  const double eps = 1e-5;
  Rng rng(37);
  for (int k = 0; k < 10; ++k) {
    int t = rng.uniform_int(0, 4);
    int c = rng.uniform_int(0, cfg.mel_channels - 1);
    double saved = p.mel(t, c);
    p.mel(t, c) = saved + eps;
    double up = problem_loss(model, p);
    p.mel(t, c) = saved - eps;
    double down = problem_loss(model, p);
    p.mel(t, c) = saved;
    double fd = (up - down) / (2.0 * eps);
    CHECK(grads.mel(t, c) == doctest::Approx(fd).epsilon(1e-4));
  }
}
