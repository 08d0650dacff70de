// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "faceanim/common/rng.hpp"
#include "faceanim/model/checkpoint.hpp"
#include "faceanim/train/adam.hpp"
#include "faceanim/train/loss.hpp"
#include "faceanim/train/trainer.hpp"
#include "testutil.hpp"

using namespace faceanim;

namespace {

MeshSequence mesh_from(std::vector<float> v, uint32_t T, uint32_t V) {
  return MeshSequence::create(T, V, 25, std::move(v));
}

ArchConfig tiny_arch() {
  ArchConfig cfg;
  cfg.mel_channels = 6;
  cfg.audio_embed = 4;
  cfg.text_dim = 8;
  cfg.text_hidden = 5;
  cfg.text_embed = 3;
  cfg.dec_hidden = 6;
  cfg.blstm_hidden = 4;
  cfg.vertex_count = 5;
  cfg.speaker_count = 2;
  return cfg;
}

/// A tiny deterministic utterance whose offsets are a smooth function of
/// the inputs, comfortably learnable.
PreparedUtterance synthetic_utterance(const ArchConfig& cfg, int T, uint64_t seed) {
  Rng rng(seed);
  PreparedUtterance u;
  u.id = "synt_" + std::to_string(seed);
  u.speaker = static_cast<int>(seed % cfg.speaker_count);
  u.frames = T;
  u.mel.resize(T, cfg.mel_channels);
  u.text.resize(T, cfg.text_dim);
  u.truth_offsets.resize(T, 3 * cfg.vertex_count);
  for (int t = 0; t < T; ++t) {
    double phase = 2.0 * M_PI * t / T;
    for (int c = 0; c < cfg.mel_channels; ++c) {
      u.mel(t, c) = 0.5 + 0.4 * std::sin(phase + c) + 0.05 * rng.normal();
    }
    for (int d = 0; d < cfg.text_dim; ++d) {
      u.text(t, d) = 0.4 * std::cos(phase * 2 + d) + 0.05 * rng.normal();
    }
    for (int k = 0; k < 3 * cfg.vertex_count; ++k) {
      u.truth_offsets(t, k) = 0.1 * std::sin(phase + 0.3 * k);
    }
  }
  return u;
}

}  // namespace

TEST_CASE("mse loss: basic values") {
  MeshSequence a = mesh_from({1.0f, 2.0f, 3.0f}, 1, 1);
  CHECK(mse_loss(a, a) == 0.0);

  MeshSequence b = mesh_from({2.0f, 2.0f, 3.0f}, 1, 1);  // diff (1,0,0)
  CHECK(mse_loss(b, a) == 1.0);

  // T=2, V=1, squared norms 1 and 4
  MeshSequence p = mesh_from({1.0f, 0.0f, 0.0f, 0.0f, 2.0f, 0.0f}, 2, 1);
  MeshSequence q = mesh_from({0.0f, 0.0f, 0.0f, 0.0f, 0.0f, 0.0f}, 2, 1);
  CHECK(mse_loss(p, q) == 5.0);
  CHECK(mse_loss_normalized(p, q) == 2.5);
}

TEST_CASE("mse loss: shape mismatch") {
  MeshSequence a = mesh_from(std::vector<float>(6, 0.0f), 2, 1);
  MeshSequence b = mesh_from(std::vector<float>(3, 0.0f), 1, 1);
  CHECK_THROWS_AS(mse_loss(a, b), DimensionError);
}

TEST_CASE("loss is non-negative and zero only at equality") {
  Rng rng(40);
  std::vector<float> v(30);
  for (float& f : v) f = static_cast<float>(rng.normal());
  MeshSequence a = mesh_from(v, 2, 5);
  v[7] += 0.5f;
  MeshSequence b = mesh_from(v, 2, 5);
  CHECK(mse_loss(a, b) > 0.0);
  CHECK(mse_loss(a, a) == 0.0);
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
  Param p = make_matrix_param("p", 3, 2);
  Rng rng(41);
  p.init_uniform(rng, 0.5);
  Eigen::MatrixXd before = p.value;
  std::vector<Param*> params{&p};
  AdamState st;
  adam_step(params, st, 1e-3);
  CHECK(st.step == 1);
  CHECK((p.value - before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam: first step moves by about lr in the gradient direction") {
  Param p = make_matrix_param("p", 1, 1);
  p.value(0, 0) = 1.0;
  p.grad(0, 0) = 0.37;  // positive gradient: parameter must decrease
  std::vector<Param*> params{&p};
  AdamState st;
  adam_step(params, st, 1e-2);
  double delta = p.value(0, 0) - 1.0;
  CHECK(delta < 0.0);
  CHECK(std::abs(delta) <= 1e-2 * (1.0 + 1e-6));
  CHECK(std::abs(delta) > 0.99e-2);
}

TEST_CASE("adam: constant gradient does not grow the step") {
  Param p = make_matrix_param("p", 1, 1);
  std::vector<Param*> params{&p};
  AdamState st;
  p.grad(0, 0) = 2.0;
  adam_step(params, st, 1e-3);
  double first = std::abs(p.value(0, 0));
  double before = p.value(0, 0);
  p.grad(0, 0) = 2.0;
  adam_step(params, st, 1e-3);
  double second = std::abs(p.value(0, 0) - before);
  CHECK(second <= first + 1e-12);
}

TEST_CASE("adam: non-finite gradient aborts naming the parameter") {
  Param p = make_matrix_param("offending", 2, 2);
  p.grad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  std::vector<Param*> params{&p};
  AdamState st;
  CHECK_THROWS_WITH_AS(adam_step(params, st, 1e-3), doctest::Contains("offending"),
                       InputError);
}

TEST_CASE("train: config validation") {
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.epochs = 1;
  cfg.batch_size = 2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.batch_size = 1;
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("train: empty dataset is rejected") {
  TrainConfig cfg;
  CHECK_THROWS_AS(train(cfg, tiny_arch(), {}), InputError);
}

TEST_CASE("train: loss decreases on a tiny overfit task") {
  ArchConfig arch = tiny_arch();
  TrainConfig cfg;
  cfg.epochs = 150;
  cfg.seed = 7;
  cfg.learning_rate = 1e-3;
  cfg.fusion = FusionMode::kTensor;
  std::vector<PreparedUtterance> data{synthetic_utterance(arch, 12, 1)};
  TrainOutput out = train(cfg, arch, data);
  CHECK(out.final_loss < out.initial_loss * 0.5);
  CHECK(out.epoch_mean_loss.size() == 150);
}

TEST_CASE("train: same seed gives bit-identical checkpoints") {
  testing::TempDir dir("det");
  ArchConfig arch = tiny_arch();
  std::vector<PreparedUtterance> data{synthetic_utterance(arch, 10, 2),
                                      synthetic_utterance(arch, 8, 3)};
  for (const char* name : {"a", "b"}) {
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 99;
    cfg.checkpoint_dir = dir.file(name);
    train(cfg, arch, data);
  }
  auto hash_a = checkpoint_manifest_hash(dir.file("a"));
  auto hash_b = checkpoint_manifest_hash(dir.file("b"));
  CHECK(hash_a == hash_b);
  // every tensor file must match byte for byte
  LoadedCheckpoint a = load_checkpoint(dir.file("a"));
  for (const Param* p : a.model->params()) {
    std::string fa = testing::read_file_bytes(dir.file("a") + "/" + p->name + ".tns");
    std::string fb = testing::read_file_bytes(dir.file("b") + "/" + p->name + ".tns");
    CHECK(fa == fb);
    CHECK(!fa.empty());
  }
}

TEST_CASE("train: loss log is written alongside the checkpoint") {
  testing::TempDir dir("log");
  ArchConfig arch = tiny_arch();
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 5;
  cfg.checkpoint_dir = dir.file("ck");
  std::vector<PreparedUtterance> data{synthetic_utterance(arch, 6, 4)};
  TrainOutput out = train(cfg, arch, data);
  std::string log = testing::read_file_bytes(dir.file("ck") + "/loss_log.csv");
  CHECK(log.substr(0, 16) == "epoch,mean_loss\n");
  CHECK(std::count(log.begin(), log.end(), '\n') == 4);  // header + 3 epochs
  CHECK(out.epoch_mean_loss.size() == 3);
}

TEST_CASE("checkpoint: save -> load -> save is byte-identical") {
  testing::TempDir dir("ckrt");
  ArchConfig arch = tiny_arch();
  Model model(arch, FusionMode::kConcat);
  model.init_params(123);
  CheckpointMeta meta;
  meta.seed = 123;
  save_checkpoint(model, meta, dir.file("one"));
  LoadedCheckpoint loaded = load_checkpoint(dir.file("one"));
  CHECK(loaded.model->fusion_mode() == FusionMode::kConcat);
  CHECK(loaded.meta.seed == 123);
  save_checkpoint(*loaded.model, loaded.meta, dir.file("two"));
  CHECK(testing::read_file_bytes(dir.file("one") + "/manifest.json") ==
        testing::read_file_bytes(dir.file("two") + "/manifest.json"));
  for (const Param* p : loaded.model->params()) {
    CHECK(testing::read_file_bytes(dir.file("one") + "/" + p->name + ".tns") ==
          testing::read_file_bytes(dir.file("two") + "/" + p->name + ".tns"));
  }
}

TEST_CASE("checkpoint: forward pass agrees after a float32 round trip") {
  testing::TempDir dir("ckfw");
  ArchConfig arch = tiny_arch();
  Model model(arch, FusionMode::kTensor);
  model.init_params(55);
  // snap parameters to float32 so the round trip is lossless
  for (Param* p : model.params()) {
    p->value = p->value.cast<float>().cast<double>();
  }
  CheckpointMeta meta;
  save_checkpoint(model, meta, dir.file("ck"));
  LoadedCheckpoint loaded = load_checkpoint(dir.file("ck"));
  PreparedUtterance u = synthetic_utterance(arch, 9, 6);
  Eigen::MatrixXd a = model.forward(u.mel, u.text, u.speaker, nullptr);
  Eigen::MatrixXd b = loaded.model->forward(u.mel, u.text, u.speaker, nullptr);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}
