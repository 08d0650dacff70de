// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "faceanim/core/mesh.hpp"
#include "faceanim/model/config.hpp"
#include "faceanim/model/layers.hpp"

namespace faceanim {

/// Outer product of the constant-augmented embeddings, flattened row-major
/// with the audio-augmented vector indexing rows:
/// out[i * (d_l + 1) + j] = [h_a; 1][i] * [h_l; 1][j].
Eigen::VectorXd tensor_fuse(const Eigen::VectorXd& h_a, const Eigen::VectorXd& h_l);

/// Plain concatenation [h_a; h_l], the fusion-ablation baseline.
Eigen::VectorXd concat_fuse(const Eigen::VectorXd& h_a, const Eigen::VectorXd& h_l);

/// Per-frame encoder outputs for one utterance.
struct EncoderOutputs {
  Eigen::MatrixXd audio;  // T x d_a  (H^a)
  Eigen::MatrixXd text;   // T x d_l  (H^l)
};

/// Intermediate activations of one forward pass, kept for backprop.
struct ForwardTrace {
  FusionMode mode = FusionMode::kTensor;
  int speaker = 0;
  // audio encoder
  Eigen::MatrixXd mel;  // network input, T x C
  std::array<Eigen::MatrixXd, 4> conv_in;
  std::array<Eigen::MatrixXd, 4> conv_pre;  // pre-activation conv outputs
  Eigen::MatrixXd audio_cat;                // T x (C + S)
  Eigen::MatrixXd h_a;                      // T x d_a
  // text encoder
  Eigen::MatrixXd text_in;   // T x 768
  Eigen::MatrixXd text_pre;  // T x text_hidden, pre-activation
  Eigen::MatrixXd text_mid;  // T x text_embed, LSTM input
  LstmTrace text_lstm;
  Eigen::MatrixXd h_l;  // T x d_l
  // fusion + decoder
  Eigen::MatrixXd fused;  // T x fused_width
  Eigen::MatrixXd dec1;   // T x dec_hidden
  BlstmTrace bl1;
  BlstmTrace bl2;
  Eigen::MatrixXd offsets;  // T x 3V, double precision
};

/// The complete joint audio-text network. Parameter layout is fixed by the
/// ArchConfig and the fusion mode chosen at construction (the fusion mode
/// sets the width of the first decoder FC).
class Model {
public:
  Model(const ArchConfig& cfg, FusionMode mode);

  /// Seeded uniform [-sqrt(1/fan_in), sqrt(1/fan_in)] initialization.
  void init_params(uint64_t seed);

  const ArchConfig& config() const { return cfg_; }
  FusionMode fusion_mode() const { return mode_; }

  /// All learnable parameters in a fixed registry order.
  std::vector<Param*> params();
  std::vector<const Param*> params() const;

  void zero_grads();

  /// H^a from mel features (already scaled for the network) and a speaker
  /// one-hot. Trace is optional; pass nullptr for inference-only calls.
  Eigen::MatrixXd audio_encode(const Eigen::MatrixXd& mel, int speaker,
                               ForwardTrace* trace) const;

  /// H^l from per-frame text features.
  Eigen::MatrixXd text_encode(const Eigen::MatrixXd& text, ForwardTrace* trace) const;

  /// Fused frames -> per-frame vertex offsets (T x 3V).
  Eigen::MatrixXd decode(const Eigen::MatrixXd& fused, ForwardTrace* trace) const;

  /// Full forward pass to offsets. For unimodal fusion modes the absent
  /// modality's matrix may be empty and its encoder is never evaluated.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& mel, const Eigen::MatrixXd& text,
                          int speaker, ForwardTrace* trace) const;

  /// Reverse-mode pass: accumulates parameter gradients from dL/d(offsets).
  /// Returns gradients w.r.t. the mel and text inputs (empty when the
  /// modality was not used).
  struct InputGrads {
    Eigen::MatrixXd mel;
    Eigen::MatrixXd text;
  };
  InputGrads backward(const ForwardTrace& trace, const Eigen::MatrixXd& d_offsets);

  /// Offsets plus template, cast to a float32 mesh sequence.
  MeshSequence offsets_to_mesh(const Eigen::MatrixXd& offsets,
                               const TemplateMesh& tmpl, uint16_t frame_rate) const;

  // Parameter groups (public for checkpoint io and tests).
  std::array<DilatedConv, 4> conv;
  Dense audio_fc;
  Dense text_fc1;
  Dense text_fc2;
  LstmCell text_lstm;
  Dense dec_fc1;
  BlstmLayer blstm1;
  BlstmLayer blstm2;
  Dense dec_fc2;

private:
  Eigen::MatrixXd fuse_frames(const Eigen::MatrixXd& h_a,
                              const Eigen::MatrixXd& h_l) const;

  ArchConfig cfg_;
  FusionMode mode_;
};

/// Validates a one-hot vector (single 1 entry, rest 0) and returns the index.
int one_hot_index(const Eigen::VectorXd& one_hot);

/// Spec-level audio encoder entry point taking an explicit one-hot vector.
Eigen::MatrixXd audio_encode(const Model& model, const Eigen::MatrixXd& mel,
                             const Eigen::VectorXd& speaker_one_hot);

/// Full forward pass that checks sequence-length agreement and returns a
/// mesh sequence anchored on the template.
MeshSequence model_predict(const Model& model, const Eigen::MatrixXd& mel,
                           const Eigen::MatrixXd& text, int speaker,
                           const TemplateMesh& tmpl, uint16_t frame_rate);

/// Maps raw dB mel values into the network's input range. Fixed affine
/// transform (db + 80) / 80, recorded in checkpoint manifests.
Eigen::MatrixXd scale_mel_for_network(const Eigen::MatrixXd& mel_db);

}  // namespace faceanim
