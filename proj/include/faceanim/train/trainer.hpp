// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "faceanim/core/mesh.hpp"
#include "faceanim/model/checkpoint.hpp"
#include "faceanim/model/network.hpp"
#include "faceanim/text/embedding.hpp"

namespace faceanim {

/// Training-time hyperparameters and run wiring.
struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 1;  // only 1 is supported
  int epochs = 100;
  uint64_t seed = 0;
  FusionMode fusion = FusionMode::kTensor;
  bool normalize_loss = true;  // divide the squared-error sum by T*V
  int checkpoint_every = 0;    // extra checkpoint every k epochs; 0 = end only
  std::string checkpoint_dir;  // empty: keep the model in memory only

  void validate() const;
};

/// Corpus manifest: utterance table plus shared corpus files. All paths are
/// resolved relative to the manifest's directory.
struct CorpusManifest {
  std::string root;  // directory of the manifest file
  uint16_t frame_rate = 25;
  uint32_t vertex_count = 0;
  uint32_t speaker_count = 0;
  std::string template_path;
  std::string region_mask_path;
  std::vector<Utterance> train_utterances;
  std::vector<Utterance> test_utterances;

  std::string resolve(const std::string& rel) const;
};

CorpusManifest load_corpus_manifest(const std::string& path);

/// One utterance with every model input/target precomputed.
struct PreparedUtterance {
  std::string id;
  int speaker = 0;
  int frames = 0;
  Eigen::MatrixXd mel;            // T x 128, network-scaled dB features
  Eigen::MatrixXd text;           // T x 768, expanded and smoothed
  Eigen::MatrixXd truth_offsets;  // T x 3V, truth minus template
};

PreparedUtterance prepare_utterance(const CorpusManifest& manifest,
                                    const Utterance& utt, const TemplateMesh& tmpl,
                                    const EmbeddingProvider& provider);

std::vector<PreparedUtterance> prepare_utterances(const CorpusManifest& manifest,
                                                  const std::vector<Utterance>& utts,
                                                  const TemplateMesh& tmpl,
                                                  const EmbeddingProvider& provider);

struct TrainOutput {
  std::unique_ptr<Model> model;
  std::vector<double> epoch_mean_loss;  // training loss per epoch
  double initial_loss = 0.0;            // dataset mean loss before training
  double final_loss = 0.0;              // dataset mean loss after training
};

/// Runs the optimization loop: per epoch a seeded shuffle of the utterance
/// order, then per utterance forward, loss, backward, one Adam step.
/// Deterministic given (config, arch, data). When config.checkpoint_dir is
/// set, writes the final checkpoint plus loss_log.csv there.
TrainOutput train(const TrainConfig& config, const ArchConfig& arch,
                  const std::vector<PreparedUtterance>& data,
                  const std::function<void(int, double)>& on_epoch = nullptr);

/// Dataset mean loss (normalized per config) without parameter updates.
double evaluate_loss(const Model& model, const std::vector<PreparedUtterance>& data,
                     bool normalized);

}  // namespace faceanim
