// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#include "faceanim/train/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "faceanim/audio/mel.hpp"
#include "faceanim/common/rng.hpp"
#include "faceanim/core/msq.hpp"
#include "faceanim/text/frames.hpp"
#include "faceanim/train/adam.hpp"
#include "faceanim/train/loss.hpp"

namespace faceanim {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size != 1) throw ConfigError("only batch size 1 is supported");
}

std::string CorpusManifest::resolve(const std::string& rel) const {
  fs::path p(rel);
  if (p.is_absolute()) return rel;
  return (fs::path(root) / p).string();
}

CorpusManifest load_corpus_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest parse error: " + std::string(e.what()));
  }
  CorpusManifest m;
  m.root = fs::path(path).parent_path().string();
  if (m.root.empty()) m.root = ".";
  m.frame_rate = j.value("frame_rate", 25);
  m.vertex_count = j.at("vertex_count").get<uint32_t>();
  m.speaker_count = j.at("speaker_count").get<uint32_t>();
  m.template_path = j.at("template").get<std::string>();
  m.region_mask_path = j.value("region_mask", std::string());
  for (const auto& u : j.at("utterances")) {
    Utterance utt;
    utt.id = u.at("id").get<std::string>();
    utt.audio_path = u.at("audio").get<std::string>();
    utt.alignment_path = u.at("alignment").get<std::string>();
    utt.mesh_path = u.value("mesh", std::string());
    utt.speaker_index = u.at("speaker_index").get<uint32_t>();
    if (utt.speaker_index >= m.speaker_count) {
      throw ValidationError("utterance " + utt.id + " has speaker_index " +
                            std::to_string(utt.speaker_index) + " but S=" +
                            std::to_string(m.speaker_count));
    }
    std::string split = u.value("split", "train");
    for (const std::string* rel :
         {&utt.audio_path, &utt.alignment_path, &utt.mesh_path}) {
      if (!rel->empty() && !fs::exists(m.resolve(*rel))) {
        throw ValidationError("utterance " + utt.id + ": missing file " +
                              m.resolve(*rel));
      }
    }
    if (split == "test") {
      m.test_utterances.push_back(std::move(utt));
    } else {
      m.train_utterances.push_back(std::move(utt));
    }
  }
  return m;
}

PreparedUtterance prepare_utterance(const CorpusManifest& manifest,
                                    const Utterance& utt, const TemplateMesh& tmpl,
                                    const EmbeddingProvider& provider) {
  if (utt.mesh_path.empty()) {
    throw InputError("utterance " + utt.id + " has no ground-truth mesh");
  }
  MeshSequence truth = load_mesh_sequence(manifest.resolve(utt.mesh_path));
  if (truth.vertex_count != tmpl.vertex_count) {
    throw DimensionError("utterance " + utt.id + ": mesh V=" +
                         std::to_string(truth.vertex_count) + ", template V=" +
                         std::to_string(tmpl.vertex_count));
  }
  const int T = static_cast<int>(truth.frame_count);

  PreparedUtterance out;
  out.id = utt.id;
  out.speaker = static_cast<int>(utt.speaker_index);
  out.frames = T;

  AudioClip audio = load_audio_file(manifest.resolve(utt.audio_path));
  MelFrames mel = mel_features(audio, manifest.frame_rate, T);
  out.mel = scale_mel_for_network(mel.values);

  WordAlignment alignment = load_alignment_file(manifest.resolve(utt.alignment_path));
  TextFrames expanded =
      expand_to_frames(alignment, provider, T, manifest.frame_rate, utt.id);
  out.text = smooth_frames(expanded).values;

  OffsetSequence off = to_offsets(truth, tmpl);
  out.truth_offsets.resize(T, 3 * static_cast<int>(tmpl.vertex_count));
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < out.truth_offsets.cols(); ++i) {
      out.truth_offsets(t, i) =
          off.offsets[static_cast<size_t>(t) * out.truth_offsets.cols() + i];
    }
  }
  return out;
}

std::vector<PreparedUtterance> prepare_utterances(const CorpusManifest& manifest,
                                                  const std::vector<Utterance>& utts,
                                                  const TemplateMesh& tmpl,
                                                  const EmbeddingProvider& provider) {
  std::vector<PreparedUtterance> out;
  out.reserve(utts.size());
  for (const Utterance& u : utts) {
    out.push_back(prepare_utterance(manifest, u, tmpl, provider));
  }
  return out;
}

double evaluate_loss(const Model& model, const std::vector<PreparedUtterance>& data,
                     bool normalized) {
  double sum = 0.0;
  for (const PreparedUtterance& u : data) {
    Eigen::MatrixXd offsets = model.forward(u.mel, u.text, u.speaker, nullptr);
    sum += offset_loss_and_grad(offsets, u.truth_offsets, normalized, nullptr);
  }
  return sum / static_cast<double>(data.size());
}

TrainOutput train(const TrainConfig& config, const ArchConfig& arch,
                  const std::vector<PreparedUtterance>& data,
                  const std::function<void(int, double)>& on_epoch) {
  config.validate();
  if (data.empty()) throw InputError("training dataset is empty");

  TrainOutput out;
  out.model = std::make_unique<Model>(arch, config.fusion);
  out.model->init_params(config.seed);
  Model& model = *out.model;

  AdamState adam;
  std::vector<Param*> params = model.params();
  Rng shuffle_rng(derive_seed(config.seed, 0x5u));

  out.initial_loss = evaluate_loss(model, data, config.normalize_loss);

  CheckpointMeta meta;
  meta.seed = config.seed;
  meta.loss_normalized = config.normalize_loss;
  meta.adam_beta1 = adam.beta1;
  meta.adam_beta2 = adam.beta2;
  meta.adam_eps = adam.eps;

  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0u);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_sum = 0.0;
    for (size_t idx : order) {
      const PreparedUtterance& u = data[idx];
      ForwardTrace trace;
      Eigen::MatrixXd offsets = model.forward(u.mel, u.text, u.speaker, &trace);
      Eigen::MatrixXd d_offsets;
      double loss = offset_loss_and_grad(offsets, u.truth_offsets,
                                         config.normalize_loss, &d_offsets);
      if (!std::isfinite(loss)) {
        throw InputError("non-finite loss on utterance " + u.id + " in epoch " +
                         std::to_string(epoch));
      }
      epoch_sum += loss;
      model.zero_grads();
      model.backward(trace, d_offsets);
      adam_step(params, adam, config.learning_rate);
    }
    double mean = epoch_sum / static_cast<double>(data.size());
    out.epoch_mean_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
    if (!config.checkpoint_dir.empty() && config.checkpoint_every > 0 &&
        epoch % config.checkpoint_every == 0 && epoch != config.epochs) {
      save_checkpoint(model, meta,
                      (fs::path(config.checkpoint_dir) /
                       ("epoch_" + std::to_string(epoch)))
                          .string());
    }
  }

  out.final_loss = evaluate_loss(model, data, config.normalize_loss);

  if (!config.checkpoint_dir.empty()) {
    save_checkpoint(model, meta, config.checkpoint_dir);
    std::ofstream log(fs::path(config.checkpoint_dir) / "loss_log.csv");
    if (!log) throw IoError("cannot write loss log in " + config.checkpoint_dir);
    log << "epoch,mean_loss\n";
    char buf[64];
    for (size_t e = 0; e < out.epoch_mean_loss.size(); ++e) {
      std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", e + 1, out.epoch_mean_loss[e]);
      log << buf;
    }
  }
  return out;
}

}  // namespace faceanim
