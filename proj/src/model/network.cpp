// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#include "faceanim/model/network.hpp"

#include <cmath>

namespace faceanim {

std::string to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::kTensor: return "tensor";
    case FusionMode::kConcat: return "concat";
    case FusionMode::kAudioOnly: return "audio_only";
    case FusionMode::kTextOnly: return "text_only";
  }
  throw ConfigError("unknown fusion mode");
}

FusionMode fusion_mode_from_string(const std::string& s) {
  if (s == "tensor") return FusionMode::kTensor;
  if (s == "concat") return FusionMode::kConcat;
  if (s == "audio_only" || s == "audio") return FusionMode::kAudioOnly;
  if (s == "text_only" || s == "text") return FusionMode::kTextOnly;
  throw ConfigError("unknown fusion mode: \"" + s +
                    "\" (expected tensor, concat, audio or text)");
}

std::string fusion_mode_label(FusionMode mode) {
  switch (mode) {
    case FusionMode::kTensor: return "Audio+Text (TF)";
    case FusionMode::kConcat: return "Audio+Text (C)";
    case FusionMode::kAudioOnly: return "Audio Only";
    case FusionMode::kTextOnly: return "Text Only";
  }
  throw ConfigError("unknown fusion mode");
}

Eigen::VectorXd tensor_fuse(const Eigen::VectorXd& h_a, const Eigen::VectorXd& h_l) {
  const int da = static_cast<int>(h_a.size());
  const int dl = static_cast<int>(h_l.size());
  Eigen::VectorXd out((da + 1) * (dl + 1));
  for (int i = 0; i <= da; ++i) {
    double a = i < da ? h_a[i] : 1.0;
    for (int j = 0; j <= dl; ++j) {
      double l = j < dl ? h_l[j] : 1.0;
      out[i * (dl + 1) + j] = a * l;
    }
  }
  return out;
}

Eigen::VectorXd concat_fuse(const Eigen::VectorXd& h_a, const Eigen::VectorXd& h_l) {
  Eigen::VectorXd out(h_a.size() + h_l.size());
  out.head(h_a.size()) = h_a;
  out.tail(h_l.size()) = h_l;
  return out;
}

int one_hot_index(const Eigen::VectorXd& one_hot) {
  int index = -1;
  for (int i = 0; i < one_hot.size(); ++i) {
    if (one_hot[i] == 1.0) {
      if (index >= 0) throw InputError("one-hot vector has multiple 1 entries");
      index = i;
    } else if (one_hot[i] != 0.0) {
      throw InputError("one-hot vector has an entry that is neither 0 nor 1");
    }
  }
  if (index < 0) throw InputError("one-hot vector has no 1 entry");
  return index;
}

Model::Model(const ArchConfig& cfg, FusionMode mode) : cfg_(cfg), mode_(mode) {
  cfg_.validate();
  const int c = cfg_.mel_channels;
  for (int i = 0; i < 4; ++i) {
    conv[i] = make_dilated_conv("audio_conv" + std::to_string(i), c, c,
                                cfg_.dilations[static_cast<size_t>(i)]);
  }
  audio_fc = make_dense("audio_fc", c + cfg_.speaker_count, cfg_.audio_embed);
  text_fc1 = make_dense("text_fc1", cfg_.text_dim, cfg_.text_hidden);
  text_fc2 = make_dense("text_fc2", cfg_.text_hidden, cfg_.text_embed);
  text_lstm = make_lstm("text_lstm", cfg_.text_embed, cfg_.text_embed);
  dec_fc1 = make_dense("dec_fc1", cfg_.fused_width(mode_), cfg_.dec_hidden);
  blstm1 = make_blstm("dec_blstm1", cfg_.dec_hidden, cfg_.blstm_hidden);
  blstm2 = make_blstm("dec_blstm2", 2 * cfg_.blstm_hidden, cfg_.blstm_hidden);
  dec_fc2 = make_dense("dec_fc2", 2 * cfg_.blstm_hidden, 3 * cfg_.vertex_count);
}

void Model::init_params(uint64_t seed) {
  Rng rng(seed);
  for (auto& c : conv) init_dilated_conv(c, rng);
  init_dense(audio_fc, rng);
  init_dense(text_fc1, rng);
  init_dense(text_fc2, rng);
  init_lstm(text_lstm, rng);
  init_dense(dec_fc1, rng);
  init_blstm(blstm1, rng);
  init_blstm(blstm2, rng);
  init_dense(dec_fc2, rng);
}

std::vector<Param*> Model::params() {
  std::vector<Param*> out;
  for (auto& c : conv) {
    out.push_back(&c.w_prev);
    out.push_back(&c.w_center);
    out.push_back(&c.w_next);
    out.push_back(&c.b);
  }
  auto add_dense = [&](Dense& d) {
    out.push_back(&d.w);
    out.push_back(&d.b);
  };
  auto add_lstm = [&](LstmCell& l) {
    out.push_back(&l.wx);
    out.push_back(&l.wh);
    out.push_back(&l.b);
  };
  add_dense(audio_fc);
  add_dense(text_fc1);
  add_dense(text_fc2);
  add_lstm(text_lstm);
  add_dense(dec_fc1);
  add_lstm(blstm1.fwd);
  add_lstm(blstm1.bwd);
  add_lstm(blstm2.fwd);
  add_lstm(blstm2.bwd);
  add_dense(dec_fc2);
  return out;
}

std::vector<const Param*> Model::params() const {
  auto mutable_params = const_cast<Model*>(this)->params();
  return {mutable_params.begin(), mutable_params.end()};
}

void Model::zero_grads() {
  for (Param* p : params()) p->zero_grad();
}

Eigen::MatrixXd Model::audio_encode(const Eigen::MatrixXd& mel, int speaker,
                                    ForwardTrace* trace) const {
  if (mel.cols() != cfg_.mel_channels) {
    throw DimensionError("audio encoder: input has " + std::to_string(mel.cols()) +
                         " channels, expected " + std::to_string(cfg_.mel_channels));
  }
  if (speaker < 0 || speaker >= cfg_.speaker_count) {
    throw InputError("speaker index " + std::to_string(speaker) +
                     " out of range for S=" + std::to_string(cfg_.speaker_count));
  }
  Eigen::MatrixXd x = mel;
  for (int i = 0; i < 4; ++i) {
    Eigen::MatrixXd pre = conv_forward(conv[i], x);
    if (trace) {
      trace->conv_in[static_cast<size_t>(i)] = x;
      trace->conv_pre[static_cast<size_t>(i)] = pre;
    }
    x += leaky_relu(pre, cfg_.leaky_slope);  // residual skip around conv+activation
  }
  Eigen::MatrixXd cat(x.rows(), x.cols() + cfg_.speaker_count);
  cat.leftCols(x.cols()) = x;
  cat.rightCols(cfg_.speaker_count).setZero();
  cat.col(x.cols() + speaker).setOnes();
  Eigen::MatrixXd h_a = dense_forward(audio_fc, cat);
  if (trace) {
    trace->mel = mel;
    trace->speaker = speaker;
    trace->audio_cat = cat;
    trace->h_a = h_a;
  }
  return h_a;
}

Eigen::MatrixXd Model::text_encode(const Eigen::MatrixXd& text,
                                   ForwardTrace* trace) const {
  if (text.cols() != cfg_.text_dim) {
    throw DimensionError("text encoder: input has " + std::to_string(text.cols()) +
                         " features, expected " + std::to_string(cfg_.text_dim));
  }
  Eigen::MatrixXd pre = dense_forward(text_fc1, text);
  Eigen::MatrixXd mid = dense_forward(text_fc2, leaky_relu(pre, cfg_.leaky_slope));
  LstmTrace lt = lstm_forward(text_lstm, mid);
  Eigen::MatrixXd h_l = lt.h;
  if (trace) {
    trace->text_in = text;
    trace->text_pre = pre;
    trace->text_mid = mid;
    trace->text_lstm = std::move(lt);
    trace->h_l = h_l;
  }
  return h_l;
}

Eigen::MatrixXd Model::fuse_frames(const Eigen::MatrixXd& h_a,
                                   const Eigen::MatrixXd& h_l) const {
  const int T = static_cast<int>(mode_ == FusionMode::kTextOnly ? h_l.rows() : h_a.rows());
  Eigen::MatrixXd fused(T, cfg_.fused_width(mode_));
  switch (mode_) {
    case FusionMode::kTensor:
      for (int t = 0; t < T; ++t) {
        fused.row(t) = tensor_fuse(h_a.row(t), h_l.row(t)).transpose();
      }
      break;
    case FusionMode::kConcat:
      fused.leftCols(h_a.cols()) = h_a;
      fused.rightCols(h_l.cols()) = h_l;
      break;
    case FusionMode::kAudioOnly:
      // [h_a; 1] x [1] — the augmented unimodal embedding
      fused.leftCols(h_a.cols()) = h_a;
      fused.rightCols(1).setOnes();
      break;
    case FusionMode::kTextOnly:
      fused.leftCols(h_l.cols()) = h_l;
      fused.rightCols(1).setOnes();
      break;
  }
  return fused;
}

Eigen::MatrixXd Model::decode(const Eigen::MatrixXd& fused, ForwardTrace* trace) const {
  if (fused.cols() != cfg_.fused_width(mode_)) {
    throw DimensionError("decoder: fused width " + std::to_string(fused.cols()) +
                         " does not match configured width " +
                         std::to_string(cfg_.fused_width(mode_)));
  }
  Eigen::MatrixXd dec1 = dense_forward(dec_fc1, fused);
  BlstmTrace b1 = blstm_forward(blstm1, dec1);
  BlstmTrace b2 = blstm_forward(blstm2, b1.out);
  Eigen::MatrixXd offsets = dense_forward(dec_fc2, b2.out);
  if (trace) {
    trace->fused = fused;
    trace->dec1 = dec1;
    trace->bl1 = std::move(b1);
    trace->bl2 = std::move(b2);
    trace->offsets = offsets;
  }
  return offsets;
}

Eigen::MatrixXd Model::forward(const Eigen::MatrixXd& mel, const Eigen::MatrixXd& text,
                               int speaker, ForwardTrace* trace) const {
  const bool use_audio = mode_ != FusionMode::kTextOnly;
  const bool use_text = mode_ != FusionMode::kAudioOnly;
  if (use_audio && use_text && mel.rows() != text.rows()) {
    throw DimensionError("sequence length mismatch: audio has " +
                         std::to_string(mel.rows()) + " frames, text has " +
                         std::to_string(text.rows()));
  }
  if (trace) trace->mode = mode_;
  Eigen::MatrixXd h_a, h_l;
  if (use_audio) h_a = audio_encode(mel, speaker, trace);
  if (use_text) h_l = text_encode(text, trace);
  return decode(fuse_frames(h_a, h_l), trace);
}

Model::InputGrads Model::backward(const ForwardTrace& trace,
                                  const Eigen::MatrixXd& d_offsets) {
  const bool use_audio = trace.mode != FusionMode::kTextOnly;
  const bool use_text = trace.mode != FusionMode::kAudioOnly;
  const int T = static_cast<int>(d_offsets.rows());
  const int da = cfg_.audio_embed;
  const int dl = cfg_.text_embed;

  // decoder
  Eigen::MatrixXd d_b2 = dense_backward(dec_fc2, trace.bl2.out, d_offsets);
  Eigen::MatrixXd d_b1 = blstm_backward(blstm2, trace.bl1.out, trace.bl2, d_b2);
  Eigen::MatrixXd d_dec1 = blstm_backward(blstm1, trace.dec1, trace.bl1, d_b1);
  Eigen::MatrixXd d_fused = dense_backward(dec_fc1, trace.fused, d_dec1);

  // fusion
  Eigen::MatrixXd d_ha, d_hl;
  switch (trace.mode) {
    case FusionMode::kTensor: {
      d_ha = Eigen::MatrixXd::Zero(T, da);
      d_hl = Eigen::MatrixXd::Zero(T, dl);
      for (int t = 0; t < T; ++t) {
        // d_fused row is the flattened (da+1) x (dl+1) outer-product grad
        for (int i = 0; i < da; ++i) {
          double a_grad = 0.0;
          for (int j = 0; j <= dl; ++j) {
            double l = j < dl ? trace.h_l(t, j) : 1.0;
            a_grad += d_fused(t, i * (dl + 1) + j) * l;
          }
          d_ha(t, i) = a_grad;
        }
        for (int j = 0; j < dl; ++j) {
          double l_grad = 0.0;
          for (int i = 0; i <= da; ++i) {
            double a = i < da ? trace.h_a(t, i) : 1.0;
            l_grad += d_fused(t, i * (dl + 1) + j) * a;
          }
          d_hl(t, j) = l_grad;
        }
      }
      break;
    }
    case FusionMode::kConcat:
      d_ha = d_fused.leftCols(da);
      d_hl = d_fused.rightCols(dl);
      break;
    case FusionMode::kAudioOnly:
      d_ha = d_fused.leftCols(da);
      break;
    case FusionMode::kTextOnly:
      d_hl = d_fused.leftCols(dl);
      break;
  }

  InputGrads grads;

  if (use_audio) {
    Eigen::MatrixXd d_cat = dense_backward(audio_fc, trace.audio_cat, d_ha);
    Eigen::MatrixXd dx = d_cat.leftCols(cfg_.mel_channels);
    for (int i = 3; i >= 0; --i) {
      // x_{i+1} = x_i + leaky(conv_i(x_i))
      Eigen::MatrixXd d_pre = leaky_relu_backward(trace.conv_pre[static_cast<size_t>(i)],
                                                  dx, cfg_.leaky_slope);
      dx += conv_backward(conv[static_cast<size_t>(i)],
                          trace.conv_in[static_cast<size_t>(i)], d_pre);
    }
    grads.mel = std::move(dx);
  }

  if (use_text) {
    Eigen::MatrixXd d_mid = lstm_backward(text_lstm, trace.text_mid, trace.text_lstm, d_hl);
    Eigen::MatrixXd d_act = dense_backward(text_fc2,
                                           leaky_relu(trace.text_pre, cfg_.leaky_slope),
                                           d_mid);
    Eigen::MatrixXd d_pre = leaky_relu_backward(trace.text_pre, d_act, cfg_.leaky_slope);
    grads.text = dense_backward(text_fc1, trace.text_in, d_pre);
  }

  return grads;
}

MeshSequence Model::offsets_to_mesh(const Eigen::MatrixXd& offsets,
                                    const TemplateMesh& tmpl,
                                    uint16_t frame_rate) const {
  const int T = static_cast<int>(offsets.rows());
  const int V = cfg_.vertex_count;
  if (static_cast<int>(tmpl.vertex_count) != V) {
    throw DimensionError("template has " + std::to_string(tmpl.vertex_count) +
                         " vertices, model expects " + std::to_string(V));
  }
  std::vector<float> verts(static_cast<size_t>(T) * V * 3);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < 3 * V; ++i) {
      verts[static_cast<size_t>(t) * 3 * V + static_cast<size_t>(i)] =
          static_cast<float>(static_cast<double>(tmpl.vertices[static_cast<size_t>(i)]) +
                             offsets(t, i));
    }
  }
  return MeshSequence::create(static_cast<uint32_t>(T), static_cast<uint32_t>(V),
                              frame_rate, std::move(verts));
}

Eigen::MatrixXd audio_encode(const Model& model, const Eigen::MatrixXd& mel,
                             const Eigen::VectorXd& speaker_one_hot) {
  if (speaker_one_hot.size() != model.config().speaker_count) {
    throw InputError("one-hot length " + std::to_string(speaker_one_hot.size()) +
                     " does not match S=" + std::to_string(model.config().speaker_count));
  }
  return model.audio_encode(mel, one_hot_index(speaker_one_hot), nullptr);
}

MeshSequence model_predict(const Model& model, const Eigen::MatrixXd& mel,
                           const Eigen::MatrixXd& text, int speaker,
                           const TemplateMesh& tmpl, uint16_t frame_rate) {
  Eigen::MatrixXd offsets = model.forward(mel, text, speaker, nullptr);
  return model.offsets_to_mesh(offsets, tmpl, frame_rate);
}

Eigen::MatrixXd scale_mel_for_network(const Eigen::MatrixXd& mel_db) {
  return (mel_db.array() + 80.0) / 80.0;
}

}  // namespace faceanim
