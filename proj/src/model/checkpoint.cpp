// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#include "faceanim/model/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "faceanim/common/binio.hpp"

namespace faceanim {

namespace fs = std::filesystem;

namespace {

constexpr char kTensorMagic[4] = {'T', 'N', 'S', '1'};
constexpr int kFormatVersion = 1;

void write_tensor(const Param& p, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_bytes(os, kTensorMagic, 4);
  write_u8(os, static_cast<uint8_t>(p.rank));
  if (p.rank == 1) {
    write_u32(os, static_cast<uint32_t>(p.value.rows()));
  } else {
    write_u32(os, static_cast<uint32_t>(p.value.rows()));
    write_u32(os, static_cast<uint32_t>(p.value.cols()));
  }
  // row-major payload
  for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
      write_f32(os, static_cast<float>(p.value(i, j)));
    }
  }
  os.flush();
  if (!os) throw IoError("tensor write failed: " + path);
}

void read_tensor(Param& p, const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[4];
  read_exact(is, magic, 4, "TNS1 magic");
  if (std::memcmp(magic, kTensorMagic, 4) != 0) {
    throw FormatError("not a TNS1 tensor file: " + path);
  }
  uint8_t rank = read_u8(is, "TNS1 rank");
  if (rank != p.rank) {
    throw FormatError(path + ": rank " + std::to_string(rank) + ", expected " +
                      std::to_string(p.rank));
  }
  uint32_t rows = read_u32(is, "TNS1 dim 0");
  uint32_t cols = rank == 1 ? 1 : read_u32(is, "TNS1 dim 1");
  if (rows != static_cast<uint32_t>(p.value.rows()) ||
      cols != static_cast<uint32_t>(p.value.cols())) {
    throw FormatError(path + ": shape " + std::to_string(rows) + "x" +
                      std::to_string(cols) + " does not match parameter " + p.name);
  }
  for (uint32_t i = 0; i < rows; ++i) {
    for (uint32_t j = 0; j < cols; ++j) {
      float v = read_f32(is, "TNS1 payload");
      if (!std::isfinite(v)) {
        throw FormatError(path + ": non-finite value in parameter " + p.name);
      }
      p.value(i, j) = v;
    }
  }
}

std::string tensor_filename(const std::string& param_name) {
  return param_name + ".tns";
}

}  // namespace

void save_checkpoint(const Model& model, const CheckpointMeta& meta,
                     const std::string& dir) {
  fs::create_directories(dir);
  const ArchConfig& cfg = model.config();
  nlohmann::json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["fusion_mode"] = to_string(model.fusion_mode());
  manifest["seed"] = meta.seed;
  manifest["loss_normalized"] = meta.loss_normalized;
  manifest["adam"] = {{"beta1", meta.adam_beta1},
                      {"beta2", meta.adam_beta2},
                      {"eps", meta.adam_eps}};
  manifest["arch"] = {{"mel_channels", cfg.mel_channels},
                      {"audio_embed", cfg.audio_embed},
                      {"text_dim", cfg.text_dim},
                      {"text_hidden", cfg.text_hidden},
                      {"text_embed", cfg.text_embed},
                      {"dec_hidden", cfg.dec_hidden},
                      {"blstm_hidden", cfg.blstm_hidden},
                      {"vertex_count", cfg.vertex_count},
                      {"speaker_count", cfg.speaker_count},
                      {"conv_kernel", cfg.conv_kernel},
                      {"dilations", cfg.dilations},
                      {"leaky_slope", cfg.leaky_slope}};
  // network input convention for mel features
  manifest["mel_scale"] = {{"offset", 80.0}, {"divisor", 80.0}};
  nlohmann::json params = nlohmann::json::array();
  for (const Param* p : model.params()) {
    params.push_back({{"name", p->name}, {"file", tensor_filename(p->name)}});
  }
  manifest["params"] = params;

  std::ofstream os(fs::path(dir) / "manifest.json");
  if (!os) throw IoError("cannot write checkpoint manifest in " + dir);
  os << manifest.dump(2) << "\n";
  if (!os) throw IoError("manifest write failed in " + dir);

  for (const Param* p : model.params()) {
    write_tensor(*p, (fs::path(dir) / tensor_filename(p->name)).string());
  }
}

LoadedCheckpoint load_checkpoint(const std::string& dir) {
  fs::path manifest_path = fs::path(dir) / "manifest.json";
  std::ifstream is(manifest_path);
  if (!is) throw IoError("cannot open checkpoint manifest: " + manifest_path.string());
  nlohmann::json manifest;
  try {
    is >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint manifest parse error: " + std::string(e.what()));
  }
  if (manifest.value("format_version", 0) != kFormatVersion) {
    throw FormatError("unsupported checkpoint format version");
  }
  ArchConfig cfg;
  const auto& a = manifest.at("arch");
  cfg.mel_channels = a.at("mel_channels").get<int>();
  cfg.audio_embed = a.at("audio_embed").get<int>();
  cfg.text_dim = a.at("text_dim").get<int>();
  cfg.text_hidden = a.at("text_hidden").get<int>();
  cfg.text_embed = a.at("text_embed").get<int>();
  cfg.dec_hidden = a.at("dec_hidden").get<int>();
  cfg.blstm_hidden = a.at("blstm_hidden").get<int>();
  cfg.vertex_count = a.at("vertex_count").get<int>();
  cfg.speaker_count = a.at("speaker_count").get<int>();
  cfg.conv_kernel = a.at("conv_kernel").get<int>();
  auto dil = a.at("dilations").get<std::vector<int>>();
  if (dil.size() != 4) throw FormatError("checkpoint dilations must have 4 entries");
  std::copy(dil.begin(), dil.end(), cfg.dilations.begin());
  cfg.leaky_slope = a.at("leaky_slope").get<double>();

  FusionMode mode = fusion_mode_from_string(manifest.at("fusion_mode").get<std::string>());
  LoadedCheckpoint out;
  out.model = std::make_unique<Model>(cfg, mode);
  out.meta.seed = manifest.value("seed", 0ull);
  out.meta.loss_normalized = manifest.value("loss_normalized", true);
  if (manifest.contains("adam")) {
    out.meta.adam_beta1 = manifest["adam"].value("beta1", 0.9);
    out.meta.adam_beta2 = manifest["adam"].value("beta2", 0.999);
    out.meta.adam_eps = manifest["adam"].value("eps", 1e-8);
  }

  for (Param* p : out.model->params()) {
    read_tensor(*p, (fs::path(dir) / tensor_filename(p->name)).string());
  }
  return out;
}

std::string checkpoint_manifest_hash(const std::string& dir) {
  std::ifstream is(fs::path(dir) / "manifest.json", std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint manifest in " + dir);
  std::stringstream ss;
  ss << is.rdbuf();
  std::string bytes = ss.str();
  uint64_t h = fnv1a64(bytes.data(), bytes.size());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace faceanim
