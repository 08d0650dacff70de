// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#include "faceanim/core/msq.hpp"

#include <cmath>
#include <fstream>

#include "faceanim/common/binio.hpp"

namespace faceanim {

namespace {
constexpr char kMagic[4] = {'M', 'S', 'Q', '1'};
constexpr uint16_t kVersion = 1;
}  // namespace

void write_mesh_sequence(const MeshSequence& seq, std::ostream& os) {
  if (seq.frame_count < 1 || seq.vertex_count < 1) {
    throw InputError("refusing to write mesh sequence with T=" +
                     std::to_string(seq.frame_count) + ", V=" +
                     std::to_string(seq.vertex_count));
  }
  size_t want = static_cast<size_t>(seq.frame_count) * seq.vertex_count * 3;
  if (seq.vertices.size() != want) {
    throw DimensionError("mesh sequence payload size mismatch");
  }
  write_bytes(os, kMagic, 4);
  write_u16(os, kVersion);
  write_u16(os, seq.frame_rate);
  write_u32(os, seq.frame_count);
  write_u32(os, seq.vertex_count);
  for (float f : seq.vertices) write_f32(os, f);
  os.flush();
  if (!os) throw IoError("mesh sequence write failed");
}

MeshSequence read_mesh_sequence(std::istream& is) {
  char magic[4];
  read_exact(is, magic, 4, "MSQ1 magic");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("bad magic at byte offset 0: not an MSQ1 stream");
  }
  uint16_t version = read_u16(is, "MSQ1 version");
  if (version != kVersion) {
    throw FormatError("unsupported MSQ1 version " + std::to_string(version));
  }
  uint16_t frame_rate = read_u16(is, "MSQ1 frame rate");
  uint32_t frames = read_u32(is, "MSQ1 frame count");
  uint32_t verts = read_u32(is, "MSQ1 vertex count");
  if (frames < 1 || verts < 1) {
    throw FormatError("MSQ1 header declares empty sequence (T=" +
                      std::to_string(frames) + ", V=" + std::to_string(verts) + ")");
  }
  size_t n = static_cast<size_t>(frames) * verts * 3;
  std::vector<float> data(n);
  for (size_t i = 0; i < n; ++i) {
    std::streampos at = is.tellg();
    data[i] = read_f32(is, "MSQ1 payload");
    if (!std::isfinite(data[i])) {
      throw FormatError("non-finite float in MSQ1 payload at byte offset " +
                        std::to_string(static_cast<long long>(at)));
    }
  }
  MeshSequence seq;
  seq.frame_count = frames;
  seq.vertex_count = verts;
  seq.frame_rate = frame_rate;
  seq.vertices = std::move(data);
  return seq;
}

void save_mesh_sequence(const MeshSequence& seq, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_mesh_sequence(seq, os);
}

MeshSequence load_mesh_sequence(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  return read_mesh_sequence(is);
}

void save_template_mesh(const TemplateMesh& tmpl, const std::string& path) {
  MeshSequence one = MeshSequence::create(1, tmpl.vertex_count, 25, tmpl.vertices);
  save_mesh_sequence(one, path);
}

TemplateMesh load_template_mesh(const std::string& path) {
  MeshSequence one = load_mesh_sequence(path);
  if (one.frame_count != 1) {
    throw FormatError("template mesh file " + path + " has " +
                      std::to_string(one.frame_count) + " frames, expected 1");
  }
  return TemplateMesh::create(one.vertex_count, std::move(one.vertices));
}

}  // namespace faceanim
