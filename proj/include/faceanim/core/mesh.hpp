// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "faceanim/common/error.hpp"

namespace faceanim {

/// Static neutral-expression face mesh. Vertex positions only; predictions
/// are offsets added to these coordinates.
struct TemplateMesh {
  uint32_t vertex_count = 0;
  std::vector<float> vertices;  // vertex_count x 3, row-major x,y,z

  static TemplateMesh create(uint32_t vertex_count, std::vector<float> vertices);

  const float* at(uint32_t v) const { return &vertices[3 * v]; }
};

/// A sequence of face meshes sampled at a fixed frame rate. All frames share
/// the vertex layout of one TemplateMesh.
struct MeshSequence {
  uint32_t frame_count = 0;
  uint32_t vertex_count = 0;
  uint16_t frame_rate = 25;
  std::vector<float> vertices;  // frame_count x vertex_count x 3

  static MeshSequence create(uint32_t frame_count, uint32_t vertex_count,
                             uint16_t frame_rate, std::vector<float> vertices);

  const float* at(uint32_t t, uint32_t v) const {
    return &vertices[3 * (static_cast<size_t>(t) * vertex_count + v)];
  }
  float* at(uint32_t t, uint32_t v) {
    return &vertices[3 * (static_cast<size_t>(t) * vertex_count + v)];
  }
};

/// Per-frame displacement of every vertex from the template. Stored in
/// double precision so to_offsets/from_offsets invert each other exactly
/// on float32 mesh data.
struct OffsetSequence {
  uint32_t frame_count = 0;
  uint32_t vertex_count = 0;
  uint16_t frame_rate = 25;
  std::vector<double> offsets;  // frame_count x vertex_count x 3

  const double* at(uint32_t t, uint32_t v) const {
    return &offsets[3 * (static_cast<size_t>(t) * vertex_count + v)];
  }
  /// Euclidean norm of the displacement of vertex v at frame t.
  double magnitude(uint32_t t, uint32_t v) const;
};

OffsetSequence to_offsets(const MeshSequence& seq, const TemplateMesh& tmpl);
MeshSequence from_offsets(const OffsetSequence& off, const TemplateMesh& tmpl);

/// Disjoint upper/lower vertex-index split used by the region error metrics.
class RegionMask {
public:
  /// Sorts, checks both regions non-empty and disjoint.
  RegionMask(std::vector<uint32_t> upper, std::vector<uint32_t> lower);

  const std::vector<uint32_t>& upper() const { return upper_; }
  const std::vector<uint32_t>& lower() const { return lower_; }

  /// Checks every index is < vertex_count.
  void check_bounds(uint32_t vertex_count) const;

private:
  std::vector<uint32_t> upper_;
  std::vector<uint32_t> lower_;
};

RegionMask load_region_mask(const std::string& path);
void save_region_mask(const RegionMask& mask, const std::string& path);

/// One recorded sentence: audio, word alignment, ground-truth meshes
/// (training only) and the speaker it belongs to.
struct Utterance {
  std::string id;
  std::string audio_path;
  std::string alignment_path;
  std::string mesh_path;  // empty when no ground truth is available
  uint32_t speaker_index = 0;
};

}  // namespace faceanim
