// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#include "faceanim/core/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace faceanim {

namespace {

void check_finite(const std::vector<float>& v, const char* what) {
  for (size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw InputError(std::string(what) + " contains a non-finite value at index " +
                       std::to_string(i));
    }
  }
}

}  // namespace

TemplateMesh TemplateMesh::create(uint32_t vertex_count, std::vector<float> vertices) {
  if (vertex_count < 1) throw InputError("template mesh needs at least one vertex");
  if (vertices.size() != static_cast<size_t>(vertex_count) * 3) {
    throw DimensionError("template mesh data size " + std::to_string(vertices.size()) +
                         " does not match 3*V = " + std::to_string(vertex_count * 3));
  }
  check_finite(vertices, "template mesh");
  return TemplateMesh{vertex_count, std::move(vertices)};
}

MeshSequence MeshSequence::create(uint32_t frame_count, uint32_t vertex_count,
                                  uint16_t frame_rate, std::vector<float> vertices) {
  if (frame_count < 1) throw InputError("mesh sequence needs at least one frame");
  if (vertex_count < 1) throw InputError("mesh sequence needs at least one vertex");
  size_t want = static_cast<size_t>(frame_count) * vertex_count * 3;
  if (vertices.size() != want) {
    throw DimensionError("mesh sequence data size " + std::to_string(vertices.size()) +
                         " does not match T*V*3 = " + std::to_string(want));
  }
  check_finite(vertices, "mesh sequence");
  return MeshSequence{frame_count, vertex_count, frame_rate, std::move(vertices)};
}

double OffsetSequence::magnitude(uint32_t t, uint32_t v) const {
  const double* p = at(t, v);
  return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

OffsetSequence to_offsets(const MeshSequence& seq, const TemplateMesh& tmpl) {
  if (seq.vertex_count != tmpl.vertex_count) {
    throw DimensionError("vertex count mismatch: sequence has " +
                         std::to_string(seq.vertex_count) + ", template has " +
                         std::to_string(tmpl.vertex_count));
  }
  OffsetSequence out;
  out.frame_count = seq.frame_count;
  out.vertex_count = seq.vertex_count;
  out.frame_rate = seq.frame_rate;
  out.offsets.resize(seq.vertices.size());
  size_t per_frame = static_cast<size_t>(seq.vertex_count) * 3;
  for (uint32_t t = 0; t < seq.frame_count; ++t) {
    const float* s = &seq.vertices[t * per_frame];
    for (size_t i = 0; i < per_frame; ++i) {
      // float-to-double difference is exact, so from_offsets inverts exactly
      out.offsets[t * per_frame + i] =
          static_cast<double>(s[i]) - static_cast<double>(tmpl.vertices[i]);
    }
  }
  return out;
}

MeshSequence from_offsets(const OffsetSequence& off, const TemplateMesh& tmpl) {
  if (off.vertex_count != tmpl.vertex_count) {
    throw DimensionError("vertex count mismatch: offsets have " +
                         std::to_string(off.vertex_count) + ", template has " +
                         std::to_string(tmpl.vertex_count));
  }
  std::vector<float> verts(off.offsets.size());
  size_t per_frame = static_cast<size_t>(off.vertex_count) * 3;
  for (uint32_t t = 0; t < off.frame_count; ++t) {
    for (size_t i = 0; i < per_frame; ++i) {
      verts[t * per_frame + i] = static_cast<float>(
          static_cast<double>(tmpl.vertices[i]) + off.offsets[t * per_frame + i]);
    }
  }
  return MeshSequence::create(off.frame_count, off.vertex_count, off.frame_rate,
                              std::move(verts));
}

RegionMask::RegionMask(std::vector<uint32_t> upper, std::vector<uint32_t> lower)
    : upper_(std::move(upper)), lower_(std::move(lower)) {
  if (upper_.empty() || lower_.empty()) {
    throw ConfigError("region mask: both regions must be non-empty");
  }
  std::sort(upper_.begin(), upper_.end());
  std::sort(lower_.begin(), lower_.end());
  upper_.erase(std::unique(upper_.begin(), upper_.end()), upper_.end());
  lower_.erase(std::unique(lower_.begin(), lower_.end()), lower_.end());
  std::unordered_set<uint32_t> seen(upper_.begin(), upper_.end());
  for (uint32_t v : lower_) {
    if (seen.count(v)) {
      throw ConfigError("region mask: vertex " + std::to_string(v) +
                        " appears in both regions");
    }
  }
}

void RegionMask::check_bounds(uint32_t vertex_count) const {
  auto check = [&](const std::vector<uint32_t>& r, const char* name) {
    for (uint32_t v : r) {
      if (v >= vertex_count) {
        throw ConfigError(std::string("region mask: ") + name + " index " +
                          std::to_string(v) + " out of range for V=" +
                          std::to_string(vertex_count));
      }
    }
  };
  check(upper_, "upper");
  check(lower_, "lower");
}

RegionMask load_region_mask(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open region mask file: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("region mask " + path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("upper") || !j.contains("lower")) {
    throw FormatError("region mask " + path + R"(: expected {"upper":[...],"lower":[...]})");
  }
  return RegionMask(j.at("upper").get<std::vector<uint32_t>>(),
                    j.at("lower").get<std::vector<uint32_t>>());
}

void save_region_mask(const RegionMask& mask, const std::string& path) {
  nlohmann::json j;
  j["upper"] = mask.upper();
  j["lower"] = mask.lower();
  std::ofstream os(path);
  if (!os) throw IoError("cannot open region mask file for writing: " + path);
  os << j.dump(2) << "\n";
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace faceanim
