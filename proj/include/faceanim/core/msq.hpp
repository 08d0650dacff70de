// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "faceanim/core/mesh.hpp"

namespace faceanim {

// MSQ1 mesh-sequence format:
//   magic "MSQ1" (4 bytes) | version u16 = 1 | frame_rate u16 |
//   T u32 | V u32 | T*V*3 float32 little-endian.
// Round trips are bit-exact.

void write_mesh_sequence(const MeshSequence& seq, std::ostream& os);
MeshSequence read_mesh_sequence(std::istream& is);

void save_mesh_sequence(const MeshSequence& seq, const std::string& path);
MeshSequence load_mesh_sequence(const std::string& path);

// A template mesh is stored as a single-frame MSQ1 file.
void save_template_mesh(const TemplateMesh& tmpl, const std::string& path);
TemplateMesh load_template_mesh(const std::string& path);

}  // namespace faceanim
