// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "faceanim/common/rng.hpp"
#include "faceanim/core/mesh.hpp"
#include "faceanim/core/msq.hpp"
#include "testutil.hpp"

using namespace faceanim;

namespace {

MeshSequence random_sequence(Rng& rng, uint32_t frames, uint32_t verts) {
  std::vector<float> data(static_cast<size_t>(frames) * verts * 3);
  for (float& f : data) f = static_cast<float>(rng.uniform(-5.0, 5.0));
  return MeshSequence::create(frames, verts, 25, std::move(data));
}

TemplateMesh random_template(Rng& rng, uint32_t verts) {
  std::vector<float> data(static_cast<size_t>(verts) * 3);
  for (float& f : data) f = static_cast<float>(rng.uniform(-5.0, 5.0));
  return TemplateMesh::create(verts, std::move(data));
}

}  // namespace

TEST_CASE("msq degenerate one-frame one-vertex sequence") {
  MeshSequence seq = MeshSequence::create(1, 1, 25, {0.0f, 0.0f, 0.0f});
  std::stringstream ss;
  write_mesh_sequence(seq, ss);
  std::string bytes = ss.str();
  // magic + version + frame_rate + T + V + 3 floats
  CHECK(bytes.size() == 4 + 2 + 2 + 4 + 4 + 12);
  CHECK(bytes.substr(0, 4) == "MSQ1");
  MeshSequence back = read_mesh_sequence(ss);
  CHECK(back.frame_count == 1);
  CHECK(back.vertex_count == 1);
  CHECK(back.frame_rate == 25);
  CHECK(back.vertices == seq.vertices);
}

TEST_CASE("msq round trip is bit-exact on random sequences") {
  Rng rng(42);
  for (int i = 0; i < 20; ++i) {
    uint32_t frames = 1 + static_cast<uint32_t>(rng.below(6));
    uint32_t verts = 1 + static_cast<uint32_t>(rng.below(40));
    MeshSequence seq = random_sequence(rng, frames, verts);
    std::stringstream ss;
    write_mesh_sequence(seq, ss);
    std::string first = ss.str();
    MeshSequence back = read_mesh_sequence(ss);
    REQUIRE(back.vertices.size() == seq.vertices.size());
    for (size_t k = 0; k < seq.vertices.size(); ++k) {
      CHECK(back.vertices[k] == seq.vertices[k]);
    }
    std::stringstream ss2;
    write_mesh_sequence(back, ss2);
    CHECK(ss2.str() == first);
  }
}

TEST_CASE("empty sequences are rejected before writing") {
  CHECK_THROWS_AS(MeshSequence::create(0, 4, 25, {}), InputError);
  MeshSequence bogus;  // bypass the factory
  bogus.frame_count = 0;
  bogus.vertex_count = 1;
  std::stringstream ss;
  CHECK_THROWS_AS(write_mesh_sequence(bogus, ss), InputError);
}

TEST_CASE("msq read rejects corruption") {
  Rng rng(7);
  MeshSequence seq = random_sequence(rng, 3, 5);
  std::stringstream ss;
  write_mesh_sequence(seq, ss);
  std::string bytes = ss.str();

  SUBCASE("bad magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    std::stringstream in(bad);
    CHECK_THROWS_AS(read_mesh_sequence(in), FormatError);
  }
  SUBCASE("truncated payload") {
    std::string bad = bytes.substr(0, bytes.size() - 7);
    std::stringstream in(bad);
    CHECK_THROWS_WITH_AS(read_mesh_sequence(in),
                         doctest::Contains("byte offset"), FormatError);
  }
  SUBCASE("NaN payload") {
    std::string bad = bytes;
    // overwrite the first payload float with a quiet NaN (LE bytes)
    bad[16] = '\x00';
    bad[17] = '\x00';
    bad[18] = '\xc0';
    bad[19] = '\x7f';
    std::stringstream in(bad);
    CHECK_THROWS_WITH_AS(read_mesh_sequence(in), doctest::Contains("non-finite"),
                         FormatError);
  }
}

TEST_CASE("offsets: identity and zero-template cases") {
  Rng rng(3);
  TemplateMesh tmpl = random_template(rng, 6);
  std::vector<float> rep;
  for (int t = 0; t < 4; ++t) {
    rep.insert(rep.end(), tmpl.vertices.begin(), tmpl.vertices.end());
  }
  MeshSequence seq = MeshSequence::create(4, 6, 25, rep);
  OffsetSequence off = to_offsets(seq, tmpl);
  for (double d : off.offsets) CHECK(d == 0.0);

  TemplateMesh zeros = TemplateMesh::create(6, std::vector<float>(18, 0.0f));
  OffsetSequence off2 = to_offsets(seq, zeros);
  for (size_t i = 0; i < off2.offsets.size(); ++i) {
    CHECK(off2.offsets[i] == static_cast<double>(seq.vertices[i]));
  }
}

TEST_CASE("offsets: to_offsets and from_offsets are exact inverses") {
  Rng rng(11);
  for (int i = 0; i < 10; ++i) {
    uint32_t verts = 1 + static_cast<uint32_t>(rng.below(30));
    uint32_t frames = 1 + static_cast<uint32_t>(rng.below(8));
    MeshSequence seq = random_sequence(rng, frames, verts);
    TemplateMesh tmpl = random_template(rng, verts);
    MeshSequence back = from_offsets(to_offsets(seq, tmpl), tmpl);
    for (size_t k = 0; k < seq.vertices.size(); ++k) {
      CHECK(back.vertices[k] == seq.vertices[k]);
    }
  }
}

TEST_CASE("offsets: vertex count mismatch") {
  Rng rng(5);
  MeshSequence seq = random_sequence(rng, 2, 4);
  TemplateMesh tmpl = random_template(rng, 5);
  CHECK_THROWS_AS(to_offsets(seq, tmpl), DimensionError);
}

TEST_CASE("region mask validation") {
  CHECK_THROWS_AS(RegionMask({}, {1}), ConfigError);
  CHECK_THROWS_AS(RegionMask({1, 2}, {2, 3}), ConfigError);
  RegionMask mask({0, 1}, {2, 3});
  CHECK(mask.upper().size() == 2);
  CHECK_THROWS_AS(mask.check_bounds(3), ConfigError);
  mask.check_bounds(4);
}

TEST_CASE("region mask json round trip") {
  testing::TempDir dir("mask");
  RegionMask mask({5, 1, 3}, {0, 2});
  save_region_mask(mask, dir.file("m.json"));
  RegionMask back = load_region_mask(dir.file("m.json"));
  CHECK(back.upper() == std::vector<uint32_t>{1, 3, 5});
  CHECK(back.lower() == std::vector<uint32_t>{0, 2});
}

TEST_CASE("template mesh file round trip") {
  testing::TempDir dir("tmpl");
  Rng rng(9);
  TemplateMesh tmpl = random_template(rng, 12);
  save_template_mesh(tmpl, dir.file("t.msq"));
  TemplateMesh back = load_template_mesh(dir.file("t.msq"));
  CHECK(back.vertex_count == 12);
  CHECK(back.vertices == tmpl.vertices);
}
