// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace faceanim {

/// Source of per-word 768-dim feature vectors. Lookups are keyed by
/// utterance id and word position so that contextual embeddings (the same
/// surface word carrying different vectors in different sentences) are
/// representable; providers that only know the surface form ignore the key.
class EmbeddingProvider {
public:
  static constexpr int kDimension = 768;

  virtual ~EmbeddingProvider() = default;

  virtual Eigen::VectorXd lookup(const std::string& utterance_id, uint32_t word_index,
                                 const std::string& word) const = 0;

  int dimension() const { return kDimension; }
};

/// Deterministic stand-in for precomputed language-model features: each
/// distinct word maps to a fixed 768-dim vector of seeded standard normals.
std::unique_ptr<EmbeddingProvider> pseudo_embedding_provider(uint64_t seed);

// WEM1 embedding file:
//   magic "WEM1" | u32 entry count | per entry:
//   u16 utterance-id length | UTF-8 id | u32 word index | 768 float32 LE.
// Entry order is preserved so write -> read -> write is byte-identical.

class FileEmbeddingProvider;

std::unique_ptr<EmbeddingProvider> file_embedding_provider(const std::string& path);

struct EmbeddingEntry {
  std::string utterance_id;
  uint32_t word_index = 0;
  std::vector<float> values;  // 768
};

void write_embedding_file(const std::vector<EmbeddingEntry>& entries,
                          const std::string& path);
std::vector<EmbeddingEntry> read_embedding_file(const std::string& path);

}  // namespace faceanim
