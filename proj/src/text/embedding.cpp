// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#include "faceanim/text/embedding.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <unordered_map>

#include "faceanim/common/binio.hpp"
#include "faceanim/common/error.hpp"
#include "faceanim/common/rng.hpp"

namespace faceanim {

namespace {

class PseudoEmbeddingProvider final : public EmbeddingProvider {
public:
  explicit PseudoEmbeddingProvider(uint64_t seed) : seed_(seed) {}

  Eigen::VectorXd lookup(const std::string&, uint32_t,
                         const std::string& word) const override {
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = cache_.find(word);
      if (it != cache_.end()) return it->second;
    }
    Eigen::VectorXd v(kDimension);
    Rng rng(fnv1a64(word, fnv1a64(&seed_, sizeof(seed_))));
    for (int i = 0; i < kDimension; ++i) v[i] = rng.normal();
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.emplace(word, std::move(v)).first->second;
  }

private:
  uint64_t seed_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, Eigen::VectorXd> cache_;
};

struct KeyHash {
  size_t operator()(const std::pair<std::string, uint32_t>& k) const {
    return fnv1a64(k.first) ^ (static_cast<size_t>(k.second) * 0x9e3779b97f4a7c15ull);
  }
};

class FileProvider final : public EmbeddingProvider {
public:
  explicit FileProvider(std::vector<EmbeddingEntry> entries)
      : entries_(std::move(entries)) {
    for (size_t i = 0; i < entries_.size(); ++i) {
      index_[{entries_[i].utterance_id, entries_[i].word_index}] = i;
    }
  }

  Eigen::VectorXd lookup(const std::string& utterance_id, uint32_t word_index,
                         const std::string&) const override {
    auto it = index_.find({utterance_id, word_index});
    if (it == index_.end()) {
      throw LookupError("no embedding for utterance \"" + utterance_id +
                        "\", word index " + std::to_string(word_index));
    }
    const EmbeddingEntry& e = entries_[it->second];
    Eigen::VectorXd v(kDimension);
    for (int i = 0; i < kDimension; ++i) v[i] = e.values[i];
    return v;
  }

private:
  std::vector<EmbeddingEntry> entries_;
  std::unordered_map<std::pair<std::string, uint32_t>, size_t, KeyHash> index_;
};

constexpr char kWemMagic[4] = {'W', 'E', 'M', '1'};

}  // namespace

std::unique_ptr<EmbeddingProvider> pseudo_embedding_provider(uint64_t seed) {
  return std::make_unique<PseudoEmbeddingProvider>(seed);
}

std::unique_ptr<EmbeddingProvider> file_embedding_provider(const std::string& path) {
  return std::make_unique<FileProvider>(read_embedding_file(path));
}

void write_embedding_file(const std::vector<EmbeddingEntry>& entries,
                          const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_bytes(os, kWemMagic, 4);
  write_u32(os, static_cast<uint32_t>(entries.size()));
  for (const EmbeddingEntry& e : entries) {
    if (e.values.size() != EmbeddingProvider::kDimension) {
      throw DimensionError("embedding entry for \"" + e.utterance_id +
                           "\" has dimension " + std::to_string(e.values.size()) +
                           ", expected 768");
    }
    if (e.utterance_id.size() > UINT16_MAX) {
      throw InputError("utterance id too long for WEM1");
    }
    write_u16(os, static_cast<uint16_t>(e.utterance_id.size()));
    write_bytes(os, e.utterance_id.data(), e.utterance_id.size());
    write_u32(os, e.word_index);
    for (float f : e.values) write_f32(os, f);
  }
  os.flush();
  if (!os) throw IoError("embedding write failed: " + path);
}

std::vector<EmbeddingEntry> read_embedding_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[4];
  read_exact(is, magic, 4, "WEM1 magic");
  if (std::memcmp(magic, kWemMagic, 4) != 0) {
    throw FormatError("not a WEM1 file: " + path);
  }
  uint32_t count = read_u32(is, "WEM1 entry count");
  std::vector<EmbeddingEntry> entries;
  entries.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    EmbeddingEntry e;
    uint16_t len = read_u16(is, "WEM1 id length");
    e.utterance_id.resize(len);
    if (len) read_exact(is, e.utterance_id.data(), len, "WEM1 id");
    e.word_index = read_u32(is, "WEM1 word index");
    e.values.resize(EmbeddingProvider::kDimension);
    for (int k = 0; k < EmbeddingProvider::kDimension; ++k) {
      e.values[k] = read_f32(is, "WEM1 payload");
      if (!std::isfinite(e.values[k])) {
        throw FormatError("non-finite embedding value in " + path);
      }
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace faceanim
