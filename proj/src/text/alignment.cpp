// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#include "faceanim/text/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "faceanim/common/error.hpp"

namespace faceanim {

int WordAlignment::word_at(double seconds) const {
  // entries are sorted; linear scan is fine at sentence scale
  for (size_t i = 0; i < entries.size(); ++i) {
    if (seconds >= entries[i].start && seconds < entries[i].end) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

WordAlignment make_alignment(std::vector<AlignedWord> entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const AlignedWord& a, const AlignedWord& b) {
                     return a.start < b.start;
                   });
  for (size_t i = 0; i < entries.size(); ++i) {
    const AlignedWord& e = entries[i];
    if (!std::isfinite(e.start) || !std::isfinite(e.end)) {
      throw ValidationError("alignment entry " + std::to_string(i) + " (\"" + e.word +
                            "\"): non-finite timestamp");
    }
    if (e.start < 0.0) {
      throw ValidationError("alignment entry " + std::to_string(i) + " (\"" + e.word +
                            "\"): negative start time");
    }
    if (e.end <= e.start) {
      throw ValidationError("alignment entry " + std::to_string(i) + " (\"" + e.word +
                            "\"): end must be greater than start");
    }
    if (i > 0 && e.start < entries[i - 1].end) {
      throw ValidationError("alignment entry " + std::to_string(i) + " (\"" + e.word +
                            "\") overlaps entry " + std::to_string(i - 1) + " (\"" +
                            entries[i - 1].word + "\")");
    }
  }
  WordAlignment a;
  a.entries = std::move(entries);
  return a;
}

WordAlignment load_alignment(std::istream& is) {
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("alignment JSON parse error: ") + e.what());
  }
  if (!j.is_array()) throw FormatError("alignment JSON must be an array");
  std::vector<AlignedWord> entries;
  entries.reserve(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (!e.is_object() || !e.contains("word") || !e.contains("start") ||
        !e.contains("end")) {
      throw FormatError("alignment entry " + std::to_string(i) +
                        " must be an object with word/start/end");
    }
    entries.push_back(AlignedWord{e.at("word").get<std::string>(),
                                  e.at("start").get<double>(),
                                  e.at("end").get<double>()});
  }
  return make_alignment(std::move(entries));
}

WordAlignment load_alignment_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  return load_alignment(is);
}

void save_alignment_file(const WordAlignment& alignment, const std::string& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const AlignedWord& e : alignment.entries) {
    j.push_back({{"word", e.word}, {"start", e.start}, {"end", e.end}});
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << j.dump(2) << "\n";
  if (!os) throw IoError("alignment write failed: " + path);
}

}  // namespace faceanim
