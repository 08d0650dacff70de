// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace faceanim {

struct AlignedWord {
  std::string word;
  double start = 0.0;  // seconds
  double end = 0.0;
};

/// Word-level forced-alignment output: sorted, non-overlapping intervals.
struct WordAlignment {
  std::vector<AlignedWord> entries;

  bool empty() const { return entries.empty(); }

  /// Index of the word whose interval [start, end) contains the given time,
  /// or -1 when the time falls in a pause.
  int word_at(double seconds) const;
};

/// Parses a JSON array of {word, start, end}. Entries are sorted by start,
/// then validated: start >= 0, start < end, no overlaps.
WordAlignment load_alignment(std::istream& is);
WordAlignment load_alignment_file(const std::string& path);

void save_alignment_file(const WordAlignment& alignment, const std::string& path);

/// Validation shared by the loader and the corpus generator.
WordAlignment make_alignment(std::vector<AlignedWord> entries);

}  // namespace faceanim
