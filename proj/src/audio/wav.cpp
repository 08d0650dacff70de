// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#include "faceanim/audio/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "faceanim/common/binio.hpp"
#include "faceanim/common/error.hpp"

namespace faceanim {

AudioClip load_audio(std::istream& is) {
  char riff[4];
  read_exact(is, riff, 4, "RIFF header");
  if (std::memcmp(riff, "RIFF", 4) != 0) throw FormatError("not a RIFF file");
  read_u32(is, "RIFF size");
  char wave[4];
  read_exact(is, wave, 4, "WAVE tag");
  if (std::memcmp(wave, "WAVE", 4) != 0) throw FormatError("not a WAVE file");

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  std::vector<double> samples;
  bool have_data = false;

  while (is.peek() != EOF) {
    char id[4];
    read_exact(is, id, 4, "chunk id");
    uint32_t size = read_u32(is, "chunk size");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("fmt chunk too small");
      format = read_u16(is, "audio format");
      channels = read_u16(is, "channel count");
      sample_rate = read_u32(is, "sample rate");
      read_u32(is, "byte rate");
      read_u16(is, "block align");
      bits = read_u16(is, "bits per sample");
      if (size > 16) is.ignore(size - 16);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("data chunk before fmt chunk");
      if (format != 1) throw FormatError("only PCM WAV is supported (format tag " +
                                         std::to_string(format) + ")");
      if (channels != 1) throw FormatError("only mono WAV is supported (" +
                                           std::to_string(channels) + " channels)");
      if (bits != 16) throw FormatError("only 16-bit WAV is supported (" +
                                        std::to_string(bits) + " bits)");
      uint32_t count = size / 2;
      samples.resize(count);
      for (uint32_t i = 0; i < count; ++i) {
        uint16_t raw = read_u16(is, "PCM sample");
        int16_t s = static_cast<int16_t>(raw);
        samples[i] = static_cast<double>(s) / 32768.0;
      }
      if (size % 2) is.ignore(1);
      have_data = true;
    } else {
      // skip unknown chunk (and its pad byte)
      is.ignore(size + (size % 2));
      if (!is) throw FormatError("truncated chunk");
    }
  }
  if (!have_fmt || !have_data) throw FormatError("missing fmt or data chunk");
  if (sample_rate == 0) throw FormatError("sample rate is zero");
  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.samples = std::move(samples);
  return clip;
}

AudioClip load_audio_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  return load_audio(is);
}

void save_audio_file(const AudioClip& clip, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  uint32_t n = static_cast<uint32_t>(clip.samples.size());
  uint32_t data_bytes = n * 2;
  write_bytes(os, "RIFF", 4);
  write_u32(os, 36 + data_bytes);
  write_bytes(os, "WAVE", 4);
  write_bytes(os, "fmt ", 4);
  write_u32(os, 16);
  write_u16(os, 1);  // PCM
  write_u16(os, 1);  // mono
  write_u32(os, clip.sample_rate);
  write_u32(os, clip.sample_rate * 2);
  write_u16(os, 2);
  write_u16(os, 16);
  write_bytes(os, "data", 4);
  write_u32(os, data_bytes);
  for (double s : clip.samples) {
    double c = std::clamp(s, -1.0, 1.0);
    int32_t q = static_cast<int32_t>(std::lround(c * 32767.0));
    q = std::clamp(q, -32768, 32767);
    write_u16(os, static_cast<uint16_t>(static_cast<int16_t>(q)));
  }
  os.flush();
  if (!os) throw IoError("wav write failed: " + path);
}

}  // namespace faceanim
