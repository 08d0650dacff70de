// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#include "faceanim/audio/mel.hpp"

#include <cmath>
#include <complex>
#include <fstream>

#include "faceanim/common/binio.hpp"
#include "faceanim/common/error.hpp"

namespace faceanim {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// In-place iterative radix-2 FFT. n must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * M_PI / static_cast<double>(len);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

/// Periodic Hann window of length n.
std::vector<double> hann_window(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
  }
  return w;
}

/// Sample index with reflection at both ends (mirror without repeating the
/// edge sample), matching centered STFT framing.
double sample_reflected(const std::vector<double>& x, long i) {
  const long n = static_cast<long>(x.size());
  if (n == 1) return x[0];
  long period = 2 * (n - 1);
  long m = i % period;
  if (m < 0) m += period;
  if (m >= n) m = period - m;
  return x[m];
}

/// 128 triangular filters from 0 Hz to Nyquist on the mel scale.
/// Returns a kChannels x (kFftSize/2 + 1) weight matrix.
Eigen::MatrixXd mel_filterbank() {
  const int bins = MelParams::kFftSize / 2 + 1;
  const double nyquist = MelParams::kSampleRate / 2.0;
  const int m = MelParams::kChannels;
  std::vector<double> edges(m + 2);
  double mel_max = hz_to_mel(nyquist);
  for (int i = 0; i < m + 2; ++i) {
    edges[i] = mel_to_hz(mel_max * i / (m + 1));
  }
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(m, bins);
  for (int f = 0; f < m; ++f) {
    double lo = edges[f], c = edges[f + 1], hi = edges[f + 2];
    for (int k = 0; k < bins; ++k) {
      double freq = static_cast<double>(k) * MelParams::kSampleRate / MelParams::kFftSize;
      double w = 0.0;
      if (freq > lo && freq < hi) {
        w = freq <= c ? (freq - lo) / (c - lo) : (hi - freq) / (hi - c);
      }
      fb(f, k) = w;
    }
  }
  return fb;
}

const Eigen::MatrixXd& cached_filterbank() {
  static const Eigen::MatrixXd fb = mel_filterbank();
  return fb;
}

}  // namespace

AudioClip resample_linear(const AudioClip& clip, uint32_t target_rate) {
  if (clip.sample_rate == target_rate) return clip;
  AudioClip out;
  out.sample_rate = target_rate;
  if (clip.samples.empty()) return out;
  double ratio = static_cast<double>(clip.sample_rate) / target_rate;
  size_t n = static_cast<size_t>(
      std::floor(static_cast<double>(clip.samples.size()) / ratio));
  out.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    double pos = i * ratio;
    size_t i0 = static_cast<size_t>(pos);
    size_t i1 = std::min(i0 + 1, clip.samples.size() - 1);
    double frac = pos - static_cast<double>(i0);
    out.samples[i] = clip.samples[i0] * (1.0 - frac) + clip.samples[i1] * frac;
  }
  return out;
}

int mel_raw_frame_count(const AudioClip& audio, uint16_t frame_rate) {
  if (audio.samples.empty()) throw InputError("empty audio clip");
  if (frame_rate == 0) throw InputError("frame rate must be positive");
  AudioClip work = resample_linear(audio, MelParams::kSampleRate);
  int hop = MelParams::kSampleRate / frame_rate;
  return static_cast<int>(work.samples.size()) / hop;
}

MelFrames mel_features(const AudioClip& audio, uint16_t frame_rate, int target_frames) {
  if (audio.samples.empty()) throw InputError("empty audio clip");
  if (audio.sample_rate == 0) throw InputError("audio sample rate is zero");
  if (frame_rate == 0 || MelParams::kSampleRate % frame_rate != 0) {
    throw InputError("frame rate " + std::to_string(frame_rate) +
                     " does not divide the working sample rate");
  }
  if (target_frames < 1) throw InputError("target_frames must be >= 1");

  AudioClip work = resample_linear(audio, MelParams::kSampleRate);
  const int hop = MelParams::kSampleRate / frame_rate;
  const int raw_frames = static_cast<int>(work.samples.size()) / hop;
  const int frames = std::min(raw_frames, target_frames);

  static const std::vector<double> window = hann_window(MelParams::kWindow);
  const Eigen::MatrixXd& fb = cached_filterbank();
  const int bins = MelParams::kFftSize / 2 + 1;

  MelFrames out;
  out.frame_rate = frame_rate;
  out.values = Eigen::MatrixXd::Constant(target_frames, MelParams::kChannels,
                                         MelParams::kDbFloor);

  std::vector<std::complex<double>> buf(MelParams::kFftSize);
  Eigen::VectorXd power(bins);
  const long half = MelParams::kWindow / 2;
  for (int t = 0; t < frames; ++t) {
    long center = static_cast<long>(t) * hop;
    for (int i = 0; i < MelParams::kWindow; ++i) {
      double s = sample_reflected(work.samples, center - half + i);
      buf[i] = std::complex<double>(s * window[i], 0.0);
    }
    fft_radix2(buf);
    for (int k = 0; k < bins; ++k) power[k] = std::norm(buf[k]);
    Eigen::VectorXd mel = fb * power;
    for (int c = 0; c < MelParams::kChannels; ++c) {
      double db = 10.0 * std::log10(std::max(mel[c] / MelParams::kDbReference, 1e-300));
      out.values(t, c) = std::max(db, MelParams::kDbFloor);
    }
  }
  return out;
}

std::vector<std::array<double, 3>> mel_filter_bands() {
  const double nyquist = MelParams::kSampleRate / 2.0;
  const int m = MelParams::kChannels;
  double mel_max = hz_to_mel(nyquist);
  std::vector<std::array<double, 3>> bands(m);
  for (int f = 0; f < m; ++f) {
    bands[f] = {mel_to_hz(mel_max * f / (m + 1)),
                mel_to_hz(mel_max * (f + 1) / (m + 1)),
                mel_to_hz(mel_max * (f + 2) / (m + 1))};
  }
  return bands;
}

namespace {
constexpr char kMelMagic[4] = {'M', 'F', 'Q', '1'};
constexpr uint16_t kMelVersion = 1;
}  // namespace

void save_mel_cache(const MelFrames& mel, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_bytes(os, kMelMagic, 4);
  write_u16(os, kMelVersion);
  write_u16(os, mel.frame_rate);
  write_u32(os, static_cast<uint32_t>(mel.frame_count()));
  write_u32(os, static_cast<uint32_t>(mel.channels()));
  // extraction parameters, recorded for reproducibility
  write_u32(os, MelParams::kSampleRate);
  write_u32(os, MelParams::kWindow);
  write_u32(os, MelParams::kFftSize);
  write_f32(os, static_cast<float>(MelParams::kDbFloor));
  for (int t = 0; t < mel.frame_count(); ++t) {
    for (int c = 0; c < mel.channels(); ++c) {
      write_f32(os, static_cast<float>(mel.values(t, c)));
    }
  }
  os.flush();
  if (!os) throw IoError("mel cache write failed: " + path);
}

MelFrames load_mel_cache(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[4];
  read_exact(is, magic, 4, "MFQ1 magic");
  if (std::memcmp(magic, kMelMagic, 4) != 0) throw FormatError("not an MFQ1 file: " + path);
  uint16_t version = read_u16(is, "MFQ1 version");
  if (version != kMelVersion) {
    throw FormatError("unsupported MFQ1 version " + std::to_string(version));
  }
  MelFrames mel;
  mel.frame_rate = read_u16(is, "MFQ1 frame rate");
  uint32_t frames = read_u32(is, "MFQ1 frame count");
  uint32_t channels = read_u32(is, "MFQ1 channel count");
  uint32_t rate = read_u32(is, "MFQ1 sample rate");
  uint32_t window = read_u32(is, "MFQ1 window");
  uint32_t fft = read_u32(is, "MFQ1 fft size");
  read_f32(is, "MFQ1 dB floor");
  if (rate != MelParams::kSampleRate || window != MelParams::kWindow ||
      fft != MelParams::kFftSize) {
    throw FormatError("mel cache " + path + " was extracted with different parameters");
  }
  if (channels != MelParams::kChannels) {
    throw FormatError("mel cache " + path + " has " + std::to_string(channels) +
                      " channels, expected 128");
  }
  mel.values.resize(frames, channels);
  for (uint32_t t = 0; t < frames; ++t) {
    for (uint32_t c = 0; c < channels; ++c) {
      float v = read_f32(is, "MFQ1 payload");
      if (!std::isfinite(v)) throw FormatError("non-finite value in mel cache " + path);
      mel.values(t, c) = v;
    }
  }
  return mel;
}

}  // namespace faceanim
