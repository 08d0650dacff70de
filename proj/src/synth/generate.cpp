// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#include "faceanim/synth/generate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "faceanim/audio/wav.hpp"
#include "faceanim/common/binio.hpp"
#include "faceanim/common/error.hpp"
#include "faceanim/common/rng.hpp"
#include "faceanim/core/msq.hpp"
#include "faceanim/text/alignment.hpp"

namespace faceanim {

namespace fs = std::filesystem;

namespace {

constexpr uint32_t kSampleRate = 16000;
constexpr int kCarrierBins = 4;
constexpr double kBinSpacingHz = 42.0;
// per-speaker speaking style
constexpr double kPitchBase[] = {155.0, 228.0};
constexpr double kLowerGain[] = {0.40, 0.58};
constexpr double kUpperGain[] = {0.45, 0.45};  // equal: the text encoder has no speaker input

const std::vector<std::string> kDefaultExpressive = {
    "great", "dreadful", "wonderful", "terrible", "amazing", "awful"};
const std::vector<std::string> kDefaultPlain = {
    "the", "box", "chair", "road", "paper", "window"};

/// Raised-cosine envelope over a word interval, zero at both ends.
double word_envelope(double tau, double duration) {
  if (tau < 0.0 || tau > duration) return 0.0;
  double s = std::sin(M_PI * tau / duration);
  return s * s;
}

struct WordInstance {
  std::string word;
  double start = 0.0;
  double end = 0.0;
  double amplitude = 0.0;  // random per instance, audible but not in the text
  double coeff = 0.0;      // expressiveness, a pure function of the word
  double frequency = 0.0;  // carrier, quantized per word bin + speaker pitch
};

struct UtteranceScript {
  std::vector<WordInstance> words;
  int frames = 0;
  double duration = 0.0;  // frames / fps, audio length exactly frames*hop
};

double speaker_pitch(uint32_t speaker) {
  return kPitchBase[speaker % 2] + 8.0 * static_cast<double>(speaker / 2);
}

double speaker_lower_gain(uint32_t speaker) { return kLowerGain[speaker % 2]; }
double speaker_upper_gain(uint32_t speaker) { return kUpperGain[speaker % 2]; }

}  // namespace

void SynthSpec::validate() const {
  if (grid_rows < 2 || grid_rows % 2 != 0) {
    throw ConfigError("grid_rows must be even and >= 2 for the region split");
  }
  if (grid_cols < 1) throw ConfigError("grid_cols must be >= 1");
  if (speakers < 1) throw ConfigError("at least one speaker required");
  if (utterances_per_speaker < 1) throw ConfigError("utterances_per_speaker must be >= 1");
  if (test_utterances_per_speaker < 0) {
    throw ConfigError("test_utterances_per_speaker must be >= 0");
  }
  if (min_duration <= 0.6 || max_duration < min_duration) {
    throw ConfigError("bad duration range");
  }
  if (vocabulary.empty()) throw ConfigError("vocabulary must be non-empty");
  if (expressive.empty()) throw ConfigError("expressive subset must be non-empty");
  for (const std::string& w : expressive) {
    if (std::find(vocabulary.begin(), vocabulary.end(), w) == vocabulary.end()) {
      throw ConfigError("expressive word \"" + w + "\" is not in the vocabulary");
    }
  }
  if (frame_rate == 0 || kSampleRate % frame_rate != 0) {
    throw ConfigError("frame rate must divide 16000");
  }
}

SynthSpec SynthSpec::with_defaults() {
  SynthSpec spec;
  spec.vocabulary = kDefaultExpressive;
  spec.vocabulary.insert(spec.vocabulary.end(), kDefaultPlain.begin(),
                         kDefaultPlain.end());
  spec.expressive = kDefaultExpressive;
  return spec;
}

int carrier_bin(const SynthSpec& spec, const std::string& word) {
  // Interleave expressive and plain words, then stride across bins two at a
  // time so every bin mixes both kinds. Unknown words fall back to a hash.
  std::vector<std::string> expressive_sorted = spec.expressive;
  std::sort(expressive_sorted.begin(), expressive_sorted.end());
  std::vector<std::string> plain;
  for (const std::string& w : spec.vocabulary) {
    if (!std::binary_search(expressive_sorted.begin(), expressive_sorted.end(), w)) {
      plain.push_back(w);
    }
  }
  std::sort(plain.begin(), plain.end());
  std::vector<std::string> interleaved;
  size_t n = std::max(expressive_sorted.size(), plain.size());
  for (size_t i = 0; i < n; ++i) {
    if (i < expressive_sorted.size()) interleaved.push_back(expressive_sorted[i]);
    if (i < plain.size()) interleaved.push_back(plain[i]);
  }
  for (size_t i = 0; i < interleaved.size(); ++i) {
    if (interleaved[i] == word) return static_cast<int>((i / 2) % kCarrierBins);
  }
  return static_cast<int>(fnv1a64(word) % kCarrierBins);
}

TemplateMesh make_grid_template(int rows, int cols) {
  std::vector<float> verts;
  verts.reserve(static_cast<size_t>(rows) * cols * 3);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double x = cols > 1 ? (c - (cols - 1) / 2.0) / ((cols - 1) / 2.0) * 0.5 : 0.0;
      double y = ((rows - 1) / 2.0 - r) / ((rows - 1) / 2.0);
      double z = 0.4 * (1.0 - 4.0 * x * x) + 0.15 * (1.0 - y * y);
      verts.push_back(static_cast<float>(x));
      verts.push_back(static_cast<float>(y));
      verts.push_back(static_cast<float>(z));
    }
  }
  return TemplateMesh::create(static_cast<uint32_t>(rows * cols), std::move(verts));
}

RegionMask make_grid_region_mask(int rows, int cols) {
  std::vector<uint32_t> upper, lower;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      uint32_t v = static_cast<uint32_t>(r * cols + c);
      if (r < rows / 2) {
        upper.push_back(v);
      } else {
        lower.push_back(v);
      }
    }
  }
  return RegionMask(std::move(upper), std::move(lower));
}

namespace {

UtteranceScript sample_script(const SynthSpec& spec, uint32_t speaker, Rng& rng) {
  UtteranceScript script;
  double duration = rng.uniform(spec.min_duration, spec.max_duration);
  double cursor = rng.uniform(0.12, 0.3);
  while (true) {
    // words span 11-19 frames at 25 fps, longer than the +-8/7 text
    // smoothing window, so mid-word frames stay dominated by their own word
    double word_dur = rng.uniform(0.45, 0.75);
    if (cursor + word_dur > duration - 0.15) break;
    WordInstance w;
    w.word = spec.vocabulary[rng.below(spec.vocabulary.size())];
    w.start = cursor;
    w.end = cursor + word_dur;
    w.amplitude = rng.uniform(0.45, 1.0);
    bool is_expressive = std::find(spec.expressive.begin(), spec.expressive.end(),
                                   w.word) != spec.expressive.end();
    w.coeff = is_expressive ? spec.expressive_coeff : spec.plain_coeff;
    w.frequency = speaker_pitch(speaker) +
                  kBinSpacingHz * carrier_bin(spec, w.word);
    script.words.push_back(w);
    cursor = w.end;
    if (rng.next_f64() < 0.45) cursor += rng.uniform(0.1, 0.35);  // pause
  }
  script.frames = static_cast<int>(std::lround(duration * spec.frame_rate));
  script.duration = static_cast<double>(script.frames) / spec.frame_rate;
  return script;
}

AudioClip synthesize_audio(const UtteranceScript& script) {
  AudioClip clip;
  clip.sample_rate = kSampleRate;
  size_t n = static_cast<size_t>(script.frames) * (kSampleRate / 25);
  clip.samples.assign(n, 0.0);
  for (const WordInstance& w : script.words) {
    size_t s0 = static_cast<size_t>(std::lround(w.start * kSampleRate));
    size_t s1 = std::min(n, static_cast<size_t>(std::lround(w.end * kSampleRate)));
    for (size_t s = s0; s < s1; ++s) {
      double t = static_cast<double>(s) / kSampleRate;
      double env = word_envelope(t - w.start, w.end - w.start);
      clip.samples[s] =
          w.amplitude * env * std::sin(2.0 * M_PI * w.frequency * (t - w.start));
    }
  }
  return clip;
}

MeshSequence synthesize_mesh(const SynthSpec& spec, const UtteranceScript& script,
                             const TemplateMesh& tmpl, uint32_t speaker) {
  const int rows = spec.grid_rows, cols = spec.grid_cols;
  const int V = spec.vertex_count();
  const int T = script.frames;
  // fixed displacement directions and spatial weights
  const double lower_dir[3] = {0.0, -0.5433, 0.8395};  // jaw drop + outward
  const double upper_dir[3] = {0.0, 0.2495, 0.9684};   // brow raise
  const double mouth_row = rows * 0.75, brow_row = rows * 0.22;
  const double center_col = (cols - 1) / 2.0;
  std::vector<double> weight(static_cast<size_t>(V));
  std::vector<bool> is_lower(static_cast<size_t>(V));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      int v = r * cols + c;
      bool lower = r >= rows / 2;
      double anchor = lower ? mouth_row : brow_row;
      double d2 = (r - anchor) * (r - anchor) + (c - center_col) * (c - center_col);
      weight[static_cast<size_t>(v)] = 0.35 + 0.65 * std::exp(-d2 / 18.0);
      is_lower[static_cast<size_t>(v)] = lower;
    }
  }

  std::vector<float> verts(static_cast<size_t>(T) * V * 3);
  const double g_lower = speaker_lower_gain(speaker);
  const double g_upper = speaker_upper_gain(speaker);
  for (int t = 0; t < T; ++t) {
    double center = (t + 0.5) / spec.frame_rate;
    double lower_amp = 0.0, upper_amp = 0.0;
    for (const WordInstance& w : script.words) {
      if (center >= w.start && center < w.end) {
        double env = word_envelope(center - w.start, w.end - w.start);
        lower_amp = g_lower * w.amplitude * env;
        upper_amp = g_upper * w.coeff * env;
        break;
      }
    }
    for (int v = 0; v < V; ++v) {
      const float* base = tmpl.at(static_cast<uint32_t>(v));
      double amp = is_lower[static_cast<size_t>(v)] ? lower_amp : upper_amp;
      const double* dir = is_lower[static_cast<size_t>(v)] ? lower_dir : upper_dir;
      double scale = amp * weight[static_cast<size_t>(v)];
      size_t o = 3 * (static_cast<size_t>(t) * V + static_cast<size_t>(v));
      for (int k = 0; k < 3; ++k) {
        verts[o + static_cast<size_t>(k)] =
            static_cast<float>(base[k] + scale * dir[k]);
      }
    }
  }
  return MeshSequence::create(static_cast<uint32_t>(T), static_cast<uint32_t>(V),
                              spec.frame_rate, std::move(verts));
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

/// Coupling check (a): mean lower-region offset magnitude must track the
/// per-frame audio RMS envelope.
void check_lower_audio_coupling(const SynthSpec& spec, const AudioClip& audio,
                                const MeshSequence& mesh, const TemplateMesh& tmpl,
                                const RegionMask& mask, const std::string& id) {
  const int hop = static_cast<int>(kSampleRate) / spec.frame_rate;
  OffsetSequence off = to_offsets(mesh, tmpl);
  std::vector<double> rms(mesh.frame_count), motion(mesh.frame_count);
  for (uint32_t t = 0; t < mesh.frame_count; ++t) {
    double acc = 0.0;
    for (int s = 0; s < hop; ++s) {
      double x = audio.samples[static_cast<size_t>(t) * hop + static_cast<size_t>(s)];
      acc += x * x;
    }
    rms[t] = std::sqrt(acc / hop);
    double m = 0.0;
    for (uint32_t v : mask.lower()) m += off.magnitude(t, v);
    motion[t] = m / static_cast<double>(mask.lower().size());
  }
  double r = std::abs(pearson(rms, motion));
  if (r <= 0.8) {
    throw ValidationError("generated utterance " + id +
                          " violates the lower/audio coupling (|r| = " +
                          std::to_string(r) + ")");
  }
}

struct WordStat {
  std::string word;
  double amplitude;
  double mean_upper;
};

/// Coupling check (b): conditioned on the word, upper-region motion carries
/// no information about the carrier amplitude. Permutation test on the mean
/// within-word |correlation|; dependence would drive p toward 0.
double upper_amplitude_permutation_p(const std::vector<WordStat>& stats,
                                     uint64_t seed) {
  std::map<std::string, std::vector<std::pair<double, double>>> groups;
  for (const WordStat& s : stats) {
    groups[s.word].push_back({s.amplitude, s.mean_upper});
  }
  auto statistic = [&](const std::map<std::string, std::vector<std::pair<double, double>>>& g) {
    double sum = 0.0;
    int count = 0;
    for (const auto& [word, pairs] : g) {
      if (pairs.size() < 3) continue;
      std::vector<double> a, u;
      for (const auto& [amp, up] : pairs) {
        a.push_back(amp);
        u.push_back(up);
      }
      sum += std::abs(pearson(a, u));
      ++count;
    }
    return count ? sum / count : 0.0;
  };
  double observed = statistic(groups);
  Rng rng(seed);
  const int kPerms = 200;
  int at_least = 0;
  auto shuffled = groups;
  for (int p = 0; p < kPerms; ++p) {
    for (auto& [word, pairs] : shuffled) {
      std::vector<double> amps;
      for (const auto& pr : pairs) amps.push_back(pr.first);
      rng.shuffle(amps);
      for (size_t i = 0; i < pairs.size(); ++i) pairs[i].first = amps[i];
    }
    if (statistic(shuffled) >= observed) ++at_least;
  }
  return (at_least + 1.0) / (kPerms + 1.0);
}

}  // namespace

std::string generate_corpus(const SynthSpec& spec, const std::string& out_dir) {
  spec.validate();
  fs::create_directories(out_dir);
  fs::create_directories(fs::path(out_dir) / "audio");
  fs::create_directories(fs::path(out_dir) / "align");
  fs::create_directories(fs::path(out_dir) / "mesh");

  TemplateMesh tmpl = make_grid_template(spec.grid_rows, spec.grid_cols);
  RegionMask mask = make_grid_region_mask(spec.grid_rows, spec.grid_cols);
  save_template_mesh(tmpl, (fs::path(out_dir) / "template.msq").string());
  save_region_mask(mask, (fs::path(out_dir) / "region_mask.json").string());

  nlohmann::json utterances = nlohmann::json::array();
  std::vector<WordStat> word_stats;
  uint64_t global_index = 0;
  const int per_speaker = spec.utterances_per_speaker + spec.test_utterances_per_speaker;
  for (uint32_t s = 0; s < spec.speakers; ++s) {
    for (int u = 0; u < per_speaker; ++u, ++global_index) {
      Rng rng(derive_seed(spec.seed, global_index));
      UtteranceScript script = sample_script(spec, s, rng);
      while (script.words.empty()) script = sample_script(spec, s, rng);

      char id[32];
      std::snprintf(id, sizeof(id), "s%u_u%02d", s, u);
      std::string audio_rel = std::string("audio/") + id + ".wav";
      std::string align_rel = std::string("align/") + id + ".json";
      std::string mesh_rel = std::string("mesh/") + id + ".msq";

      AudioClip audio = synthesize_audio(script);
      save_audio_file(audio, (fs::path(out_dir) / audio_rel).string());

      std::vector<AlignedWord> entries;
      for (const WordInstance& w : script.words) {
        entries.push_back(AlignedWord{w.word, w.start, w.end});
      }
      WordAlignment alignment = make_alignment(std::move(entries));
      save_alignment_file(alignment, (fs::path(out_dir) / align_rel).string());

      MeshSequence mesh = synthesize_mesh(spec, script, tmpl, s);
      save_mesh_sequence(mesh, (fs::path(out_dir) / mesh_rel).string());

      check_lower_audio_coupling(spec, audio, mesh, tmpl, mask, id);
      OffsetSequence off = to_offsets(mesh, tmpl);
      for (const WordInstance& w : script.words) {
        double acc = 0.0;
        int frames = 0;
        for (uint32_t t = 0; t < mesh.frame_count; ++t) {
          double center = (t + 0.5) / spec.frame_rate;
          if (center >= w.start && center < w.end) {
            double m = 0.0;
            for (uint32_t v : mask.upper()) m += off.magnitude(t, v);
            acc += m / static_cast<double>(mask.upper().size());
            ++frames;
          }
        }
        if (frames > 0) {
          word_stats.push_back(WordStat{w.word, w.amplitude, acc / frames});
        }
      }

      utterances.push_back({{"id", id},
                            {"audio", audio_rel},
                            {"alignment", align_rel},
                            {"mesh", mesh_rel},
                            {"speaker_index", s},
                            {"split", u < spec.utterances_per_speaker ? "train" : "test"}});
    }
  }

  double p = upper_amplitude_permutation_p(word_stats, derive_seed(spec.seed, 0xabcdu));
  if (p < 0.02) {
    throw ValidationError(
        "generated corpus shows upper-face dependence on carrier amplitude "
        "(permutation p = " + std::to_string(p) + ")");
  }

  nlohmann::json manifest;
  manifest["format_version"] = 1;
  manifest["frame_rate"] = spec.frame_rate;
  manifest["vertex_count"] = spec.vertex_count();
  manifest["speaker_count"] = spec.speakers;
  manifest["seed"] = spec.seed;
  manifest["template"] = "template.msq";
  manifest["region_mask"] = "region_mask.json";
  manifest["generator"] = {
      {"grid_rows", spec.grid_rows},
      {"grid_cols", spec.grid_cols},
      {"expressive_coeff", spec.expressive_coeff},
      {"plain_coeff", spec.plain_coeff},
      {"carrier_bins", kCarrierBins},
      {"vocabulary", spec.vocabulary},
      {"expressive", spec.expressive},
      {"upper_amplitude_permutation_p", p},
  };
  manifest["utterances"] = utterances;

  std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
  std::ofstream os(manifest_path);
  if (!os) throw IoError("cannot write manifest: " + manifest_path);
  os << manifest.dump(2) << "\n";
  if (!os) throw IoError("manifest write failed: " + manifest_path);
  return manifest_path;
}

}  // namespace faceanim
