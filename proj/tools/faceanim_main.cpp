// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: corpus synthesis, training, inference and the
// evaluation reports, wired for reproducible runs. Every command accepts
// --config FILE (JSON, overridden by explicit flags) and writes a
// resolved-config.json snapshot alongside its outputs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "faceanim/audio/mel.hpp"
#include "faceanim/common/binio.hpp"
#include "faceanim/core/msq.hpp"
#include "faceanim/eval/ablation.hpp"
#include "faceanim/eval/metrics.hpp"
#include "faceanim/synth/generate.hpp"
#include "faceanim/text/embedding.hpp"
#include "faceanim/text/frames.hpp"
#include "faceanim/train/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace faceanim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Merges a JSON config file into argv: for every key without a matching
/// explicit flag, appends "--key value". Unknown keys are rejected.
std::vector<std::string> merge_config_args(CLI::App* cmd,
                                           const std::vector<std::string>& args) {
  std::string config_path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  std::ifstream is(config_path);
  if (!is) throw ConfigError("cannot open config file: " + config_path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");

  std::vector<std::string> merged = args;
  for (const auto& [key, value] : j.items()) {
    std::string flag = "--" + key;
    if (cmd->get_option_no_throw(flag) == nullptr) {
      throw ConfigError("unknown config key \"" + key + "\"");
    }
    bool given = false;
    for (const std::string& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
    }
    if (given) continue;
    merged.push_back(flag);
    if (value.is_boolean()) {
      merged.push_back(value.get<bool>() ? "true" : "false");
    } else if (value.is_string()) {
      merged.push_back(value.get<std::string>());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += ",";
        joined += item.is_string() ? item.get<std::string>() : item.dump();
      }
      merged.push_back(joined);
    } else {
      merged.push_back(value.dump());
    }
  }
  return merged;
}

void write_resolved_config(const json& resolved, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream os(out_dir / "resolved-config.json");
  if (!os) throw IoError("cannot write resolved-config.json in " + out_dir.string());
  os << resolved.dump(2) << "\n";
}

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec,
                                                 uint64_t pseudo_seed) {
  if (spec == "pseudo") return pseudo_embedding_provider(pseudo_seed);
  if (spec.rfind("file:", 0) == 0) return file_embedding_provider(spec.substr(5));
  throw ConfigError("unknown embeddings spec \"" + spec +
                    "\" (expected pseudo or file:PATH)");
}

uint64_t file_hash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  std::string bytes = ss.str();
  return fnv1a64(bytes.data(), bytes.size());
}

std::string hash_hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------- synth ----

struct SynthArgs {
  std::string out;
  uint64_t seed = 0;
  uint32_t speakers = 2;
  int utterances = 8;
  int test_utterances = 2;
  double duration_min = 3.5;
  double duration_max = 4.5;
  int rows = 26;
  int cols = 13;
};

int run_synth(const SynthArgs& a) {
  SynthSpec spec = SynthSpec::with_defaults();
  spec.seed = a.seed;
  spec.speakers = a.speakers;
  spec.utterances_per_speaker = a.utterances;
  spec.test_utterances_per_speaker = a.test_utterances;
  spec.min_duration = a.duration_min;
  spec.max_duration = a.duration_max;
  spec.grid_rows = a.rows;
  spec.grid_cols = a.cols;
  std::string manifest = generate_corpus(spec, a.out);
  json resolved = {{"command", "synth"},       {"out", a.out},
                   {"seed", a.seed},           {"speakers", a.speakers},
                   {"utterances", a.utterances}, {"test-utterances", a.test_utterances},
                   {"duration-min", a.duration_min}, {"duration-max", a.duration_max},
                   {"rows", a.rows},           {"cols", a.cols}};
  write_resolved_config(resolved, a.out);
  std::printf("manifest: %s\n", manifest.c_str());
  std::printf("manifest-hash: %s\n", hash_hex(file_hash(manifest)).c_str());
  return kExitOk;
}

// ---------------------------------------------------------------- train ----

struct TrainArgs {
  std::string manifest;
  std::string out;
  int epochs = 100;
  double lr = 1e-4;
  uint64_t seed = 0;
  std::string fusion = "tensor";
  std::string embeddings = "pseudo";
  uint64_t embedding_seed = 1234;
  bool no_normalize = false;
  int save_every = 0;
};

json train_resolved(const TrainArgs& a) {
  return {{"command", "train"},   {"manifest", a.manifest},
          {"out", a.out},         {"epochs", a.epochs},
          {"lr", a.lr},           {"seed", a.seed},
          {"fusion", a.fusion},   {"embeddings", a.embeddings},
          {"embedding-seed", a.embedding_seed},
          {"no-normalize", a.no_normalize},
          {"save-every", a.save_every}};
}

int run_train(const TrainArgs& a) {
  CorpusManifest manifest = load_corpus_manifest(a.manifest);
  if (manifest.train_utterances.empty()) throw InputError("manifest has no train split");
  TemplateMesh tmpl = load_template_mesh(manifest.resolve(manifest.template_path));
  auto provider = make_provider(a.embeddings, a.embedding_seed);
  auto data = prepare_utterances(manifest, manifest.train_utterances, tmpl, *provider);

  ArchConfig arch;
  arch.vertex_count = static_cast<int>(manifest.vertex_count);
  arch.speaker_count = static_cast<int>(manifest.speaker_count);

  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.learning_rate = a.lr;
  cfg.seed = a.seed;
  cfg.fusion = fusion_mode_from_string(a.fusion);
  cfg.normalize_loss = !a.no_normalize;
  cfg.checkpoint_every = a.save_every;
  cfg.checkpoint_dir = a.out;

  write_resolved_config(train_resolved(a), a.out);
  TrainOutput out = train(cfg, arch, data, [](int epoch, double loss) {
    std::printf("epoch %d  mean_loss %.8g\n", epoch, loss);
    std::fflush(stdout);
  });
  std::printf("initial_loss %.8g\nfinal_loss %.8g\ncheckpoint: %s\n", out.initial_loss,
              out.final_loss, a.out.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------- infer ----

struct InferArgs {
  std::string checkpoint;
  std::string audio;
  std::string alignment;
  std::string template_path;
  std::string out;
  int speaker = 0;
  std::string embeddings = "pseudo";
  uint64_t embedding_seed = 1234;
  std::string utterance_id;
  uint16_t fps = 25;
};

int run_infer(const InferArgs& a) {
  LoadedCheckpoint ck = load_checkpoint(a.checkpoint);
  const ArchConfig& arch = ck.model->config();
  TemplateMesh tmpl = load_template_mesh(a.template_path);
  if (static_cast<int>(tmpl.vertex_count) != arch.vertex_count) {
    throw InputError("template V=" + std::to_string(tmpl.vertex_count) +
                     " does not match checkpoint V=" + std::to_string(arch.vertex_count));
  }
  if (a.speaker < 0 || a.speaker >= arch.speaker_count) {
    throw InputError("speaker " + std::to_string(a.speaker) +
                     " out of range for checkpoint S=" +
                     std::to_string(arch.speaker_count));
  }
  AudioClip audio = load_audio_file(a.audio);
  int frames = mel_raw_frame_count(audio, a.fps);
  if (frames < 1) throw InputError("audio shorter than one frame");
  MelFrames mel = mel_features(audio, a.fps, frames);
  auto provider = make_provider(a.embeddings, a.embedding_seed);
  WordAlignment alignment = load_alignment_file(a.alignment);
  TextFrames text = smooth_frames(
      expand_to_frames(alignment, *provider, frames, a.fps, a.utterance_id));

  MeshSequence out = model_predict(*ck.model, scale_mel_for_network(mel.values),
                                   text.values, a.speaker, tmpl, a.fps);
  save_mesh_sequence(out, a.out);
  json resolved = {{"command", "infer"},     {"checkpoint", a.checkpoint},
                   {"audio", a.audio},       {"alignment", a.alignment},
                   {"template", a.template_path}, {"speaker", a.speaker},
                   {"embeddings", a.embeddings},  {"embedding-seed", a.embedding_seed},
                   {"utterance-id", a.utterance_id}, {"fps", a.fps},
                   {"out", a.out},
                   {"checkpoint_manifest_hash", checkpoint_manifest_hash(a.checkpoint)}};
  write_resolved_config(resolved, fs::path(a.out).parent_path().empty()
                                      ? fs::path(".")
                                      : fs::path(a.out).parent_path());
  std::printf("prediction: %s (%d frames)\n", a.out.c_str(), frames);
  return kExitOk;
}

// ----------------------------------------------------------------- eval ----

struct EvalArgs {
  std::string pred, truth, mask, out;
};

int run_eval(const EvalArgs& a) {
  MeshSequence pred = load_mesh_sequence(a.pred);
  MeshSequence truth = load_mesh_sequence(a.truth);
  RegionMask mask = load_region_mask(a.mask);
  RegionErrorReport report = region_mae(pred, truth, mask);
  report.per_utterance.push_back({fs::path(a.pred).stem().string(), report.upper_mae,
                                  report.lower_mae});
  json resolved = {{"command", "eval"}, {"pred", a.pred}, {"truth", a.truth},
                   {"mask", a.mask},    {"out", a.out}};
  std::ofstream os(a.out);
  if (!os) throw IoError("cannot write " + a.out);
  os << "# resolved-config: " << resolved.dump() << "\n";
  write_region_report_csv(report, os);
  fs::path parent = fs::path(a.out).parent_path();
  write_resolved_config(resolved, parent.empty() ? fs::path(".") : parent);
  std::printf("upper_mae %.8g\nlower_mae %.8g\nreport: %s\n", report.upper_mae,
              report.lower_mae, a.out.c_str());
  return kExitOk;
}

// --------------------------------------------------------------- ablate ----

struct AblateArgs {
  std::string manifest;
  std::string out;
  std::vector<uint64_t> seeds = {1, 2, 3};
  int epochs = 30;
  double lr = 1e-4;
  std::string embeddings = "pseudo";
  uint64_t embedding_seed = 1234;
  int jobs = 2;
};

int run_ablate(const AblateArgs& a) {
  CorpusManifest manifest = load_corpus_manifest(a.manifest);
  if (manifest.test_utterances.empty()) {
    throw InputError("ablation needs a test split in the manifest");
  }
  TemplateMesh tmpl = load_template_mesh(manifest.resolve(manifest.template_path));
  RegionMask mask = load_region_mask(manifest.resolve(manifest.region_mask_path));
  auto provider = make_provider(a.embeddings, a.embedding_seed);
  auto train_data = prepare_utterances(manifest, manifest.train_utterances, tmpl, *provider);
  auto test_data = prepare_utterances(manifest, manifest.test_utterances, tmpl, *provider);

  ArchConfig arch;
  arch.vertex_count = static_cast<int>(manifest.vertex_count);
  arch.speaker_count = static_cast<int>(manifest.speaker_count);

  TrainConfig base;
  base.epochs = a.epochs;
  base.learning_rate = a.lr;

  AblationTable table = run_ablation(base, arch, train_data, test_data, tmpl, mask,
                                     a.seeds, a.jobs);
  fs::create_directories(a.out);
  json resolved = {{"command", "ablate"}, {"manifest", a.manifest},
                   {"out", a.out},        {"seeds", a.seeds},
                   {"epochs", a.epochs},  {"lr", a.lr},
                   {"embeddings", a.embeddings}, {"embedding-seed", a.embedding_seed},
                   {"jobs", a.jobs}};
  {
    std::ofstream os(fs::path(a.out) / "ablation_detail.csv");
    if (!os) throw IoError("cannot write ablation_detail.csv");
    os << "# resolved-config: " << resolved.dump() << "\n";
    write_ablation_csv(table, os);
  }
  {
    std::ofstream os(fs::path(a.out) / "ablation_summary.txt");
    if (!os) throw IoError("cannot write ablation_summary.txt");
    write_ablation_summary(table, os);
  }
  write_resolved_config(resolved, a.out);
  std::stringstream ss;
  write_ablation_summary(table, ss);
  std::fputs(ss.str().c_str(), stdout);
  std::printf("reports in %s\n", a.out.c_str());
  return kExitOk;
}

// ------------------------------------------------------------ correlate ----

struct CorrelateArgs {
  std::string checkpoint;
  std::string manifest;
  std::string modality = "text";
  std::string out;
  std::string split = "test";
  std::string reduce = "mean";
  std::string embeddings = "pseudo";
  uint64_t embedding_seed = 1234;
};

int run_correlate(const CorrelateArgs& a) {
  if (a.modality != "audio" && a.modality != "text") {
    throw ConfigError("modality must be audio or text");
  }
  LoadedCheckpoint ck = load_checkpoint(a.checkpoint);
  CorpusManifest manifest = load_corpus_manifest(a.manifest);
  TemplateMesh tmpl = load_template_mesh(manifest.resolve(manifest.template_path));
  auto provider = make_provider(a.embeddings, a.embedding_seed);
  std::vector<Utterance> utts =
      a.split == "train" ? manifest.train_utterances : manifest.test_utterances;
  if (utts.empty()) throw InputError("no utterances in split " + a.split);
  std::sort(utts.begin(), utts.end(),
            [](const Utterance& x, const Utterance& y) { return x.id < y.id; });
  auto data = prepare_utterances(manifest, utts, tmpl, *provider);

  const ArchConfig& arch = ck.model->config();
  int feat_dim = a.modality == "audio" ? arch.audio_embed : arch.text_embed;
  int total_frames = 0;
  for (const auto& u : data) total_frames += u.frames;

  Eigen::MatrixXd features(total_frames, feat_dim);
  OffsetSequence offsets;
  offsets.frame_count = static_cast<uint32_t>(total_frames);
  offsets.vertex_count = tmpl.vertex_count;
  offsets.offsets.resize(static_cast<size_t>(total_frames) * tmpl.vertex_count * 3);
  int row = 0;
  for (const auto& u : data) {
    ForwardTrace trace;
    Eigen::MatrixXd pred = ck.model->forward(u.mel, u.text, u.speaker, &trace);
    features.middleRows(row, u.frames) =
        a.modality == "audio" ? trace.h_a : trace.h_l;
    for (int t = 0; t < u.frames; ++t) {
      for (int i = 0; i < pred.cols(); ++i) {
        offsets.offsets[(static_cast<size_t>(row) + static_cast<size_t>(t)) *
                            static_cast<size_t>(pred.cols()) + static_cast<size_t>(i)] =
            pred(t, i);
      }
    }
    row += u.frames;
  }

  CorrelationMap map = pearson_map(features, offsets, a.modality,
                                   a.reduce == "max" ? CorrelationReduce::kMaxAbs
                                                     : CorrelationReduce::kMeanAbs);
  json resolved = {{"command", "correlate"}, {"checkpoint", a.checkpoint},
                   {"manifest", a.manifest}, {"modality", a.modality},
                   {"split", a.split},       {"reduce", a.reduce},
                   {"embeddings", a.embeddings}, {"embedding-seed", a.embedding_seed},
                   {"out", a.out},
                   {"checkpoint_manifest_hash", checkpoint_manifest_hash(a.checkpoint)}};
  std::ofstream os(a.out);
  if (!os) throw IoError("cannot write " + a.out);
  os << "# resolved-config: " << resolved.dump() << "\n";
  os << "# offsets are predicted-vertex displacement magnitudes\n";
  os << "vertex,score\n";
  char buf[64];
  for (size_t v = 0; v < map.scores.size(); ++v) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", v, map.scores[v]);
    os << buf;
  }
  fs::path parent = fs::path(a.out).parent_path();
  write_resolved_config(resolved, parent.empty() ? fs::path(".") : parent);
  std::printf("correlation map (%s): %s\n", a.modality.c_str(), a.out.c_str());
  return kExitOk;
}

// ---------------------------------------------------- export-embeddings ----

struct ExportArgs {
  std::string checkpoint;
  std::string manifest;
  std::string utterance;
  std::string out;
  std::string embeddings = "pseudo";
  uint64_t embedding_seed = 1234;
};

int run_export(const ExportArgs& a) {
  LoadedCheckpoint ck = load_checkpoint(a.checkpoint);
  CorpusManifest manifest = load_corpus_manifest(a.manifest);
  TemplateMesh tmpl = load_template_mesh(manifest.resolve(manifest.template_path));
  auto provider = make_provider(a.embeddings, a.embedding_seed);
  const Utterance* found = nullptr;
  for (const auto* list : {&manifest.train_utterances, &manifest.test_utterances}) {
    for (const Utterance& u : *list) {
      if (u.id == a.utterance) found = &u;
    }
  }
  if (!found) throw LookupError("utterance \"" + a.utterance + "\" not in manifest");
  PreparedUtterance u = prepare_utterance(manifest, *found, tmpl, *provider);
  Eigen::MatrixXd h_l = ck.model->text_encode(u.text, nullptr);
  WordAlignment alignment =
      load_alignment_file(manifest.resolve(found->alignment_path));
  json resolved = {{"command", "export-embeddings"}, {"checkpoint", a.checkpoint},
                   {"manifest", a.manifest},         {"utterance", a.utterance},
                   {"embeddings", a.embeddings},     {"embedding-seed", a.embedding_seed},
                   {"out", a.out},
                   {"checkpoint_manifest_hash", checkpoint_manifest_hash(a.checkpoint)}};
  std::ofstream os(a.out);
  if (!os) throw IoError("cannot write " + a.out);
  os << "# resolved-config: " << resolved.dump() << "\n";
  export_embeddings(h_l, alignment, manifest.frame_rate, os);
  fs::path parent = fs::path(a.out).parent_path();
  write_resolved_config(resolved, parent.empty() ? fs::path(".") : parent);
  std::printf("embeddings: %s (%d frames)\n", a.out.c_str(),
              static_cast<int>(h_l.rows()));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint audio-text 3D facial animation toolkit"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--out", synth_args.out, "output directory")->required();
  synth->add_option("--seed", synth_args.seed, "corpus seed");
  synth->add_option("--speakers", synth_args.speakers, "speaker count");
  synth->add_option("--utterances", synth_args.utterances, "train utterances per speaker");
  synth->add_option("--test-utterances", synth_args.test_utterances,
                    "test utterances per speaker");
  synth->add_option("--duration-min", synth_args.duration_min, "min seconds");
  synth->add_option("--duration-max", synth_args.duration_max, "max seconds");
  synth->add_option("--rows", synth_args.rows, "vertex grid rows");
  synth->add_option("--cols", synth_args.cols, "vertex grid cols");

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--manifest", train_args.manifest, "corpus manifest")->required();
  train_cmd->add_option("--out", train_args.out, "checkpoint directory")->required();
  train_cmd->add_option("--epochs", train_args.epochs, "training epochs");
  train_cmd->add_option("--lr", train_args.lr, "learning rate");
  train_cmd->add_option("--seed", train_args.seed, "training seed");
  train_cmd->add_option("--fusion", train_args.fusion,
                        "fusion mode: tensor|concat|audio|text");
  train_cmd->add_option("--embeddings", train_args.embeddings, "pseudo or file:PATH");
  train_cmd->add_option("--embedding-seed", train_args.embedding_seed,
                        "seed for pseudo embeddings");
  train_cmd->add_flag("--no-normalize", train_args.no_normalize,
                      "use the raw squared-error sum instead of the T*V-normalized loss");
  train_cmd->add_option("--save-every", train_args.save_every,
                        "extra checkpoint every k epochs");

  InferArgs infer_args;
  CLI::App* infer = app.add_subcommand("infer", "predict a mesh sequence");
  infer->add_option("--checkpoint", infer_args.checkpoint, "checkpoint dir")->required();
  infer->add_option("--audio", infer_args.audio, "input WAV")->required();
  infer->add_option("--alignment", infer_args.alignment, "alignment JSON")->required();
  infer->add_option("--template", infer_args.template_path, "template MSQ1")->required();
  infer->add_option("--out", infer_args.out, "output MSQ1 path")->required();
  infer->add_option("--speaker", infer_args.speaker, "speaker one-hot index");
  infer->add_option("--embeddings", infer_args.embeddings, "pseudo or file:PATH");
  infer->add_option("--embedding-seed", infer_args.embedding_seed, "pseudo seed");
  infer->add_option("--utterance-id", infer_args.utterance_id,
                    "id for file-embedding lookup");
  infer->add_option("--fps", infer_args.fps, "frame rate");

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "region error report");
  eval_cmd->add_option("--pred", eval_args.pred, "predicted MSQ1")->required();
  eval_cmd->add_option("--truth", eval_args.truth, "ground-truth MSQ1")->required();
  eval_cmd->add_option("--mask", eval_args.mask, "region mask JSON")->required();
  eval_cmd->add_option("--out", eval_args.out, "report CSV path")->required();

  AblateArgs ablate_args;
  CLI::App* ablate = app.add_subcommand("ablate", "modality/fusion ablation table");
  ablate->add_option("--manifest", ablate_args.manifest, "corpus manifest")->required();
  ablate->add_option("--out", ablate_args.out, "output directory")->required();
  ablate->add_option("--seeds", ablate_args.seeds, "training seeds")->delimiter(',');
  ablate->add_option("--epochs", ablate_args.epochs, "epochs per run");
  ablate->add_option("--lr", ablate_args.lr, "learning rate");
  ablate->add_option("--embeddings", ablate_args.embeddings, "pseudo or file:PATH");
  ablate->add_option("--embedding-seed", ablate_args.embedding_seed, "pseudo seed");
  ablate->add_option("--jobs", ablate_args.jobs, "parallel training runs");

  CorrelateArgs corr_args;
  CLI::App* correlate = app.add_subcommand("correlate",
                                           "per-vertex modality correlation map");
  correlate->add_option("--checkpoint", corr_args.checkpoint, "checkpoint dir")->required();
  correlate->add_option("--manifest", corr_args.manifest, "corpus manifest")->required();
  correlate->add_option("--modality", corr_args.modality, "audio or text");
  correlate->add_option("--out", corr_args.out, "output CSV")->required();
  correlate->add_option("--split", corr_args.split, "train or test");
  correlate->add_option("--reduce", corr_args.reduce, "mean or max over feature dims");
  correlate->add_option("--embeddings", corr_args.embeddings, "pseudo or file:PATH");
  correlate->add_option("--embedding-seed", corr_args.embedding_seed, "pseudo seed");

  ExportArgs export_args;
  CLI::App* export_cmd = app.add_subcommand("export-embeddings",
                                            "dump text-encoder outputs to CSV");
  export_cmd->add_option("--checkpoint", export_args.checkpoint, "checkpoint dir")
      ->required();
  export_cmd->add_option("--manifest", export_args.manifest, "corpus manifest")
      ->required();
  export_cmd->add_option("--utterance", export_args.utterance, "utterance id")
      ->required();
  export_cmd->add_option("--out", export_args.out, "output CSV")->required();
  export_cmd->add_option("--embeddings", export_args.embeddings, "pseudo or file:PATH");
  export_cmd->add_option("--embedding-seed", export_args.embedding_seed, "pseudo seed");

  std::string config_path;
  for (CLI::App* cmd : {synth, train_cmd, infer, eval_cmd, ablate, correlate, export_cmd}) {
    cmd->add_option("--config", config_path,
                    "JSON config file; explicit flags take precedence");
  }

  try {
    // find the subcommand and merge the config file before the real parse
    std::vector<std::string> args(argv + 1, argv + argc);
    if (!args.empty()) {
      CLI::App* cmd = nullptr;
      for (CLI::App* c : {synth, train_cmd, infer, eval_cmd, ablate, correlate,
                          export_cmd}) {
        if (c->get_name() == args[0]) cmd = c;
      }
      if (cmd) {
        std::vector<std::string> tail(args.begin() + 1, args.end());
        tail = merge_config_args(cmd, tail);
        args.assign(tail.begin(), tail.end());
        args.insert(args.begin(), cmd->get_name());
      }
    }
    std::vector<const char*> cargs;
    cargs.push_back(argv[0]);
    for (const std::string& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());

    if (synth->parsed()) return run_synth(synth_args);
    if (train_cmd->parsed()) return run_train(train_args);
    if (infer->parsed()) return run_infer(infer_args);
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (ablate->parsed()) return run_ablate(ablate_args);
    if (correlate->parsed()) return run_correlate(corr_args);
    if (export_cmd->parsed()) return run_export(export_args);
    return kExitUsage;
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
