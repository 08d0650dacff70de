// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0
// Scratch probe for the modality-ablation orderings. Not part of the suite.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "faceanim/core/msq.hpp"
#include "faceanim/eval/ablation.hpp"
#include "faceanim/synth/generate.hpp"
#include "faceanim/text/embedding.hpp"
#include "faceanim/train/trainer.hpp"

using namespace faceanim;

int main(int argc, char** argv) {
  int epochs = argc > 1 ? std::atoi(argv[1]) : 30;
  int n_seeds = argc > 2 ? std::atoi(argv[2]) : 1;

  std::string dir = "/tmp/probe_corpus";
  std::string manifest_path = dir + "/manifest.json";
  if (!std::filesystem::exists(manifest_path)) {
    SynthSpec spec = SynthSpec::with_defaults();
    spec.seed = 11;
    manifest_path = generate_corpus(spec, dir);
  }
  CorpusManifest manifest = load_corpus_manifest(manifest_path);
  TemplateMesh tmpl = load_template_mesh(manifest.resolve(manifest.template_path));
  RegionMask mask = load_region_mask(manifest.resolve(manifest.region_mask_path));
  auto provider = pseudo_embedding_provider(1234);

  auto train_data = prepare_utterances(manifest, manifest.train_utterances, tmpl, *provider);
  auto test_data = prepare_utterances(manifest, manifest.test_utterances, tmpl, *provider);
  std::printf("train %zu, test %zu utterances\n", train_data.size(), test_data.size());

  ArchConfig arch;
  arch.vertex_count = static_cast<int>(manifest.vertex_count);
  arch.speaker_count = static_cast<int>(manifest.speaker_count);

  TrainConfig base;
  base.epochs = epochs;

  std::vector<uint64_t> seeds;
  for (int s = 1; s <= n_seeds; ++s) seeds.push_back(static_cast<uint64_t>(s));

  auto t0 = std::chrono::steady_clock::now();
  AblationTable table = run_ablation(base, arch, train_data, test_data, tmpl, mask,
                                     seeds, 2);
  auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
  std::stringstream ss;
  write_ablation_csv(table, ss);
  write_ablation_summary(table, ss);
  std::printf("%s\nelapsed %.1fs\n", ss.str().c_str(), dt.count());
  return 0;
}
