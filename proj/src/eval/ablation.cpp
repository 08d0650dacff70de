// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#include "faceanim/eval/ablation.hpp"

#include <cmath>
#include <cstdio>
#include <future>

namespace faceanim {

RegionErrorReport evaluate_region_mae(const Model& model,
                                      const std::vector<PreparedUtterance>& test_data,
                                      const TemplateMesh& tmpl, const RegionMask& mask,
                                      uint16_t frame_rate) {
  if (test_data.empty()) throw InputError("no test utterances to evaluate");
  std::vector<std::tuple<std::string, MeshSequence, MeshSequence>> pairs;
  pairs.reserve(test_data.size());
  for (const PreparedUtterance& u : test_data) {
    Eigen::MatrixXd pred_off = model.forward(u.mel, u.text, u.speaker, nullptr);
    MeshSequence pred = model.offsets_to_mesh(pred_off, tmpl, frame_rate);
    // reconstruct the ground-truth mesh from the cached offsets
    OffsetSequence truth_off;
    truth_off.frame_count = static_cast<uint32_t>(u.frames);
    truth_off.vertex_count = tmpl.vertex_count;
    truth_off.frame_rate = frame_rate;
    truth_off.offsets.resize(static_cast<size_t>(u.truth_offsets.size()));
    // Eigen stores column-major; copy row-major explicitly
    size_t cols = static_cast<size_t>(u.truth_offsets.cols());
    for (int t = 0; t < u.frames; ++t) {
      for (size_t i = 0; i < cols; ++i) {
        truth_off.offsets[static_cast<size_t>(t) * cols + i] = u.truth_offsets(t, static_cast<Eigen::Index>(i));
      }
    }
    MeshSequence truth = from_offsets(truth_off, tmpl);
    pairs.emplace_back(u.id, std::move(pred), std::move(truth));
  }
  return region_mae_pooled(pairs, mask);
}

AblationTable run_ablation(const TrainConfig& base, const ArchConfig& arch,
                           const std::vector<PreparedUtterance>& train_data,
                           const std::vector<PreparedUtterance>& test_data,
                           const TemplateMesh& tmpl, const RegionMask& mask,
                           const std::vector<uint64_t>& seeds, int jobs) {
  if (seeds.empty()) throw ConfigError("ablation requires at least one seed");
  const std::vector<FusionMode> variants = {FusionMode::kAudioOnly,
                                            FusionMode::kTextOnly,
                                            FusionMode::kConcat,
                                            FusionMode::kTensor};
  struct Task {
    uint64_t seed;
    FusionMode mode;
  };
  std::vector<Task> tasks;
  for (uint64_t seed : seeds) {
    for (FusionMode mode : variants) tasks.push_back({seed, mode});
  }

  auto run_one = [&](const Task& task) -> AblationRow {
    TrainConfig cfg = base;
    cfg.seed = task.seed;
    cfg.fusion = task.mode;
    cfg.checkpoint_dir.clear();  // in-memory only
    TrainOutput out = train(cfg, arch, train_data);
    RegionErrorReport report = evaluate_region_mae(*out.model, test_data, tmpl, mask,
                                                   25);
    return AblationRow{task.seed, task.mode, report.upper_mae, report.lower_mae};
  };

  AblationTable table;
  table.rows.resize(tasks.size());
  if (jobs <= 1) {
    for (size_t i = 0; i < tasks.size(); ++i) table.rows[i] = run_one(tasks[i]);
  } else {
    size_t next = 0;
    while (next < tasks.size()) {
      size_t batch = std::min(static_cast<size_t>(jobs), tasks.size() - next);
      std::vector<std::future<AblationRow>> futures;
      for (size_t k = 0; k < batch; ++k) {
        futures.push_back(std::async(std::launch::async, run_one, tasks[next + k]));
      }
      for (size_t k = 0; k < batch; ++k) table.rows[next + k] = futures[k].get();
      next += batch;
    }
  }

  for (FusionMode mode : variants) {
    AblationSummary s;
    s.mode = mode;
    s.label = fusion_mode_label(mode);
    std::vector<double> uppers, lowers;
    for (const AblationRow& r : table.rows) {
      if (r.mode == mode) {
        uppers.push_back(r.upper_mae);
        lowers.push_back(r.lower_mae);
      }
    }
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    auto stddev = [&](const std::vector<double>& v, double m) {
      if (v.size() < 2) return 0.0;
      double s = 0.0;
      for (double x : v) s += (x - m) * (x - m);
      return std::sqrt(s / static_cast<double>(v.size() - 1));
    };
    s.upper_mean = mean(uppers);
    s.lower_mean = mean(lowers);
    s.upper_std = stddev(uppers, s.upper_mean);
    s.lower_std = stddev(lowers, s.lower_mean);
    table.summary.push_back(std::move(s));
  }
  return table;
}

void write_ablation_csv(const AblationTable& table, std::ostream& os) {
  os << "seed,variant,label,upper_mae,lower_mae\n";
  char buf[160];
  for (const AblationRow& r : table.rows) {
    std::snprintf(buf, sizeof(buf), "%llu,%s,\"%s\",%.17g,%.17g\n",
                  static_cast<unsigned long long>(r.seed),
                  to_string(r.mode).c_str(), fusion_mode_label(r.mode).c_str(),
                  r.upper_mae, r.lower_mae);
    os << buf;
  }
  if (!os) throw IoError("ablation csv write failed");
}

void write_ablation_summary(const AblationTable& table, std::ostream& os) {
  os << "Ablation over input modalities and fusion methods (region MAE)\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-18s %-22s %-22s\n", "Method", "Upper Face",
                "Lower Face");
  os << buf;
  for (const AblationSummary& s : table.summary) {
    std::snprintf(buf, sizeof(buf), "%-18s %10.6f +- %-8.6f %10.6f +- %-8.6f\n",
                  s.label.c_str(), s.upper_mean, s.upper_std, s.lower_mean,
                  s.lower_std);
    os << buf;
  }
  if (!os) throw IoError("ablation summary write failed");
}

}  // namespace faceanim
