// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#include "faceanim/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

namespace faceanim {

namespace {

void check_pair(const MeshSequence& pred, const MeshSequence& truth) {
  if (pred.frame_count != truth.frame_count || pred.vertex_count != truth.vertex_count) {
    throw DimensionError("region_mae: prediction " + std::to_string(pred.frame_count) +
                         "x" + std::to_string(pred.vertex_count) + " vs truth " +
                         std::to_string(truth.frame_count) + "x" +
                         std::to_string(truth.vertex_count));
  }
}

double region_sum(const MeshSequence& pred, const MeshSequence& truth,
                  const std::vector<uint32_t>& region) {
  double sum = 0.0;
  for (uint32_t t = 0; t < pred.frame_count; ++t) {
    for (uint32_t v : region) {
      const float* a = pred.at(t, v);
      const float* b = truth.at(t, v);
      double dx = static_cast<double>(a[0]) - b[0];
      double dy = static_cast<double>(a[1]) - b[1];
      double dz = static_cast<double>(a[2]) - b[2];
      sum += std::sqrt(dx * dx + dy * dy + dz * dz);
    }
  }
  return sum;
}

}  // namespace

RegionErrorReport region_mae(const MeshSequence& pred, const MeshSequence& truth,
                             const RegionMask& mask) {
  check_pair(pred, truth);
  mask.check_bounds(pred.vertex_count);
  RegionErrorReport report;
  double frames = static_cast<double>(pred.frame_count);
  report.upper_mae =
      region_sum(pred, truth, mask.upper()) / (frames * mask.upper().size());
  report.lower_mae =
      region_sum(pred, truth, mask.lower()) / (frames * mask.lower().size());
  return report;
}

RegionErrorReport region_mae_pooled(
    const std::vector<std::tuple<std::string, MeshSequence, MeshSequence>>& pairs,
    const RegionMask& mask) {
  if (pairs.empty()) throw InputError("region_mae_pooled: no utterances");
  RegionErrorReport report;
  double upper_sum = 0.0, lower_sum = 0.0, upper_n = 0.0, lower_n = 0.0;
  for (const auto& [id, pred, truth] : pairs) {
    check_pair(pred, truth);
    mask.check_bounds(pred.vertex_count);
    double frames = static_cast<double>(pred.frame_count);
    double us = region_sum(pred, truth, mask.upper());
    double ls = region_sum(pred, truth, mask.lower());
    report.per_utterance.push_back({id, us / (frames * mask.upper().size()),
                                    ls / (frames * mask.lower().size())});
    upper_sum += us;
    lower_sum += ls;
    upper_n += frames * static_cast<double>(mask.upper().size());
    lower_n += frames * static_cast<double>(mask.lower().size());
  }
  std::sort(report.per_utterance.begin(), report.per_utterance.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  report.upper_mae = upper_sum / upper_n;
  report.lower_mae = lower_sum / lower_n;
  return report;
}

CorrelationMap pearson_map(const Eigen::MatrixXd& features, const OffsetSequence& offsets,
                           const std::string& modality, CorrelationReduce reduce) {
  const int T = static_cast<int>(features.rows());
  const int D = static_cast<int>(features.cols());
  if (T < 3) throw InputError("pearson_map needs at least 3 frames");
  if (D < 1) throw InputError("pearson_map needs at least one feature dimension");
  if (static_cast<int>(offsets.frame_count) != T) {
    throw DimensionError("pearson_map: features have " + std::to_string(T) +
                         " frames, offsets have " + std::to_string(offsets.frame_count));
  }
  const int V = static_cast<int>(offsets.vertex_count);

  // standardize features once
  Eigen::VectorXd f_mean = features.colwise().mean();
  Eigen::MatrixXd fc = features.rowwise() - f_mean.transpose();
  Eigen::VectorXd f_norm = fc.colwise().norm();

  CorrelationMap map;
  map.modality = modality;
  map.scores.resize(static_cast<size_t>(V));
  Eigen::VectorXd m(T);
  for (int v = 0; v < V; ++v) {
    for (int t = 0; t < T; ++t) {
      m[t] = offsets.magnitude(static_cast<uint32_t>(t), static_cast<uint32_t>(v));
    }
    double m_mean = m.mean();
    Eigen::VectorXd mc = m.array() - m_mean;
    double m_norm = mc.norm();
    double score = 0.0;
    if (m_norm > 0.0) {
      for (int d = 0; d < D; ++d) {
        double r = 0.0;
        if (f_norm[d] > 0.0) {
          r = std::abs(fc.col(d).dot(mc) / (f_norm[d] * m_norm));
        }
        if (reduce == CorrelationReduce::kMeanAbs) {
          score += r / D;
        } else {
          score = std::max(score, r);
        }
      }
    }
    map.scores[static_cast<size_t>(v)] = std::min(score, 1.0);
  }
  return map;
}

void export_embeddings(const Eigen::MatrixXd& h_l, const WordAlignment& alignment,
                       double frame_rate, std::ostream& os) {
  const int T = static_cast<int>(h_l.rows());
  const int D = static_cast<int>(h_l.cols());
  os << "frame,word";
  for (int d = 0; d < D; ++d) os << ",f" << d;
  os << "\n";
  char buf[32];
  for (int t = 0; t < T; ++t) {
    double center = (t + 0.5) / frame_rate;
    int w = alignment.word_at(center);
    os << t << "," << (w >= 0 ? alignment.entries[static_cast<size_t>(w)].word : "");
    for (int d = 0; d < D; ++d) {
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(
                        static_cast<float>(h_l(t, d))));
      os << "," << buf;
    }
    os << "\n";
  }
  if (!os) throw IoError("embedding export write failed");
}

void write_region_report_csv(const RegionErrorReport& report, std::ostream& os) {
  char buf[128];
  os << "utterance,upper_mae,lower_mae\n";
  for (const auto& u : report.per_utterance) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g\n", u.id.c_str(), u.upper_mae,
                  u.lower_mae);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "ALL,%.17g,%.17g\n", report.upper_mae,
                report.lower_mae);
  os << buf;
  if (!os) throw IoError("region report write failed");
}

}  // namespace faceanim
