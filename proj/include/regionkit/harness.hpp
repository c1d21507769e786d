// Copyright (C) 2026 RegionKit Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "regionkit/anchors.hpp"
#include "regionkit/eval.hpp"
#include "regionkit/random.hpp"
#include "regionkit/sampling.hpp"

namespace regionkit {

/// Knobs of the synthetic proposal population standing in for an RPN
/// over a real dataset. Each ground-truth object of bucket b spawns
/// proposals_per_object jittered proposals, each replicated
/// duplication_factor[b] times as near-duplicates, so per-scale overlap
/// asymmetry can be constructed directly.
struct SceneSpec {
  double image_width{1024.0};
  double image_height{1024.0};
  AnchorSpec anchors;
  std::vector<int> objects{8, 8, 8};  // ground-truth count per bucket
  int proposals_per_object{1};
  std::vector<int> duplication_factor{1, 1, 1};
  double score_noise_sigma{0.05};
  double localization_noise_sigma{4.0};
  int clutter_count{20};
  std::uint64_t seed{0};

  void validate() const;
};

struct Scene {
  std::vector<LabeledBox> ground_truth;
  std::vector<ScoredProposal> proposals;
};

/// Draws one scene: per-bucket ground truth sized near the bucket's
/// nominal size, jittered proposals whose base score decreases with the
/// jitter, near-duplicate clusters per duplication_factor, and
/// low-scoring uniform clutter. Deterministic for a given rng state.
Scene generate_scene(const SceneSpec& spec, Rng& rng);

struct SchemeStats {
  std::string name;
  SamplingConfig config;
  std::vector<std::int64_t> scale_histogram;  // selected count per bucket
  std::int64_t selected_total{0};
  double mean_nominal_scale{0.0};
  std::vector<double> per_scene_mean_scale;
  double recall_at_50{0.0};  // matched GTs / all GTs at IoU 0.5
  std::int64_t fg_total{0};
  std::int64_t bg_total{0};
  int scenes_with_minibatch{0};
  int scenes_skipped{0};  // empty-minibatch scenes
  std::optional<EvalReport> eval;
};

struct ExperimentResult {
  std::vector<SchemeStats> schemes;
  int num_scenes{0};
  std::int64_t gt_total{0};
};

/// Runs every config over the same num_scenes seeded scenes: selection,
/// scale histogram, GT recall at IoU 0.5 and minibatch sampling, plus a
/// COCO-style evaluation of the selected regions treated as detections
/// when with_eval is set. A PRE config with an empty ratio_table gets
/// one measured from an NMS pass over the same scenes. Scene and
/// per-scheme rng streams derive from spec.seed, so results are
/// reproducible bit for bit.
ExperimentResult run_comparison(const SceneSpec& spec,
                                const std::vector<SamplingConfig>& configs,
                                int num_scenes, bool with_eval = false);

struct SimulationSpec {
  SceneSpec scene;
  int scenes{100};
};

SimulationSpec parse_simulation_spec(std::istream& in);
SimulationSpec read_simulation_spec_file(const std::string& path);

/// Writes metadata.txt, summary.txt and one <scheme>.txt per scheme
/// (plus eval_<scheme>.txt when evaluation ran) into out_dir. Output is
/// byte-identical across runs with the same spec and seed.
void write_simulation(const ExperimentResult& result, const SceneSpec& spec,
                      const std::string& out_dir);

}  // namespace regionkit
