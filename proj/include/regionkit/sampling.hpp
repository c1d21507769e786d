// Copyright (C) 2026 RegionKit Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "regionkit/anchors.hpp"
#include "regionkit/box.hpp"
#include "regionkit/random.hpp"

namespace regionkit {

/// A candidate region with its objectness score. source_index is the
/// position in the originating list and must be unique within a
/// proposal set; every tie on score breaks by ascending source_index so
/// all selection schemes are fully deterministic.
struct ScoredProposal {
  Boxd box;
  double score{0.0};
  std::int64_t source_index{0};
};

/// Region selection schemes. NMS is the stock train/test pipeline; ALL,
/// PRE and POW replace it during training; TOP replaces it at test time.
enum class Scheme { kNms, kAll, kPre, kPow, kTop };

const char* scheme_name(Scheme scheme);
Scheme scheme_from_name(std::string_view name);

struct SamplingConfig {
  Scheme scheme{Scheme::kNms};
  int K{12000};                     // pre-selection count
  int k{2000};                      // post-selection count
  double nms_threshold{0.7};
  int R{256};                       // classifier minibatch size
  int N{1};                         // images per batch
  double pos_fraction{0.25};
  double gamma{1.0};                // POW exponent
  std::vector<double> ratio_table;  // PRE target distribution, per bucket
  double fg_iou_min{0.5};
  double bg_iou_lo{0.1};
  double bg_iou_hi{0.5};            // background band is [lo, hi)
  double min_size{0.0};             // small-proposal filter, 0 disables
  bool exclude_gt{true};            // drop RoIs bit-identical to a GT box
  std::uint64_t seed{0};

  void validate() const;
};

/// Stock configurations. Training is defined for NMS/ALL/PRE/POW and
/// testing for NMS/TOP; other combinations raise InvalidConfigError.
SamplingConfig train_defaults(Scheme scheme);
SamplingConfig test_defaults(Scheme scheme);

/// A ground-truth object for RoI labeling. Category ids are >= 1;
/// 0 is reserved for background.
struct LabeledBox {
  Boxd box;
  int category{1};
};

constexpr int kBackgroundLabel = 0;

/// RoIs sampled for one classifier minibatch: foregrounds first, then
/// backgrounds. regression_targets has one entry per foreground RoI,
/// aligned with rois[0 .. fg_count).
struct RoiMinibatch {
  std::vector<Boxd> rois;
  std::vector<int> labels;
  std::vector<BoxDeltad> regression_targets;
  int fg_count{0};
  int bg_count{0};
};

/// Greedy de-duplication: repeatedly keep the highest-scoring remaining
/// proposal and discard every remaining proposal whose IoU with it is
/// strictly above `threshold`. Output is sorted by descending score,
/// ties by ascending source_index.
std::vector<ScoredProposal> greedy_nms(
    const std::vector<ScoredProposal>& proposals, double threshold);

/// NMS scheme: top-K by score, greedy NMS, then top-k of the survivors.
/// With cfg.min_size > 0 small boxes are removed up front.
std::vector<ScoredProposal> select_nms(
    const std::vector<ScoredProposal>& proposals, const SamplingConfig& cfg);

/// ALL scheme: plain top-k by score, no de-duplication (k functions as
/// the only cutoff).
std::vector<ScoredProposal> select_all(
    const std::vector<ScoredProposal>& proposals, const SamplingConfig& cfg);

/// Biased bucket sampling behind PRE and POW: take top-k by score,
/// keep every region of the bucket with the highest target ratio, and
/// keep each region of bucket i independently with probability
/// ratio[i] / max(ratio).
std::vector<ScoredProposal> select_by_ratio(
    const std::vector<ScoredProposal>& proposals,
    const std::vector<double>& target_ratio, const AnchorSpec& spec,
    const SamplingConfig& cfg, Rng& rng);

/// Power-law target ratio r(s) = s^-gamma over the spec's scales.
std::vector<double> pow_ratio(const AnchorSpec& spec, double gamma);

/// Per-bucket keep probabilities ratio[i] / max(ratio) used by
/// select_by_ratio.
std::vector<double> keep_probabilities(const std::vector<double>& ratio_table);

/// Normalized scale-bucket histogram of a selected set; sums to 1.
/// This is the measurement step feeding PRE's ratio table.
std::vector<double> measure_scale_ratio(
    const std::vector<ScoredProposal>& selected, const AnchorSpec& spec);

/// TOP test scheme: top-K by score, ties by ascending source_index.
std::vector<ScoredProposal> select_top(
    const std::vector<ScoredProposal>& proposals, int K);

/// Dispatches to the scheme configured in cfg. PRE uses cfg.ratio_table
/// and POW derives its table from cfg.gamma; NMS/ALL/TOP ignore spec
/// and rng.
std::vector<ScoredProposal> select(
    const std::vector<ScoredProposal>& proposals, const SamplingConfig& cfg,
    const AnchorSpec& spec, Rng& rng);

/// Labels the selected regions against ground truth (foreground at
/// IoU >= fg_iou_min, background in [bg_iou_lo, bg_iou_hi)), then draws
/// up to floor(pos_fraction * R) foregrounds uniformly without
/// replacement and fills the remainder with backgrounds. Ground-truth
/// boxes are never injected as RoIs; with cfg.exclude_gt, regions
/// bit-identical to a GT box are dropped before labeling. Raises
/// EmptyMinibatchError when nothing is labelable (caller skips the
/// image).
RoiMinibatch sample_minibatch(const std::vector<ScoredProposal>& selected,
                              const std::vector<LabeledBox>& ground_truth,
                              const SamplingConfig& cfg, Rng& rng);

}  // namespace regionkit
