// Copyright (C) 2026 RegionKit Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "regionkit/box.hpp"

namespace regionkit {

struct Detection {
  std::string image_id;
  Boxd box;
  double score{0.0};
  std::string category;
};

struct GroundTruthBox {
  std::string image_id;
  Boxd box;
  std::string category;
  bool difficult{false};
};

enum class MatchFlag { kTruePositive, kFalsePositive, kIgnored };

enum class Interpolation { kAllPoint, kElevenPoint };

/// Detection metrics in [0, 1]; a metric is absent (nullopt) when no
/// ground truth exists to define it. Values are reported x100 at the
/// text interfaces.
struct EvalReport {
  std::vector<std::string> categories;
  std::vector<double> iou_thresholds;
  /// AP per category (row) per IoU threshold (column).
  std::vector<std::vector<std::optional<double>>> per_category_ap;
  std::optional<double> map;  // mean AP over categories at IoU 0.5
  std::optional<double> ap;   // averaged over IoU 0.50:0.05:0.95
  std::optional<double> ap50;
  std::optional<double> ap75;
  std::optional<double> ap_small;
  std::optional<double> ap_medium;
  std::optional<double> ap_large;
  std::optional<double> ar1;
  std::optional<double> ar10;
  std::optional<double> ar100;
  std::optional<double> ar_small;
  std::optional<double> ar_medium;
  std::optional<double> ar_large;
};

/// Keeps the `limit` highest-scoring detections of each image across
/// all categories (score ties break by insertion order); the relative
/// order of survivors is preserved.
std::vector<Detection> cap_detections(const std::vector<Detection>& dets,
                                      int limit);

/// Greedy matching: walking the detections in their given order (the
/// caller sorts by descending score within category+image), each
/// detection matches the highest-IoU unmatched ground truth of the same
/// category and image with IoU >= threshold. Each GT is matched at most
/// once; a match against a difficult GT is Ignored (neither TP nor FP).
std::vector<MatchFlag> match_detections(
    const std::vector<Detection>& dets,
    const std::vector<GroundTruthBox>& gts, double iou_threshold);

struct ScoredFlag {
  double score{0.0};
  MatchFlag flag{MatchFlag::kFalsePositive};
};

/// Area under the precision envelope of the score-ranked TP/FP sequence
/// (all-point), or the VOC2007 mean of max precision at recalls
/// {0, 0.1, ..., 1.0} (11-point). Ignored entries do not contribute.
/// num_gt == 0 yields absent.
std::optional<double> average_precision(std::vector<ScoredFlag> flags,
                                        int num_gt, Interpolation interp);

/// COCO-convention summary: AP averaged over categories and IoU
/// thresholds 0.50:0.05:0.95, AP at 0.5/0.75, AP and AR by GT-area band
/// (S < 32^2, 32^2 <= M <= 96^2, L > 96^2) and AR at detection budgets
/// 1/10/100. Budgets apply to the highest-scored detections per image
/// and category, as the stock COCO evaluator does. Detections are
/// expected to be capped at 100 per image beforehand.
EvalReport coco_summary(const std::vector<Detection>& dets,
                        const std::vector<GroundTruthBox>& gts);

/// VOC-convention summary: per-category AP at one IoU threshold with
/// the chosen interpolation; map is their mean. Difficult GTs neither
/// count as TPs nor against recall.
EvalReport voc_summary(const std::vector<Detection>& dets,
                       const std::vector<GroundTruthBox>& gts,
                       double iou_threshold, Interpolation interp);

struct EvalOptions {
  bool coco_style{true};
  int cap{100};  // per-image detection cap; 0 disables
  double voc_iou{0.5};
  Interpolation interp{Interpolation::kAllPoint};
};

/// The evaluation entry point behind the `eval` command: applies the
/// per-image cap (when enabled) and dispatches to the configured
/// convention.
EvalReport run_eval(std::vector<Detection> dets,
                    const std::vector<GroundTruthBox>& gts,
                    const EvalOptions& opts);

/// Machine-readable key-value lines (LF-terminated) mirroring the
/// report columns: AP, AP-.5, AP-.75, AP-S, AP-M, AP-L, AR-1, AR-10,
/// AR-100, AR-S, AR-M, AR-L, values as percentages with one decimal,
/// "absent" when undefined. VOC-style reports emit mAP and per-category
/// lines instead.
std::string report_key_values(const EvalReport& report, bool coco_style);

/// Human-readable table of the same numbers.
std::string render_report_table(const EvalReport& report, bool coco_style);

}  // namespace regionkit
