// Copyright (C) 2026 RegionKit Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "regionkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "regionkit/errors.hpp"

namespace regionkit {

namespace {

struct AreaBand {
  double lo;  // inclusive
  double hi;  // inclusive; S/M/L bands are disjoint
};

constexpr double kInf = std::numeric_limits<double>::infinity();
const AreaBand kBandAll{0.0, kInf};
const AreaBand kBandSmall{0.0, 32.0 * 32.0};       // area < 32^2
const AreaBand kBandMedium{32.0 * 32.0, 96.0 * 96.0};
const AreaBand kBandLarge{96.0 * 96.0, kInf};      // area > 96^2

bool in_band(double area, const AreaBand& band) {
  if (&band == &kBandSmall) return area < band.hi;
  if (&band == &kBandLarge) return area > band.lo;
  return area >= band.lo && area <= band.hi;
}

// Per-(image, category) slice of the inputs, detections kept in input
// order so equal scores break by insertion.
struct CategoryData {
  // image id -> detection indices sorted by descending score
  std::map<std::string, std::vector<std::size_t>> dets;
  std::map<std::string, std::vector<std::size_t>> gts;
};

std::map<std::string, CategoryData> group_by_category(
    const std::vector<Detection>& dets,
    const std::vector<GroundTruthBox>& gts) {
  std::map<std::string, CategoryData> by_cat;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    by_cat[gts[i].category].gts[gts[i].image_id].push_back(i);
  }
  for (std::size_t i = 0; i < dets.size(); ++i) {
    auto it = by_cat.find(dets[i].category);
    if (it == by_cat.end()) continue;  // no GT of this category anywhere
    it->second.dets[dets[i].image_id].push_back(i);
  }
  for (auto& [cat, data] : by_cat) {
    for (auto& [img, idx] : data.dets) {
      std::stable_sort(idx.begin(), idx.end(),
                       [&dets](std::size_t a, std::size_t b) {
                         return dets[a].score > dets[b].score;
                       });
    }
  }
  return by_cat;
}

struct MatchOutcome {
  std::vector<ScoredFlag> flags;  // across all images of the category
  int num_gt = 0;                 // non-ignored GTs
  int matched_gt = 0;             // non-ignored GTs that were matched
};

// Greedy matching of one category at one threshold/band/budget. GTs
// that are difficult or whose area falls outside the band are ignore
// targets: matching them makes the detection Ignored. Unmatched
// detections whose own area falls outside the band are Ignored rather
// than FPs.
MatchOutcome match_category(const std::vector<Detection>& dets,
                            const std::vector<GroundTruthBox>& gts,
                            const CategoryData& data, double threshold,
                            const AreaBand& band, int max_dets) {
  MatchOutcome out;
  for (const auto& [img, gt_idx] : data.gts) {
    for (std::size_t g : gt_idx) {
      if (!gts[g].difficult && in_band(gts[g].box.area(), band)) {
        ++out.num_gt;
      }
    }
  }
  for (const auto& [img, det_idx] : data.dets) {
    auto git = data.gts.find(img);
    const std::vector<std::size_t> empty;
    const std::vector<std::size_t>& gt_idx =
        git == data.gts.end() ? empty : git->second;
    std::vector<bool> gt_matched(gt_idx.size(), false);

    const std::size_t budget =
        std::min(det_idx.size(), static_cast<std::size_t>(max_dets));
    for (std::size_t d = 0; d < budget; ++d) {
      const Detection& det = dets[det_idx[d]];
      double best_iou = 0.0;
      std::size_t best = gt_idx.size();
      for (std::size_t g = 0; g < gt_idx.size(); ++g) {
        if (gt_matched[g]) continue;
        const double v = iou(det.box, gts[gt_idx[g]].box);
        if (v >= threshold && v > best_iou) {
          best_iou = v;
          best = g;
        }
      }
      ScoredFlag flag{det.score, MatchFlag::kFalsePositive};
      if (best < gt_idx.size()) {
        gt_matched[best] = true;
        const GroundTruthBox& gt = gts[gt_idx[best]];
        if (gt.difficult || !in_band(gt.box.area(), band)) {
          flag.flag = MatchFlag::kIgnored;
        } else {
          flag.flag = MatchFlag::kTruePositive;
          ++out.matched_gt;
        }
      } else if (!in_band(det.box.area(), band)) {
        flag.flag = MatchFlag::kIgnored;
      }
      out.flags.push_back(flag);
    }
  }
  return out;
}

std::optional<double> mean_of_present(
    const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  int n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::string percent_or_absent(const std::optional<double>& v) {
  if (!v) return "absent";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", *v * 100.0);
  return buf;
}

}  // namespace

std::vector<Detection> cap_detections(const std::vector<Detection>& dets,
                                      int limit) {
  if (limit < 1) throw InvalidInputError("detection cap must be >= 1");
  std::map<std::string, std::vector<std::size_t>> by_image;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    by_image[dets[i].image_id].push_back(i);
  }
  std::vector<bool> keep(dets.size(), true);
  for (auto& [img, idx] : by_image) {
    if (idx.size() <= static_cast<std::size_t>(limit)) continue;
    std::vector<std::size_t> order = idx;
    std::stable_sort(order.begin(), order.end(),
                     [&dets](std::size_t a, std::size_t b) {
                       return dets[a].score > dets[b].score;
                     });
    for (std::size_t r = limit; r < order.size(); ++r) keep[order[r]] = false;
  }
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (keep[i]) out.push_back(dets[i]);
  }
  return out;
}

std::vector<MatchFlag> match_detections(
    const std::vector<Detection>& dets,
    const std::vector<GroundTruthBox>& gts, double iou_threshold) {
  // GTs grouped per (image, category) with one matched flag each.
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>>
      gt_groups;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    gt_groups[{gts[g].image_id, gts[g].category}].push_back(g);
  }
  std::vector<bool> matched(gts.size(), false);
  std::vector<MatchFlag> flags(dets.size(), MatchFlag::kFalsePositive);
  for (std::size_t d = 0; d < dets.size(); ++d) {
    auto it = gt_groups.find({dets[d].image_id, dets[d].category});
    if (it == gt_groups.end()) continue;
    double best_iou = 0.0;
    std::size_t best = gts.size();
    for (std::size_t g : it->second) {
      if (matched[g]) continue;
      const double v = iou(dets[d].box, gts[g].box);
      if (v >= iou_threshold && v > best_iou) {
        best_iou = v;
        best = g;
      }
    }
    if (best < gts.size()) {
      matched[best] = true;
      flags[d] = gts[best].difficult ? MatchFlag::kIgnored
                                     : MatchFlag::kTruePositive;
    }
  }
  return flags;
}

std::optional<double> average_precision(std::vector<ScoredFlag> flags,
                                        int num_gt, Interpolation interp) {
  if (num_gt < 0) throw InvalidInputError("num_gt must be >= 0");
  if (num_gt == 0) return std::nullopt;
  std::stable_sort(flags.begin(), flags.end(),
                   [](const ScoredFlag& a, const ScoredFlag& b) {
                     return a.score > b.score;
                   });
  std::vector<double> precision, recall;
  int tp = 0, fp = 0;
  for (const auto& f : flags) {
    if (f.flag == MatchFlag::kIgnored) continue;
    if (f.flag == MatchFlag::kTruePositive) ++tp; else ++fp;
    precision.push_back(static_cast<double>(tp) / (tp + fp));
    recall.push_back(static_cast<double>(tp) / num_gt);
  }
  if (interp == Interpolation::kElevenPoint) {
    double sum = 0.0;
    for (int k = 0; k <= 10; ++k) {
      const double r = k / 10.0;
      double best = 0.0;
      for (std::size_t i = 0; i < recall.size(); ++i) {
        if (recall[i] >= r) best = std::max(best, precision[i]);
      }
      sum += best;
    }
    return sum / 11.0;
  }
  // All-point: area under the precision envelope, accumulated right to
  // left so each recall step sees the max precision to its right.
  double ap = 0.0;
  double envelope = 0.0;
  for (std::size_t i = precision.size(); i-- > 0;) {
    envelope = std::max(envelope, precision[i]);
    const double prev_recall = i == 0 ? 0.0 : recall[i - 1];
    ap += (recall[i] - prev_recall) * envelope;
  }
  return ap;
}

EvalReport coco_summary(const std::vector<Detection>& dets,
                        const std::vector<GroundTruthBox>& gts) {
  EvalReport report;
  for (int i = 0; i < 10; ++i) {
    report.iou_thresholds.push_back((50 + 5 * i) / 100.0);
  }
  if (gts.empty()) return report;  // all metrics absent

  const auto by_cat = group_by_category(dets, gts);
  for (const auto& [cat, data] : by_cat) report.categories.push_back(cat);

  const std::size_t num_cat = report.categories.size();
  const std::size_t num_thr = report.iou_thresholds.size();
  report.per_category_ap.assign(
      num_cat, std::vector<std::optional<double>>(num_thr));

  std::vector<std::optional<double>> ap_all, ap_s, ap_m, ap_l;
  std::vector<std::optional<double>> ar1, ar10, ar100, ar_s, ar_m, ar_l;
  std::vector<std::optional<double>> ap50_per_cat, ap75_per_cat;

  const auto banded_ap = [&](const CategoryData& data, double thr,
                             const AreaBand& band) {
    MatchOutcome m = match_category(dets, gts, data, thr, band, 100);
    return average_precision(m.flags, m.num_gt, Interpolation::kAllPoint);
  };
  const auto banded_recall = [&](const CategoryData& data, double thr,
                                 const AreaBand& band,
                                 int budget) -> std::optional<double> {
    MatchOutcome m = match_category(dets, gts, data, thr, band, budget);
    if (m.num_gt == 0) return std::nullopt;
    return static_cast<double>(m.matched_gt) / m.num_gt;
  };

  std::size_t ci = 0;
  for (const auto& [cat, data] : by_cat) {
    for (std::size_t ti = 0; ti < num_thr; ++ti) {
      const double thr = report.iou_thresholds[ti];
      const auto ap_value = banded_ap(data, thr, kBandAll);
      report.per_category_ap[ci][ti] = ap_value;
      ap_all.push_back(ap_value);
      ap_s.push_back(banded_ap(data, thr, kBandSmall));
      ap_m.push_back(banded_ap(data, thr, kBandMedium));
      ap_l.push_back(banded_ap(data, thr, kBandLarge));
      ar1.push_back(banded_recall(data, thr, kBandAll, 1));
      ar10.push_back(banded_recall(data, thr, kBandAll, 10));
      ar100.push_back(banded_recall(data, thr, kBandAll, 100));
      ar_s.push_back(banded_recall(data, thr, kBandSmall, 100));
      ar_m.push_back(banded_recall(data, thr, kBandMedium, 100));
      ar_l.push_back(banded_recall(data, thr, kBandLarge, 100));
      if (thr == 0.5) ap50_per_cat.push_back(ap_value);
      if (thr == 0.75) ap75_per_cat.push_back(ap_value);
    }
    ++ci;
  }

  report.ap = mean_of_present(ap_all);
  report.ap50 = mean_of_present(ap50_per_cat);
  report.ap75 = mean_of_present(ap75_per_cat);
  report.map = report.ap50;  // headline mean AP at IoU 0.5
  report.ap_small = mean_of_present(ap_s);
  report.ap_medium = mean_of_present(ap_m);
  report.ap_large = mean_of_present(ap_l);
  report.ar1 = mean_of_present(ar1);
  report.ar10 = mean_of_present(ar10);
  report.ar100 = mean_of_present(ar100);
  report.ar_small = mean_of_present(ar_s);
  report.ar_medium = mean_of_present(ar_m);
  report.ar_large = mean_of_present(ar_l);
  return report;
}

EvalReport voc_summary(const std::vector<Detection>& dets,
                       const std::vector<GroundTruthBox>& gts,
                       double iou_threshold, Interpolation interp) {
  EvalReport report;
  report.iou_thresholds.push_back(iou_threshold);
  if (gts.empty()) return report;

  const auto by_cat = group_by_category(dets, gts);
  std::vector<std::optional<double>> per_cat;
  for (const auto& [cat, data] : by_cat) {
    report.categories.push_back(cat);
    MatchOutcome m =
        match_category(dets, gts, data, iou_threshold, kBandAll, INT32_MAX);
    per_cat.push_back(average_precision(m.flags, m.num_gt, interp));
    report.per_category_ap.push_back({per_cat.back()});
  }
  report.map = mean_of_present(per_cat);
  return report;
}

EvalReport run_eval(std::vector<Detection> dets,
                    const std::vector<GroundTruthBox>& gts,
                    const EvalOptions& opts) {
  if (opts.cap > 0) {
    dets = cap_detections(dets, opts.cap);
  }
  if (opts.coco_style) {
    return coco_summary(dets, gts);
  }
  return voc_summary(dets, gts, opts.voc_iou, opts.interp);
}

std::string report_key_values(const EvalReport& report, bool coco_style) {
  std::ostringstream out;
  if (coco_style) {
    out << "AP " << percent_or_absent(report.ap) << "\n";
    out << "AP-.5 " << percent_or_absent(report.ap50) << "\n";
    out << "AP-.75 " << percent_or_absent(report.ap75) << "\n";
    out << "AP-S " << percent_or_absent(report.ap_small) << "\n";
    out << "AP-M " << percent_or_absent(report.ap_medium) << "\n";
    out << "AP-L " << percent_or_absent(report.ap_large) << "\n";
    out << "AR-1 " << percent_or_absent(report.ar1) << "\n";
    out << "AR-10 " << percent_or_absent(report.ar10) << "\n";
    out << "AR-100 " << percent_or_absent(report.ar100) << "\n";
    out << "AR-S " << percent_or_absent(report.ar_small) << "\n";
    out << "AR-M " << percent_or_absent(report.ar_medium) << "\n";
    out << "AR-L " << percent_or_absent(report.ar_large) << "\n";
  } else {
    out << "mAP " << percent_or_absent(report.map) << "\n";
    for (std::size_t c = 0; c < report.categories.size(); ++c) {
      out << "AP-" << report.categories[c] << " "
          << percent_or_absent(report.per_category_ap[c].empty()
                                   ? std::nullopt
                                   : report.per_category_ap[c][0])
          << "\n";
    }
  }
  return out.str();
}

std::string render_report_table(const EvalReport& report, bool coco_style) {
  std::ostringstream out;
  const auto cell = [](const std::string& s) {
    std::string padded = s;
    padded.resize(std::max<std::size_t>(8, s.size() + 1), ' ');
    return padded;
  };
  if (coco_style) {
    const char* headers[] = {"AP",   "AP-.5", "AP-.75", "AP-S", "AP-M",
                             "AP-L", "AR-1",  "AR-10",  "AR-100", "AR-S",
                             "AR-M", "AR-L"};
    const std::optional<double> values[] = {
        report.ap,     report.ap50,   report.ap75,  report.ap_small,
        report.ap_medium, report.ap_large, report.ar1, report.ar10,
        report.ar100,  report.ar_small, report.ar_medium, report.ar_large};
    for (const char* h : headers) out << cell(h);
    out << "\n";
    for (const auto& v : values) out << cell(percent_or_absent(v));
    out << "\n";
  } else {
    out << cell("category") << cell("AP") << "\n";
    for (std::size_t c = 0; c < report.categories.size(); ++c) {
      out << cell(report.categories[c])
          << cell(percent_or_absent(report.per_category_ap[c].empty()
                                        ? std::nullopt
                                        : report.per_category_ap[c][0]))
          << "\n";
    }
    out << cell("mAP") << cell(percent_or_absent(report.map)) << "\n";
  }
  return out.str();
}

}  // namespace regionkit
