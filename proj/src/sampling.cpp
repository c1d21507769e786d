// Copyright (C) 2026 RegionKit Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "regionkit/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "regionkit/errors.hpp"

namespace regionkit {

namespace {

bool score_order(const ScoredProposal& a, const ScoredProposal& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.source_index < b.source_index;
}

void validate_proposals(const std::vector<ScoredProposal>& proposals) {
  std::unordered_set<std::int64_t> seen;
  seen.reserve(proposals.size());
  for (const auto& p : proposals) {
    if (!std::isfinite(p.score)) {
      throw InvalidInputError("proposal has non-finite score");
    }
    if (!seen.insert(p.source_index).second) {
      throw InvalidInputError("duplicate proposal source_index " +
                              std::to_string(p.source_index));
    }
  }
}

std::vector<ScoredProposal> sorted_by_score(
    const std::vector<ScoredProposal>& proposals) {
  std::vector<ScoredProposal> out(proposals);
  std::sort(out.begin(), out.end(), score_order);
  return out;
}

void truncate(std::vector<ScoredProposal>& v, int n) {
  if (n >= 0 && v.size() > static_cast<std::size_t>(n)) {
    v.resize(static_cast<std::size_t>(n));
  }
}

}  // namespace

const char* scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::kNms: return "nms";
    case Scheme::kAll: return "all";
    case Scheme::kPre: return "pre";
    case Scheme::kPow: return "pow";
    case Scheme::kTop: return "top";
  }
  throw InvalidConfigError("unknown scheme");
}

Scheme scheme_from_name(std::string_view name) {
  if (name == "nms") return Scheme::kNms;
  if (name == "all") return Scheme::kAll;
  if (name == "pre") return Scheme::kPre;
  if (name == "pow") return Scheme::kPow;
  if (name == "top") return Scheme::kTop;
  throw InvalidConfigError("unknown scheme name: " + std::string(name));
}

void SamplingConfig::validate() const {
  if (K < 1 || k < 1) throw InvalidConfigError("K and k must be positive");
  if (k > K) throw InvalidConfigError("k must not exceed K");
  if (!(nms_threshold > 0.0) || nms_threshold > 1.0) {
    throw InvalidConfigError("nms_threshold must be in (0, 1]");
  }
  if (R < 1) throw InvalidConfigError("R must be positive");
  if (N < 1) throw InvalidConfigError("N must be positive");
  if (!(pos_fraction >= 0.0) || pos_fraction > 1.0) {
    throw InvalidConfigError("pos_fraction must be in [0, 1]");
  }
  if (!(gamma >= 0.0)) throw InvalidConfigError("gamma must be >= 0");
  if (!(bg_iou_lo < bg_iou_hi) || !(bg_iou_hi <= fg_iou_min)) {
    throw InvalidConfigError("background IoU band must satisfy lo < hi <= fg_iou_min");
  }
  if (!(min_size >= 0.0)) throw InvalidConfigError("min_size must be >= 0");
  for (double r : ratio_table) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw InvalidConfigError("ratio_table entries must be nonnegative");
    }
  }
}

SamplingConfig train_defaults(Scheme scheme) {
  SamplingConfig cfg;
  cfg.scheme = scheme;
  switch (scheme) {
    case Scheme::kNms:
      cfg.K = 12000;
      cfg.k = 2000;
      break;
    case Scheme::kAll:
    case Scheme::kPre:
    case Scheme::kPow:
      // k functions as K: no pre-selection stage beyond the k cutoff.
      cfg.K = 6000;
      cfg.k = 6000;
      break;
    case Scheme::kTop:
      throw InvalidConfigError("TOP is a test-time scheme");
  }
  return cfg;
}

SamplingConfig test_defaults(Scheme scheme) {
  SamplingConfig cfg;
  cfg.scheme = scheme;
  switch (scheme) {
    case Scheme::kNms:
      cfg.K = 6000;
      cfg.k = 300;
      break;
    case Scheme::kTop:
      cfg.K = 5000;
      cfg.k = 5000;
      break;
    default:
      throw InvalidConfigError("only NMS and TOP have test-time defaults");
  }
  return cfg;
}

std::vector<ScoredProposal> greedy_nms(
    const std::vector<ScoredProposal>& proposals, double threshold) {
  if (!(threshold > 0.0) || threshold > 1.0) {
    throw InvalidInputError("nms threshold must be in (0, 1]");
  }
  validate_proposals(proposals);
  std::vector<ScoredProposal> sorted = sorted_by_score(proposals);
  std::vector<ScoredProposal> kept;
  std::vector<bool> suppressed(sorted.size(), false);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (suppressed[i]) continue;
    kept.push_back(sorted[i]);
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (suppressed[j]) continue;
      if (iou(sorted[i].box, sorted[j].box) > threshold) {
        suppressed[j] = true;
      }
    }
  }
  return kept;
}

std::vector<ScoredProposal> select_nms(
    const std::vector<ScoredProposal>& proposals, const SamplingConfig& cfg) {
  cfg.validate();
  validate_proposals(proposals);
  std::vector<ScoredProposal> pool;
  if (cfg.min_size > 0.0) {
    pool.reserve(proposals.size());
    for (const auto& p : proposals) {
      if (!is_small(p.box, cfg.min_size)) pool.push_back(p);
    }
  } else {
    pool = proposals;
  }
  std::sort(pool.begin(), pool.end(), score_order);
  truncate(pool, cfg.K);
  std::vector<ScoredProposal> kept = greedy_nms(pool, cfg.nms_threshold);
  truncate(kept, cfg.k);
  return kept;
}

std::vector<ScoredProposal> select_all(
    const std::vector<ScoredProposal>& proposals, const SamplingConfig& cfg) {
  cfg.validate();
  validate_proposals(proposals);
  std::vector<ScoredProposal> out = sorted_by_score(proposals);
  truncate(out, cfg.k);
  return out;
}

std::vector<double> keep_probabilities(
    const std::vector<double>& ratio_table) {
  if (ratio_table.empty()) {
    throw InvalidConfigError("ratio table is empty");
  }
  double max_ratio = 0.0;
  for (double r : ratio_table) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw InvalidConfigError("ratio table entries must be nonnegative");
    }
    max_ratio = std::max(max_ratio, r);
  }
  if (max_ratio == 0.0) {
    throw InvalidConfigError("ratio table is all zero");
  }
  std::vector<double> probs(ratio_table.size());
  for (std::size_t i = 0; i < ratio_table.size(); ++i) {
    probs[i] = ratio_table[i] / max_ratio;
  }
  return probs;
}

std::vector<ScoredProposal> select_by_ratio(
    const std::vector<ScoredProposal>& proposals,
    const std::vector<double>& target_ratio, const AnchorSpec& spec,
    const SamplingConfig& cfg, Rng& rng) {
  cfg.validate();
  spec.validate();
  validate_proposals(proposals);
  if (target_ratio.size() != spec.num_buckets()) {
    throw InvalidConfigError("ratio table must have one entry per scale bucket");
  }
  const std::vector<double> probs = keep_probabilities(target_ratio);

  std::vector<ScoredProposal> pool = sorted_by_score(proposals);
  truncate(pool, cfg.k);

  std::vector<ScoredProposal> kept;
  kept.reserve(pool.size());
  for (const auto& p : pool) {
    const double prob = probs[scale_bucket_of(p.box, spec).index];
    if (prob >= 1.0) {
      kept.push_back(p);  // argmax-ratio bucket: deterministic keep
    } else if (prob > 0.0 && rng.uniform() < prob) {
      kept.push_back(p);
    }
  }
  return kept;
}

std::vector<double> pow_ratio(const AnchorSpec& spec, double gamma) {
  spec.validate();
  if (!(gamma >= 0.0)) throw InvalidConfigError("gamma must be >= 0");
  std::vector<double> ratio(spec.num_buckets());
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    ratio[i] = std::pow(spec.scales[i], -gamma);
  }
  return ratio;
}

std::vector<double> measure_scale_ratio(
    const std::vector<ScoredProposal>& selected, const AnchorSpec& spec) {
  spec.validate();
  if (selected.empty()) {
    throw EmptyResultError("measure_scale_ratio: no selected regions");
  }
  std::vector<double> histogram(spec.num_buckets(), 0.0);
  for (const auto& p : selected) {
    histogram[scale_bucket_of(p.box, spec).index] += 1.0;
  }
  for (double& h : histogram) h /= static_cast<double>(selected.size());
  return histogram;
}

std::vector<ScoredProposal> select_top(
    const std::vector<ScoredProposal>& proposals, int K) {
  if (K < 1) throw InvalidConfigError("top-K needs K >= 1");
  validate_proposals(proposals);
  std::vector<ScoredProposal> out = sorted_by_score(proposals);
  truncate(out, K);
  return out;
}

std::vector<ScoredProposal> select(
    const std::vector<ScoredProposal>& proposals, const SamplingConfig& cfg,
    const AnchorSpec& spec, Rng& rng) {
  switch (cfg.scheme) {
    case Scheme::kNms:
      return select_nms(proposals, cfg);
    case Scheme::kAll:
      return select_all(proposals, cfg);
    case Scheme::kPre:
      return select_by_ratio(proposals, cfg.ratio_table, spec, cfg, rng);
    case Scheme::kPow:
      return select_by_ratio(proposals, pow_ratio(spec, cfg.gamma), spec, cfg,
                             rng);
    case Scheme::kTop:
      return select_top(proposals, cfg.K);
  }
  throw InvalidConfigError("unknown scheme");
}

namespace {

// Draws `take` distinct elements of `indices` uniformly (partial
// Fisher-Yates); the prefix [0, take) holds the sample afterwards.
void draw_without_replacement(std::vector<std::size_t>& indices,
                              std::size_t take, Rng& rng) {
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.uniform_index(indices.size() - i));
    std::swap(indices[i], indices[j]);
  }
}

}  // namespace

RoiMinibatch sample_minibatch(const std::vector<ScoredProposal>& selected,
                              const std::vector<LabeledBox>& ground_truth,
                              const SamplingConfig& cfg, Rng& rng) {
  cfg.validate();
  validate_proposals(selected);
  for (const auto& gt : ground_truth) {
    if (gt.category < 1) {
      throw InvalidInputError("ground-truth category ids must be >= 1");
    }
  }

  struct Candidate {
    std::size_t proposal;
    std::size_t gt;  // meaningful for foregrounds only
  };
  std::vector<Candidate> foreground;
  std::vector<std::size_t> background;

  for (std::size_t i = 0; i < selected.size(); ++i) {
    const Boxd& box = selected[i].box;
    if (cfg.exclude_gt) {
      bool is_gt = false;
      for (const auto& gt : ground_truth) {
        if (box == gt.box) {
          is_gt = true;
          break;
        }
      }
      if (is_gt) continue;
    }
    double best_iou = 0.0;
    std::size_t best_gt = 0;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      const double v = iou(box, ground_truth[g].box);
      if (v > best_iou) {
        best_iou = v;
        best_gt = g;
      }
    }
    if (!ground_truth.empty() && best_iou >= cfg.fg_iou_min) {
      foreground.push_back({i, best_gt});
    } else if (best_iou >= cfg.bg_iou_lo && best_iou < cfg.bg_iou_hi) {
      background.push_back(i);
    }
  }

  if (foreground.empty() && background.empty()) {
    throw EmptyMinibatchError("no labelable regions for this image");
  }

  const auto fg_quota = static_cast<std::size_t>(
      std::floor(cfg.pos_fraction * static_cast<double>(cfg.R)));
  const std::size_t fg_take = std::min(fg_quota, foreground.size());
  // A foreground deficit is filled with extra backgrounds.
  const std::size_t bg_take =
      std::min(static_cast<std::size_t>(cfg.R) - fg_take, background.size());

  std::vector<std::size_t> fg_order(foreground.size());
  for (std::size_t i = 0; i < fg_order.size(); ++i) fg_order[i] = i;
  draw_without_replacement(fg_order, fg_take, rng);

  std::vector<std::size_t> bg_order(background.size());
  for (std::size_t i = 0; i < bg_order.size(); ++i) bg_order[i] = i;
  draw_without_replacement(bg_order, bg_take, rng);

  RoiMinibatch mb;
  mb.fg_count = static_cast<int>(fg_take);
  mb.bg_count = static_cast<int>(bg_take);
  mb.rois.reserve(fg_take + bg_take);
  mb.labels.reserve(fg_take + bg_take);
  mb.regression_targets.reserve(fg_take);
  for (std::size_t i = 0; i < fg_take; ++i) {
    const Candidate& c = foreground[fg_order[i]];
    const LabeledBox& gt = ground_truth[c.gt];
    mb.rois.push_back(selected[c.proposal].box);
    mb.labels.push_back(gt.category);
    mb.regression_targets.push_back(
        encode_delta(selected[c.proposal].box, gt.box));
  }
  for (std::size_t i = 0; i < bg_take; ++i) {
    mb.rois.push_back(selected[background[bg_order[i]]].box);
    mb.labels.push_back(kBackgroundLabel);
  }
  return mb;
}

}  // namespace regionkit
