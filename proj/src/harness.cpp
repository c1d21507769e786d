// Copyright (C) 2026 RegionKit Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "regionkit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "regionkit/errors.hpp"
#include "regionkit/io.hpp"

namespace regionkit {

namespace {

// rng stream tags so every randomized stage gets its own substream
constexpr std::uint64_t kSceneStream = 1;
constexpr std::uint64_t kSelectStream = 2;
constexpr std::uint64_t kMinibatchStream = 3;

Boxd sanitize_box(double x1, double y1, double x2, double y2, double width,
                  double height) {
  double lo_x = std::min(x1, x2), hi_x = std::max(x1, x2);
  double lo_y = std::min(y1, y2), hi_y = std::max(y1, y2);
  lo_x = std::clamp(lo_x, 0.0, width);
  hi_x = std::clamp(hi_x, 0.0, width);
  lo_y = std::clamp(lo_y, 0.0, height);
  hi_y = std::clamp(hi_y, 0.0, height);
  // keep at least one pixel of extent, pushed toward the interior
  if (hi_x - lo_x < 1.0) {
    lo_x = std::clamp(lo_x, 0.0, width - 1.0);
    hi_x = lo_x + 1.0;
  }
  if (hi_y - lo_y < 1.0) {
    lo_y = std::clamp(lo_y, 0.0, height - 1.0);
    hi_y = lo_y + 1.0;
  }
  return Boxd(lo_x, lo_y, hi_x, hi_y);
}

std::string scene_image_id(int scene_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene%04d", scene_index);
  return buf;
}

}  // namespace

void SceneSpec::validate() const {
  anchors.validate();
  if (!(image_width > 1.0) || !(image_height > 1.0)) {
    throw InvalidConfigError("scene: image size must exceed one pixel");
  }
  if (objects.size() != anchors.num_buckets() ||
      duplication_factor.size() != anchors.num_buckets()) {
    throw InvalidConfigError(
        "scene: objects and duplication_factor need one entry per bucket");
  }
  for (int n : objects) {
    if (n < 0) throw InvalidConfigError("scene: object counts must be >= 0");
  }
  for (int d : duplication_factor) {
    if (d < 0) {
      throw InvalidConfigError("scene: duplication factors must be >= 0");
    }
  }
  if (proposals_per_object < 0 || clutter_count < 0) {
    throw InvalidConfigError("scene: counts must be >= 0");
  }
  if (!(score_noise_sigma >= 0.0) || !(localization_noise_sigma >= 0.0)) {
    throw InvalidConfigError("scene: noise sigmas must be >= 0");
  }
}

Scene generate_scene(const SceneSpec& spec, Rng& rng) {
  spec.validate();
  Scene scene;
  std::vector<std::size_t> gt_bucket;

  for (std::size_t b = 0; b < spec.anchors.num_buckets(); ++b) {
    const double nominal = spec.anchors.nominal_size(b);
    for (int o = 0; o < spec.objects[b]; ++o) {
      const double side =
          nominal * std::exp2(rng.uniform(-0.25, 0.25));
      const double aspect = std::exp2(rng.uniform(-0.2, 0.2));
      double w = std::clamp(side * std::sqrt(aspect), 4.0, spec.image_width);
      double h = std::clamp(side / std::sqrt(aspect), 4.0, spec.image_height);
      const double cx = w / 2.0 + rng.uniform() * (spec.image_width - w);
      const double cy = h / 2.0 + rng.uniform() * (spec.image_height - h);
      scene.ground_truth.push_back(
          {Boxd(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0), 1});
      gt_bucket.push_back(b);
    }
  }

  std::int64_t source = 0;
  for (std::size_t g = 0; g < scene.ground_truth.size(); ++g) {
    const Boxd& gt = scene.ground_truth[g].box;
    const std::size_t b = gt_bucket[g];
    for (int p = 0; p < spec.proposals_per_object; ++p) {
      const double s = spec.localization_noise_sigma;
      const Boxd candidate = sanitize_box(
          gt.x1 + rng.normal(0.0, s), gt.y1 + rng.normal(0.0, s),
          gt.x2 + rng.normal(0.0, s), gt.y2 + rng.normal(0.0, s),
          spec.image_width, spec.image_height);
      // objectness falls off with how far the proposal drifted
      const double base = 0.5 + 0.5 * iou(candidate, gt);
      const double dup_sigma =
          std::max(0.5, 0.005 * std::sqrt(candidate.area()));
      for (int d = 0; d < spec.duplication_factor[b]; ++d) {
        Boxd box = candidate;
        if (d > 0) {
          box = sanitize_box(candidate.x1 + rng.normal(0.0, dup_sigma),
                             candidate.y1 + rng.normal(0.0, dup_sigma),
                             candidate.x2 + rng.normal(0.0, dup_sigma),
                             candidate.y2 + rng.normal(0.0, dup_sigma),
                             spec.image_width, spec.image_height);
        }
        scene.proposals.push_back(
            {box, base + rng.normal(0.0, spec.score_noise_sigma), source++});
      }
    }
  }

  const double max_clutter_side =
      std::min(spec.image_width, spec.image_height) / 2.0;
  for (int i = 0; i < spec.clutter_count; ++i) {
    const double side =
        std::exp(rng.uniform(std::log(16.0), std::log(max_clutter_side)));
    const double aspect = std::exp2(rng.uniform(-0.2, 0.2));
    const double w = std::min(side * std::sqrt(aspect), spec.image_width);
    const double h = std::min(side / std::sqrt(aspect), spec.image_height);
    const double cx = w / 2.0 + rng.uniform() * (spec.image_width - w);
    const double cy = h / 2.0 + rng.uniform() * (spec.image_height - h);
    scene.proposals.push_back(
        {sanitize_box(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0,
                      spec.image_width, spec.image_height),
         rng.uniform(0.0, 0.3), source++});
  }
  return scene;
}

ExperimentResult run_comparison(const SceneSpec& spec,
                                const std::vector<SamplingConfig>& configs,
                                int num_scenes, bool with_eval) {
  spec.validate();
  if (configs.empty()) {
    throw InvalidConfigError("run_comparison needs at least one config");
  }
  if (num_scenes < 1) {
    throw InvalidConfigError("run_comparison needs at least one scene");
  }

  ExperimentResult result;
  result.num_scenes = num_scenes;

  std::set<std::string> used_names;
  for (const auto& cfg : configs) {
    cfg.validate();
    SchemeStats stats;
    stats.name = scheme_name(cfg.scheme);
    while (!used_names.insert(stats.name).second) stats.name += "x";
    stats.config = cfg;
    // A PRE config without a table gets one measured from an NMS pass
    // over the same scenes, the way PRE consumes a pre-trained NMS run.
    if (cfg.scheme == Scheme::kPre && cfg.ratio_table.empty()) {
      std::vector<std::int64_t> counts(spec.anchors.num_buckets(), 0);
      const SamplingConfig nms_cfg = train_defaults(Scheme::kNms);
      for (int m = 0; m < num_scenes; ++m) {
        Rng scene_rng = Rng::derive(spec.seed, kSceneStream, m);
        const Scene scene = generate_scene(spec, scene_rng);
        for (const auto& p : select_nms(scene.proposals, nms_cfg)) {
          counts[scale_bucket_of(p.box, spec.anchors).index] += 1;
        }
      }
      std::int64_t total = 0;
      for (auto c : counts) total += c;
      if (total == 0) {
        throw EmptyResultError("cannot measure a PRE ratio: NMS kept nothing");
      }
      stats.config.ratio_table.resize(counts.size());
      for (std::size_t i = 0; i < counts.size(); ++i) {
        stats.config.ratio_table[i] =
            static_cast<double>(counts[i]) / static_cast<double>(total);
      }
    }
    stats.scale_histogram.assign(spec.anchors.num_buckets(), 0);
    result.schemes.push_back(std::move(stats));
  }

  std::vector<std::vector<Detection>> eval_dets(result.schemes.size());
  std::vector<GroundTruthBox> eval_gts;

  std::vector<double> nominal_sums(result.schemes.size(), 0.0);
  std::vector<std::int64_t> matched_gts(result.schemes.size(), 0);

  for (int m = 0; m < num_scenes; ++m) {
    Rng scene_rng = Rng::derive(spec.seed, kSceneStream, m);
    const Scene scene = generate_scene(spec, scene_rng);
    result.gt_total += static_cast<std::int64_t>(scene.ground_truth.size());
    if (with_eval) {
      for (const auto& gt : scene.ground_truth) {
        eval_gts.push_back({scene_image_id(m), gt.box, "object", false});
      }
    }

    for (std::size_t si = 0; si < result.schemes.size(); ++si) {
      SchemeStats& stats = result.schemes[si];
      Rng select_rng = Rng::derive(spec.seed, kSelectStream, m, si);
      const auto selected =
          select(scene.proposals, stats.config, spec.anchors, select_rng);

      double scene_nominal_sum = 0.0;
      for (const auto& p : selected) {
        const ScaleBucket bucket = scale_bucket_of(p.box, spec.anchors);
        stats.scale_histogram[bucket.index] += 1;
        scene_nominal_sum += bucket.nominal_size;
      }
      stats.selected_total += static_cast<std::int64_t>(selected.size());
      nominal_sums[si] += scene_nominal_sum;
      stats.per_scene_mean_scale.push_back(
          selected.empty() ? 0.0
                           : scene_nominal_sum /
                                 static_cast<double>(selected.size()));

      for (const auto& gt : scene.ground_truth) {
        for (const auto& p : selected) {
          if (iou(p.box, gt.box) >= 0.5) {
            ++matched_gts[si];
            break;
          }
        }
      }

      Rng mb_rng = Rng::derive(spec.seed, kMinibatchStream, m, si);
      try {
        const RoiMinibatch mb =
            sample_minibatch(selected, scene.ground_truth, stats.config, mb_rng);
        stats.fg_total += mb.fg_count;
        stats.bg_total += mb.bg_count;
        ++stats.scenes_with_minibatch;
      } catch (const EmptyMinibatchError&) {
        ++stats.scenes_skipped;
      }

      if (with_eval) {
        std::vector<Detection> dets;
        dets.reserve(selected.size());
        for (const auto& p : selected) {
          dets.push_back({scene_image_id(m), p.box, p.score, "object"});
        }
        dets = cap_detections(dets, 100);
        eval_dets[si].insert(eval_dets[si].end(), dets.begin(), dets.end());
      }
    }
  }

  for (std::size_t si = 0; si < result.schemes.size(); ++si) {
    SchemeStats& stats = result.schemes[si];
    stats.mean_nominal_scale =
        stats.selected_total == 0
            ? 0.0
            : nominal_sums[si] / static_cast<double>(stats.selected_total);
    stats.recall_at_50 =
        result.gt_total == 0
            ? 0.0
            : static_cast<double>(matched_gts[si]) /
                  static_cast<double>(result.gt_total);
    if (with_eval) {
      stats.eval = coco_summary(eval_dets[si], eval_gts);
    }
  }
  return result;
}

SimulationSpec parse_simulation_spec(std::istream& in) {
  SimulationSpec sim;
  bool objects_set = false, duplication_set = false;
  for (const auto& [key, value] : read_key_values(in)) {
    if (key == "image_width") {
      sim.scene.image_width = parse_number(value);
    } else if (key == "image_height") {
      sim.scene.image_height = parse_number(value);
    } else if (key == "scales") {
      sim.scene.anchors.scales = parse_number_list(value);
    } else if (key == "aspect_ratios") {
      sim.scene.anchors.aspect_ratios = parse_number_list(value);
    } else if (key == "stride") {
      sim.scene.anchors.stride = parse_number(value);
    } else if (key == "objects") {
      sim.scene.objects.clear();
      for (double v : parse_number_list(value)) {
        sim.scene.objects.push_back(static_cast<int>(v));
      }
      objects_set = true;
    } else if (key == "proposals_per_object") {
      sim.scene.proposals_per_object = static_cast<int>(parse_integer(value));
    } else if (key == "duplication_factor") {
      sim.scene.duplication_factor.clear();
      for (double v : parse_number_list(value)) {
        sim.scene.duplication_factor.push_back(static_cast<int>(v));
      }
      duplication_set = true;
    } else if (key == "score_noise_sigma") {
      sim.scene.score_noise_sigma = parse_number(value);
    } else if (key == "localization_noise_sigma") {
      sim.scene.localization_noise_sigma = parse_number(value);
    } else if (key == "clutter_count") {
      sim.scene.clutter_count = static_cast<int>(parse_integer(value));
    } else if (key == "seed") {
      sim.scene.seed = static_cast<std::uint64_t>(parse_integer(value));
    } else if (key == "scenes") {
      sim.scenes = static_cast<int>(parse_integer(value));
    } else {
      throw InvalidConfigError("unknown scene key '" + key + "'");
    }
  }
  // keep the per-bucket vectors aligned when only scales changed
  if (!objects_set &&
      sim.scene.objects.size() != sim.scene.anchors.num_buckets()) {
    sim.scene.objects.assign(sim.scene.anchors.num_buckets(), 8);
  }
  if (!duplication_set && sim.scene.duplication_factor.size() !=
                              sim.scene.anchors.num_buckets()) {
    sim.scene.duplication_factor.assign(sim.scene.anchors.num_buckets(), 1);
  }
  if (sim.scenes < 1) throw InvalidConfigError("scenes must be >= 1");
  sim.scene.validate();
  return sim;
}

SimulationSpec read_simulation_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open " + path);
  return parse_simulation_spec(in);
}

namespace {

std::string int_list(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string int64_list(const std::vector<std::int64_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::ofstream create_file(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InvalidInputError("cannot create " + path.string());
  }
  return out;
}

}  // namespace

void write_simulation(const ExperimentResult& result, const SceneSpec& spec,
                      const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    auto out = create_file(fs::path(out_dir) / "metadata.txt");
    out << "rng=" << Rng::kAlgorithm << "\n";
    out << "seed=" << spec.seed << "\n";
    out << "scenes=" << result.num_scenes << "\n";
    out << "image_width=" << format_number(spec.image_width) << "\n";
    out << "image_height=" << format_number(spec.image_height) << "\n";
    out << "scales=" << join_number_list(spec.anchors.scales) << "\n";
    out << "stride=" << format_number(spec.anchors.stride) << "\n";
    out << "objects=" << int_list(spec.objects) << "\n";
    out << "proposals_per_object=" << spec.proposals_per_object << "\n";
    out << "duplication_factor=" << int_list(spec.duplication_factor) << "\n";
    out << "score_noise_sigma=" << format_number(spec.score_noise_sigma)
        << "\n";
    out << "localization_noise_sigma="
        << format_number(spec.localization_noise_sigma) << "\n";
    out << "clutter_count=" << spec.clutter_count << "\n";
    out << "gt_total=" << result.gt_total << "\n";
    std::string names;
    for (const auto& s : result.schemes) {
      if (!names.empty()) names += ',';
      names += s.name;
    }
    out << "schemes=" << names << "\n";
  }

  {
    auto out = create_file(fs::path(out_dir) / "summary.txt");
    out << "scheme selected_total mean_nominal_scale recall@0.5 mean_fg "
           "mean_bg scenes_skipped\n";
    for (const auto& s : result.schemes) {
      const double denom = std::max(1, s.scenes_with_minibatch);
      out << s.name << ' ' << s.selected_total << ' '
          << format_number(s.mean_nominal_scale) << ' '
          << format_number(s.recall_at_50) << ' '
          << format_number(static_cast<double>(s.fg_total) / denom) << ' '
          << format_number(static_cast<double>(s.bg_total) / denom) << ' '
          << s.scenes_skipped << "\n";
    }
  }

  for (const auto& s : result.schemes) {
    auto out = create_file(fs::path(out_dir) / (s.name + ".txt"));
    out << "scheme=" << s.name << "\n";
    out << "config_scheme=" << scheme_name(s.config.scheme) << "\n";
    out << "K=" << s.config.K << "\n";
    out << "k=" << s.config.k << "\n";
    if (s.config.scheme == Scheme::kPre || s.config.scheme == Scheme::kPow) {
      out << "ratio_table=" << join_number_list(s.config.ratio_table) << "\n";
      out << "gamma=" << format_number(s.config.gamma) << "\n";
    }
    out << "selected_total=" << s.selected_total << "\n";
    out << "scale_histogram=" << int64_list(s.scale_histogram) << "\n";
    out << "mean_nominal_scale=" << format_number(s.mean_nominal_scale)
        << "\n";
    out << "recall@0.5=" << format_number(s.recall_at_50) << "\n";
    out << "fg_total=" << s.fg_total << "\n";
    out << "bg_total=" << s.bg_total << "\n";
    out << "scenes_with_minibatch=" << s.scenes_with_minibatch << "\n";
    out << "scenes_skipped=" << s.scenes_skipped << "\n";
    if (s.eval) {
      auto eval_out =
          create_file(fs::path(out_dir) / ("eval_" + s.name + ".txt"));
      eval_out << report_key_values(*s.eval, /*coco_style=*/true);
    }
  }
}

}  // namespace regionkit
