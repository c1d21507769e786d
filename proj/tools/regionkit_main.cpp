// Copyright (C) 2026 RegionKit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: de-duplicate proposals, run the selection
// schemes, pool features over RoIs, evaluate detections, and drive the
// synthetic scheme-comparison harness.
//
// Exit codes: 0 success, 2 invalid input or configuration, 3 the
// command produced an empty result.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "regionkit/anchors.hpp"
#include "regionkit/errors.hpp"
#include "regionkit/eval.hpp"
#include "regionkit/harness.hpp"
#include "regionkit/io.hpp"
#include "regionkit/pooling.hpp"
#include "regionkit/random.hpp"
#include "regionkit/sampling.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitEmpty = 3;

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw regionkit::InvalidInputError("cannot create " + path);
  }
  return out;
}

regionkit::AnchorSpec spec_from_flags(const std::string& scales_csv,
                                      double stride) {
  regionkit::AnchorSpec spec;
  spec.scales = regionkit::parse_number_list(scales_csv);
  spec.stride = stride;
  spec.validate();
  return spec;
}

struct NmsArgs {
  double threshold = 0.7;
  std::string input, output;
};

int run_nms(const NmsArgs& args) {
  const auto images = regionkit::read_proposals_file(args.input);
  std::vector<regionkit::ImageProposals> kept;
  std::size_t total = 0;
  for (const auto& image : images) {
    kept.push_back({image.image_id,
                    regionkit::greedy_nms(image.proposals, args.threshold)});
    total += kept.back().proposals.size();
  }
  auto out = open_output(args.output);
  regionkit::write_proposals(out, kept);
  return total == 0 ? kExitEmpty : kExitOk;
}

struct SelectArgs {
  std::string scheme;
  std::string config;
  std::string ratio_file;
  std::string scales_csv = "8,16,32";
  double stride = 16.0;
  std::string phase = "auto";
  std::string input, output;
};

int run_select(const SelectArgs& args) {
  using regionkit::Scheme;
  const Scheme scheme = regionkit::scheme_from_name(args.scheme);

  regionkit::SamplingConfig base;
  if (args.phase == "train" ||
      (args.phase == "auto" && scheme != Scheme::kTop)) {
    base = regionkit::train_defaults(scheme);
  } else if (args.phase == "test" || args.phase == "auto") {
    base = regionkit::test_defaults(scheme);
  } else {
    throw regionkit::InvalidConfigError("phase must be train, test or auto");
  }

  regionkit::SamplingConfig cfg =
      args.config.empty()
          ? base
          : regionkit::read_sampling_config_file(args.config, base);

  regionkit::AnchorSpec spec = spec_from_flags(args.scales_csv, args.stride);
  if (!args.ratio_file.empty()) {
    const regionkit::RatioTable table =
        regionkit::read_ratio_table_file(args.ratio_file);
    spec.scales = table.scales;  // the ratio file fixes the scale axis
    spec.validate();
    cfg.ratio_table = table.ratios;
  }

  const auto images = regionkit::read_proposals_file(args.input);
  std::vector<regionkit::ImageProposals> kept;
  std::size_t total = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    regionkit::Rng rng = regionkit::Rng::derive(cfg.seed, i);
    kept.push_back({images[i].image_id,
                    regionkit::select(images[i].proposals, cfg, spec, rng)});
    total += kept.back().proposals.size();
  }
  auto out = open_output(args.output);
  regionkit::write_proposals(out, kept);
  return total == 0 ? kExitEmpty : kExitOk;
}

struct PoolArgs {
  std::string features, rois, output;
  int crop = 14;
  std::string op = "crop";
  bool maxpool = false;
  double stride = 1.0;
};

int run_pool(const PoolArgs& args) {
  const regionkit::FeatureMapf fm =
      regionkit::read_feature_map_file(args.features);
  const auto images = regionkit::read_proposals_file(args.rois);
  auto out = open_output(args.output);
  std::size_t total = 0;
  for (const auto& image : images) {
    for (const auto& roi : image.proposals) {
      regionkit::Boxd scaled(roi.box.x1 / args.stride,
                             roi.box.y1 / args.stride,
                             roi.box.x2 / args.stride,
                             roi.box.y2 / args.stride);
      const regionkit::Boxf clipped =
          regionkit::clip_to_image(scaled, static_cast<double>(fm.width),
                                   static_cast<double>(fm.height))
              .cast<float>();
      regionkit::PooledFeaturef pooled;
      if (args.op == "crop") {
        pooled = regionkit::crop_and_resize(fm, clipped, args.crop);
      } else if (args.op == "roipool") {
        pooled = regionkit::roi_pool(fm, clipped, args.crop);
      } else {
        throw regionkit::InvalidConfigError("op must be crop or roipool");
      }
      if (args.maxpool) {
        pooled = regionkit::max_pool_2x2(pooled);
      }
      regionkit::write_pooled_feature(out, pooled);
      ++total;
    }
  }
  return total == 0 ? kExitEmpty : kExitOk;
}

struct EvalArgs {
  std::string dets, gts, output;
  std::string style = "coco";
  double iou = 0.5;
  std::string interp = "all";
  int cap = 100;
};

int run_eval_cmd(const EvalArgs& args) {
  regionkit::EvalOptions opts;
  opts.coco_style = args.style == "coco";
  if (!opts.coco_style && args.style != "voc") {
    throw regionkit::InvalidConfigError("style must be voc or coco");
  }
  opts.cap = args.cap;
  opts.voc_iou = args.iou;
  if (args.interp == "all") {
    opts.interp = regionkit::Interpolation::kAllPoint;
  } else if (args.interp == "11") {
    opts.interp = regionkit::Interpolation::kElevenPoint;
  } else {
    throw regionkit::InvalidConfigError("interp must be all or 11");
  }

  const auto dets = regionkit::read_detections_file(args.dets);
  const auto gts = regionkit::read_ground_truth_file(args.gts);
  const regionkit::EvalReport report = regionkit::run_eval(dets, gts, opts);

  std::cout << regionkit::render_report_table(report, opts.coco_style);
  auto out = open_output(args.output);
  out << regionkit::report_key_values(report, opts.coco_style);
  return kExitOk;
}

struct SimulateArgs {
  std::string spec_file, output;
  std::string schemes_csv = "nms,all,pow";
  std::string ratio_file;
  bool with_eval = false;
};

int run_simulate(const SimulateArgs& args) {
  const regionkit::SimulationSpec sim =
      regionkit::read_simulation_spec_file(args.spec_file);

  std::vector<regionkit::SamplingConfig> configs;
  std::stringstream ss(args.schemes_csv);
  std::string name;
  while (std::getline(ss, name, ',')) {
    const regionkit::Scheme scheme = regionkit::scheme_from_name(name);
    regionkit::SamplingConfig cfg =
        scheme == regionkit::Scheme::kTop
            ? regionkit::test_defaults(scheme)
            : regionkit::train_defaults(scheme);
    if (scheme == regionkit::Scheme::kPre && !args.ratio_file.empty()) {
      cfg.ratio_table =
          regionkit::read_ratio_table_file(args.ratio_file).ratios;
    }
    configs.push_back(cfg);
  }
  if (configs.empty()) {
    throw regionkit::InvalidConfigError("no schemes requested");
  }

  const regionkit::ExperimentResult result = regionkit::run_comparison(
      sim.scene, configs, sim.scenes, args.with_eval);
  regionkit::write_simulation(result, sim.scene, args.output);

  std::ifstream summary(args.output + "/summary.txt");
  std::cout << summary.rdbuf();
  return kExitOk;
}

struct MeasureArgs {
  std::string input, output;
  std::string scales_csv = "8,16,32";
  double stride = 16.0;
};

int run_measure_ratio(const MeasureArgs& args) {
  const regionkit::AnchorSpec spec =
      spec_from_flags(args.scales_csv, args.stride);
  const auto images = regionkit::read_proposals_file(args.input);
  std::vector<regionkit::ScoredProposal> all;
  for (const auto& image : images) {
    all.insert(all.end(), image.proposals.begin(), image.proposals.end());
  }
  // re-index: source indices are only unique per image
  for (std::size_t i = 0; i < all.size(); ++i) {
    all[i].source_index = static_cast<std::int64_t>(i);
  }
  const auto ratio = regionkit::measure_scale_ratio(all, spec);
  auto out = open_output(args.output);
  regionkit::write_ratio_table(out, spec.scales, ratio);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Region-proposal selection, pooling and evaluation toolkit"};
  app.require_subcommand(1);

  NmsArgs nms_args;
  auto* nms = app.add_subcommand("nms", "Greedy NMS de-duplication");
  nms->add_option("--threshold", nms_args.threshold,
                  "suppress overlaps with IoU above this")
      ->capture_default_str();
  nms->add_option("--in", nms_args.input, "proposals file")->required();
  nms->add_option("--out", nms_args.output, "kept proposals file")
      ->required();

  SelectArgs select_args;
  auto* select = app.add_subcommand("select", "Run a selection scheme");
  select->add_option("--scheme", select_args.scheme, "nms|all|pre|pow|top")
      ->required();
  select->add_option("--config", select_args.config,
                     "key=value config overriding the scheme defaults");
  select->add_option("--ratio", select_args.ratio_file,
                     "measured ratio table (PRE)");
  select->add_option("--scales", select_args.scales_csv, "anchor scales")
      ->capture_default_str();
  select->add_option("--stride", select_args.stride, "anchor stride")
      ->capture_default_str();
  select->add_option("--phase", select_args.phase,
                     "train|test|auto defaults for the scheme")
      ->capture_default_str();
  select->add_option("--in", select_args.input, "proposals file")->required();
  select->add_option("--out", select_args.output, "selected proposals file")
      ->required();

  PoolArgs pool_args;
  auto* pool = app.add_subcommand("pool", "Pool features over RoIs");
  pool->add_option("--features", pool_args.features, "feature map file")
      ->required();
  pool->add_option("--rois", pool_args.rois, "RoIs in proposal format")
      ->required();
  pool->add_option("--crop", pool_args.crop, "output grid size")
      ->capture_default_str();
  pool->add_option("--op", pool_args.op, "crop|roipool")
      ->capture_default_str();
  pool->add_flag("--maxpool", pool_args.maxpool, "2x2 max-pool afterwards");
  pool->add_option("--stride", pool_args.stride,
                   "divide RoI coordinates by this before pooling")
      ->capture_default_str();
  pool->add_option("--out", pool_args.output, "pooled features file")
      ->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Evaluate detections");
  eval->add_option("--dets", eval_args.dets, "detections file")->required();
  eval->add_option("--gts", eval_args.gts, "ground-truth file")->required();
  eval->add_option("--style", eval_args.style, "voc|coco")
      ->capture_default_str();
  eval->add_option("--iou", eval_args.iou, "IoU threshold (voc style)")
      ->capture_default_str();
  eval->add_option("--interp", eval_args.interp,
                   "all|11 point interpolation (voc style)")
      ->capture_default_str();
  eval->add_option("--cap", eval_args.cap,
                   "per-image detection cap, 0 disables")
      ->capture_default_str();
  eval->add_option("--out", eval_args.output, "report key-value file")
      ->required();

  SimulateArgs sim_args;
  auto* simulate =
      app.add_subcommand("simulate", "Compare schemes on synthetic scenes");
  simulate->add_option("--spec", sim_args.spec_file, "scene spec file")
      ->required();
  simulate->add_option("--schemes", sim_args.schemes_csv,
                       "comma-separated schemes")
      ->capture_default_str();
  simulate->add_option("--ratio", sim_args.ratio_file,
                       "ratio table for PRE (otherwise measured from NMS)");
  simulate->add_flag("--eval", sim_args.with_eval,
                     "evaluate selections against the scene ground truth");
  simulate->add_option("--out", sim_args.output, "output directory")
      ->required();

  MeasureArgs measure_args;
  auto* measure =
      app.add_subcommand("measure-ratio", "Scale histogram of a selection");
  measure->add_option("--in", measure_args.input, "selected proposals file")
      ->required();
  measure->add_option("--scales", measure_args.scales_csv, "anchor scales")
      ->capture_default_str();
  measure->add_option("--stride", measure_args.stride, "anchor stride")
      ->capture_default_str();
  measure->add_option("--out", measure_args.output, "ratio table file")
      ->required();

  try {
    app.parse(argc, argv);
    if (*nms) return run_nms(nms_args);
    if (*select) return run_select(select_args);
    if (*pool) return run_pool(pool_args);
    if (*eval) return run_eval_cmd(eval_args);
    if (*simulate) return run_simulate(sim_args);
    if (*measure) return run_measure_ratio(measure_args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  } catch (const regionkit::EmptyResultError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEmpty;
  } catch (const regionkit::InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}
