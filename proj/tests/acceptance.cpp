// Copyright (C) 2026 RegionKit Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance suite. Each criterion prints one PASS/FAIL
// line; the process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "oracles.hpp"
#include "regionkit/anchors.hpp"
#include "regionkit/box.hpp"
#include "regionkit/eval.hpp"
#include "regionkit/harness.hpp"
#include "regionkit/io.hpp"
#include "regionkit/pooling.hpp"
#include "regionkit/random.hpp"
#include "regionkit/sampling.hpp"

using namespace regionkit;

namespace {

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> run;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

#define REQUIRE_OR_FAIL(cond)                                              \
  do {                                                                     \
    if (!(cond)) {                                                         \
      detail = "failed: " #cond;                                           \
      return false;                                                        \
    }                                                                      \
  } while (0)

double elapsed_seconds(
    const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

// --------------------------------------------------------------------------
// 1. greedy NMS equals the exhaustive reference on 500 random instances.
bool nms_oracle_equivalence(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(101);
  for (int instance = 0; instance < 500; ++instance) {
    const int n = 1 + static_cast<int>(rng.uniform_index(1000));
    std::vector<ScoredProposal> proposals;
    proposals.reserve(n);
    for (int i = 0; i < n; ++i) {
      const double x1 = rng.uniform(0, 90);
      const double y1 = rng.uniform(0, 90);
      proposals.push_back({Boxd(x1, y1, x1 + rng.uniform(1, 30),
                                y1 + rng.uniform(1, 30)),
                           std::floor(rng.uniform() * 100.0) / 100.0, i});
    }
    const double threshold = rng.uniform(0.3, 0.9);
    const auto fast = greedy_nms(proposals, threshold);
    const auto reference = oracle::reference_nms(proposals, threshold);
    REQUIRE_OR_FAIL(fast.size() == reference.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      REQUIRE_OR_FAIL(fast[i].source_index == reference[i].source_index);
    }
  }
  const double seconds = elapsed_seconds(start);
  detail = "500 instances in " + std::to_string(seconds) + "s";
  REQUIRE_OR_FAIL(seconds < 10.0);
  return true;
}

// --------------------------------------------------------------------------
// 2. Stock constants wired end to end, frozen as golden config dumps.
bool config_constants_golden(std::string& detail) {
  const std::string nms_train_golden =
      "scheme=nms\nK=12000\nk=2000\nnms_threshold=0.7\nR=256\nN=1\n"
      "pos_fraction=0.25\ngamma=1\nratio_table=\nfg_iou_min=0.5\n"
      "bg_iou_range=0.1,0.5\nmin_size=0\nexclude_gt=1\nseed=0\n";
  const std::string nms_test_golden =
      "scheme=nms\nK=6000\nk=300\nnms_threshold=0.7\nR=256\nN=1\n"
      "pos_fraction=0.25\ngamma=1\nratio_table=\nfg_iou_min=0.5\n"
      "bg_iou_range=0.1,0.5\nmin_size=0\nexclude_gt=1\nseed=0\n";
  const std::string top_test_golden =
      "scheme=top\nK=5000\nk=5000\nnms_threshold=0.7\nR=256\nN=1\n"
      "pos_fraction=0.25\ngamma=1\nratio_table=\nfg_iou_min=0.5\n"
      "bg_iou_range=0.1,0.5\nmin_size=0\nexclude_gt=1\nseed=0\n";

  REQUIRE_OR_FAIL(dump_sampling_config(train_defaults(Scheme::kNms)) ==
                  nms_train_golden);
  REQUIRE_OR_FAIL(dump_sampling_config(test_defaults(Scheme::kNms)) ==
                  nms_test_golden);
  REQUIRE_OR_FAIL(dump_sampling_config(test_defaults(Scheme::kTop)) ==
                  top_test_golden);
  for (Scheme scheme : {Scheme::kAll, Scheme::kPre, Scheme::kPow}) {
    const SamplingConfig cfg = train_defaults(scheme);
    REQUIRE_OR_FAIL(cfg.k == 6000);
    REQUIRE_OR_FAIL(cfg.K == 6000);
    REQUIRE_OR_FAIL(cfg.R == 256);
    REQUIRE_OR_FAIL(cfg.N == 1);
    REQUIRE_OR_FAIL(cfg.pos_fraction == 0.25);
  }
  detail = "train K=12000/k=2000 thr 0.7, test K=6000/k=300, "
           "ALL/PRE/POW k=6000, TOP K=5000, R=256/N=1, pos 0.25";
  return true;
}

// --------------------------------------------------------------------------
// 3. The worked ratio example (0.4, 0.2, 0.2) over scales (8, 16, 32).
bool pre_worked_example(std::string& detail) {
  const std::vector<double> table = {0.4, 0.2, 0.2};
  const auto probs = keep_probabilities(table);
  REQUIRE_OR_FAIL(probs[0] == 1.0);
  REQUIRE_OR_FAIL(probs[1] == 0.5);
  REQUIRE_OR_FAIL(probs[2] == 0.5);

  AnchorSpec spec;
  std::vector<ScoredProposal> population;
  std::int64_t idx = 0;
  const auto add_boxes = [&](int count, double side) {
    for (int i = 0; i < count; ++i) {
      const double x = static_cast<double>(i) * (side + 8.0);
      population.push_back({Boxd(x, 0, x + side, side), 0.5, idx++});
    }
  };
  add_boxes(1000, 128.0);
  add_boxes(10000, 256.0);
  add_boxes(10000, 512.0);

  SamplingConfig cfg = train_defaults(Scheme::kPre);
  cfg.K = 30000;
  cfg.k = 30000;
  Rng rng(303);
  const auto kept = select_by_ratio(population, table, spec, cfg, rng);
  std::int64_t counts[3] = {0, 0, 0};
  for (const auto& p : kept) {
    counts[scale_bucket_of(p.box, spec).index] += 1;
  }
  // scale-8 retained at exactly 100%
  REQUIRE_OR_FAIL(counts[0] == 1000);
  // the others within +-3 sigma of Binomial(10000, 0.5): 5000 +- 150
  REQUIRE_OR_FAIL(counts[1] >= 4850 && counts[1] <= 5150);
  REQUIRE_OR_FAIL(counts[2] >= 4850 && counts[2] <= 5150);
  detail = "kept 1000/" + std::to_string(counts[1]) + "/" +
           std::to_string(counts[2]) + " of 1000/10000/10000";
  return true;
}

// --------------------------------------------------------------------------
// 4. POW gamma=1 keep probabilities are exactly (1, 0.5, 0.25).
bool pow_gamma_one(std::string& detail) {
  AnchorSpec spec;
  const auto probs = keep_probabilities(pow_ratio(spec, 1.0));
  REQUIRE_OR_FAIL(probs.size() == 3);
  REQUIRE_OR_FAIL(probs[0] == 1.0);
  REQUIRE_OR_FAIL(probs[1] == 0.5);
  REQUIRE_OR_FAIL(probs[2] == 0.25);
  detail = "r(s)=s^-1 over (8,16,32) -> keep (1, 0.5, 0.25)";
  return true;
}

// --------------------------------------------------------------------------
// 5. NMS small-region bias on the duplication (1,1,8) scenario.
bool nms_small_region_bias(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  SceneSpec spec;
  spec.duplication_factor = {1, 1, 8};
  spec.seed = 515;
  const ExperimentResult result = run_comparison(
      spec, {train_defaults(Scheme::kNms), train_defaults(Scheme::kAll)},
      100);
  const auto& nms = result.schemes[0].per_scene_mean_scale;
  const auto& all = result.schemes[1].per_scene_mean_scale;
  int nms_lower = 0;
  for (int m = 0; m < 100; ++m) {
    if (nms[m] < all[m]) ++nms_lower;
  }
  const double seconds = elapsed_seconds(start);
  detail = "NMS mean scale lower in " + std::to_string(nms_lower) +
           "/100 scenes, " + std::to_string(seconds) + "s";
  REQUIRE_OR_FAIL(nms_lower >= 99);
  REQUIRE_OR_FAIL(seconds < 60.0);
  return true;
}

// --------------------------------------------------------------------------
// 6. crop_and_resize gradient against central finite differences.
bool gradient_check(std::string& detail) {
  Rng rng(606);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int channels = 1 + static_cast<int>(rng.uniform_index(4));
    const int height = 2 + static_cast<int>(rng.uniform_index(7));
    const int width = 2 + static_cast<int>(rng.uniform_index(7));
    const int crop = 1 + static_cast<int>(rng.uniform_index(6));
    FeatureMapd fm(channels, height, width);
    for (auto& v : fm.data) v = rng.uniform(-2.0, 2.0);
    const double x1 = rng.uniform(0, width - 1.0);
    const double y1 = rng.uniform(0, height - 1.0);
    const Boxd roi(x1, y1, std::min<double>(x1 + rng.uniform(0.2, width), width),
                   std::min<double>(y1 + rng.uniform(0.2, height), height));

    PooledFeatured upstream(channels, crop);
    for (auto& v : upstream.data) v = rng.uniform(-1.0, 1.0);
    const auto analytic =
        crop_and_resize_backward(channels, height, width, roi, crop, upstream);

    const auto loss = [&](const std::vector<double>& values) {
      FeatureMapd probe = fm;
      probe.data = values;
      const auto out = crop_and_resize(probe, roi, crop);
      double acc = 0.0;
      for (std::size_t i = 0; i < out.data.size(); ++i) {
        acc += out.data[i] * upstream.data[i];
      }
      return acc;
    };
    const auto numeric =
        oracle::finite_difference_gradient(fm.data, 1e-3, loss);
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      const double denom =
          std::max({1.0, std::abs(analytic.data[i]), std::abs(numeric[i])});
      worst = std::max(worst, std::abs(analytic.data[i] - numeric[i]) / denom);
    }
  }
  REQUIRE_OR_FAIL(worst < 1e-3);

  // constant-map invariance, exact
  FeatureMapd constant(2, 5, 5, 3.75);
  const auto const_out =
      crop_and_resize(constant, Boxd(0.3, 0.9, 4.1, 4.7), 14);
  for (double v : const_out.data) REQUIRE_OR_FAIL(v == 3.75);

  // aligned subgrid, exact
  FeatureMapd grid(1, 8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) grid.at(0, y, x) = 10.0 * y + x;
  }
  const auto aligned = crop_and_resize(grid, Boxd(1, 2, 4, 5), 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      REQUIRE_OR_FAIL(aligned.at(0, y, x) == grid.at(0, 2 + y, 1 + x));
    }
  }
  detail = "max relative error " + sci(worst) +
           " on 100 cases; constant and aligned cases exact";
  return true;
}

// --------------------------------------------------------------------------
// 7. Delta encode/decode round-trip over 10,000 random pairs.
bool delta_roundtrip(std::string& detail) {
  Rng rng(707);
  const auto random_box = [&rng] {
    const double x1 = rng.uniform(0, 500), y1 = rng.uniform(0, 500);
    return Boxd(x1, y1, x1 + rng.uniform(1, 1000), y1 + rng.uniform(1, 1000));
  };
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Boxd anchor = random_box();
    const Boxd target = random_box();
    const Boxd back = decode_delta(anchor, encode_delta(anchor, target));
    worst = std::max({worst, std::abs(back.x1 - target.x1),
                      std::abs(back.y1 - target.y1),
                      std::abs(back.x2 - target.x2),
                      std::abs(back.y2 - target.y2)});
  }
  detail = "max absolute error " + sci(worst);
  REQUIRE_OR_FAIL(worst < 1e-6);
  return true;
}

// --------------------------------------------------------------------------
// 8. coco_summary against the assignment-enumeration oracle.
bool eval_oracle(std::string& detail) {
  Rng rng(808);
  double worst = 0.0;
  for (int instance = 0; instance < 200; ++instance) {
    const testgen::TinyInstance inst = testgen::tiny_eval_instance(rng);
    const EvalReport report = coco_summary(inst.dets, inst.gts);
    const auto expected = oracle::enumerate_coco_ap(inst.dets, inst.gts);
    REQUIRE_OR_FAIL(report.ap.has_value() == expected.has_value());
    if (report.ap) {
      worst = std::max(worst, std::abs(*report.ap - *expected));
      REQUIRE_OR_FAIL(std::abs(*report.ap - *expected) < 1e-9);
      REQUIRE_OR_FAIL(*report.ar1 <= *report.ar10 + 1e-12);
      REQUIRE_OR_FAIL(*report.ar10 <= *report.ar100 + 1e-12);
    }
  }

  // the perfect-detection case is exact
  std::vector<GroundTruthBox> gts = {
      {"i", Boxd(0, 0, 50, 50), "a", false},
      {"i", Boxd(100, 100, 180, 200), "b", false},
  };
  std::vector<Detection> dets;
  for (const auto& g : gts) dets.push_back({g.image_id, g.box, 1.0, g.category});
  const EvalReport perfect = coco_summary(dets, gts);
  REQUIRE_OR_FAIL(*perfect.ap == 1.0);
  REQUIRE_OR_FAIL(*perfect.ap50 == 1.0);
  REQUIRE_OR_FAIL(*perfect.ap75 == 1.0);
  detail = "200 instances, max |AP - oracle| = " + sci(worst) +
           "; perfect case exact";
  return true;
}

// --------------------------------------------------------------------------
// 9. The evaluation input path never sees more than 100 dets per image.
bool detection_cap(std::string& detail) {
  std::vector<Detection> dets;
  std::vector<GroundTruthBox> gts = {{"img", Boxd(0, 0, 50, 50), "c", false}};
  // 149 clutter FPs score above the single TP: with the cap the TP is
  // pushed out of the evaluated set, without it the TP survives.
  for (int i = 0; i < 149; ++i) {
    const double x = 200.0 + 60.0 * i;
    dets.push_back({"img", Boxd(x, 0, x + 50, 50), 0.9 - i * 0.001, "c"});
  }
  dets.push_back({"img", Boxd(0, 0, 50, 50), 0.1, "c"});

  // VOC style has no internal budget, so the cap is the only limiter:
  // capped, the low-score TP falls outside the evaluated set.
  EvalOptions voc_capped;
  voc_capped.coco_style = false;
  voc_capped.cap = 100;
  const EvalReport with_cap = run_eval(dets, gts, voc_capped);
  EvalOptions voc_uncapped = voc_capped;
  voc_uncapped.cap = 0;
  const EvalReport without_cap = run_eval(dets, gts, voc_uncapped);
  REQUIRE_OR_FAIL(*with_cap.map == 0.0);    // TP fell outside the cap
  REQUIRE_OR_FAIL(*without_cap.map > 0.0);  // and is visible without it

  // the capped COCO path evaluates exactly the per-image top-100 subset
  const auto manual = cap_detections(dets, 100);
  REQUIRE_OR_FAIL(manual.size() == 100);
  EvalOptions coco_capped;
  coco_capped.cap = 100;
  EvalOptions coco_pre_capped;
  coco_pre_capped.cap = 0;
  const EvalReport capped_report = run_eval(dets, gts, coco_capped);
  const EvalReport manual_report = run_eval(manual, gts, coco_pre_capped);
  REQUIRE_OR_FAIL(manual_report.ap == capped_report.ap);
  REQUIRE_OR_FAIL(*capped_report.ap == 0.0);

  // multi-image inputs are capped independently
  std::vector<Detection> two_images = dets;
  for (auto d : dets) {
    d.image_id = "img2";
    two_images.push_back(d);
  }
  const auto capped2 = cap_detections(two_images, 100);
  std::int64_t img1 = 0, img2 = 0;
  for (const auto& d : capped2) {
    (d.image_id == "img" ? img1 : img2) += 1;
  }
  REQUIRE_OR_FAIL(img1 == 100);
  REQUIRE_OR_FAIL(img2 == 100);
  detail = "cap keeps 100/image on 150- and 300-detection inputs";
  return true;
}

// --------------------------------------------------------------------------
// 10. simulate is deterministic: byte-identical output directories.
bool simulate_determinism(std::string& detail) {
  namespace fs = std::filesystem;
  SceneSpec spec;
  spec.duplication_factor = {1, 1, 8};
  spec.seed = 1010;
  const std::vector<SamplingConfig> configs = {
      train_defaults(Scheme::kNms), train_defaults(Scheme::kAll),
      train_defaults(Scheme::kPow)};

  const fs::path base = fs::temp_directory_path() / "regionkit_acceptance";
  fs::remove_all(base);
  for (const char* sub : {"first", "second"}) {
    const ExperimentResult result =
        run_comparison(spec, configs, 20, /*with_eval=*/true);
    write_simulation(result, spec, (base / sub).string());
  }

  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(base / "first")) {
    const auto name = entry.path().filename();
    std::ifstream fa(entry.path(), std::ios::binary);
    std::ifstream fb(base / "second" / name, std::ios::binary);
    REQUIRE_OR_FAIL(fb.good());
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    REQUIRE_OR_FAIL(sa.str() == sb.str());
    ++files;
  }
  REQUIRE_OR_FAIL(files >= 5);
  fs::remove_all(base);
  detail = std::to_string(files) + " files byte-identical across two runs";
  return true;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"NMS oracle equivalence (500 instances, <10s)", nms_oracle_equivalence},
      {"stock constants frozen in config dumps", config_constants_golden},
      {"worked ratio example (0.4,0.2,0.2)", pre_worked_example},
      {"POW gamma=1 keep probabilities exact", pow_gamma_one},
      {"NMS small-region bias over 100 scenes (<60s)", nms_small_region_bias},
      {"crop_and_resize gradient check", gradient_check},
      {"delta round-trip over 10,000 pairs", delta_roundtrip},
      {"evaluation vs assignment-enumeration oracle", eval_oracle},
      {"per-image detection cap on the eval path", detection_cap},
      {"simulate determinism (byte-identical)", simulate_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string note;
    bool ok = false;
    try {
      ok = criteria[i].run(note);
    } catch (const std::exception& e) {
      note = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %zu: %s%s%s\n", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].name.c_str(), note.empty() ? "" : " -- ",
                note.c_str());
    if (!ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
