// Copyright (C) 2026 RegionKit Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "regionkit/eval.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "regionkit/random.hpp"

using namespace regionkit;

namespace {

Detection det(const std::string& img, double x1, double y1, double x2,
              double y2, double score, const std::string& cat) {
  return {img, Boxd(x1, y1, x2, y2), score, cat};
}

GroundTruthBox gt(const std::string& img, double x1, double y1, double x2,
                  double y2, const std::string& cat, bool difficult = false) {
  return {img, Boxd(x1, y1, x2, y2), cat, difficult};
}

}  // namespace

TEST_CASE("cap_detections keeps the top scorers per image") {
  std::vector<Detection> dets;
  for (int i = 0; i < 150; ++i) {
    dets.push_back(det("one", i, 0, i + 10.0, 10, i / 150.0, "c"));
  }
  const auto capped = cap_detections(dets, 100);
  CHECK(capped.size() == 100);
  // the 50 lowest scores are gone
  for (const auto& d : capped) CHECK(d.score >= 50 / 150.0);

  SUBCASE("under the cap nothing changes") {
    std::vector<Detection> five(dets.begin(), dets.begin() + 5);
    CHECK(cap_detections(five, 100).size() == 5);
  }

  SUBCASE("caps apply per image independently") {
    std::vector<Detection> two_images;
    for (int i = 0; i < 120; ++i) {
      two_images.push_back(det("a", i, 0, i + 5.0, 5, i / 120.0, "c"));
      two_images.push_back(det("b", i, 0, i + 5.0, 5, i / 120.0, "c"));
    }
    const auto capped2 = cap_detections(two_images, 100);
    CHECK(capped2.size() == 200);
    CHECK(std::count_if(capped2.begin(), capped2.end(), [](const auto& d) {
            return d.image_id == "a";
          }) == 100);
  }

  SUBCASE("score ties break by insertion order") {
    std::vector<Detection> ties;
    for (int i = 0; i < 4; ++i) {
      ties.push_back(det("t", i * 10.0, 0, i * 10.0 + 5, 5, 0.5, "c"));
    }
    const auto kept = cap_detections(ties, 2);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].box.x1 == 0.0);
    CHECK(kept[1].box.x1 == 10.0);
  }

  CHECK_THROWS_AS(cap_detections(dets, 0), InvalidInputError);
}

TEST_CASE("match_detections greedy single-use matching") {
  const std::vector<GroundTruthBox> gts = {gt("i", 0, 0, 10, 10, "c")};

  SUBCASE("exact hit is a TP") {
    const auto flags =
        match_detections({det("i", 0, 0, 10, 10, 0.9, "c")}, gts, 0.5);
    CHECK(flags == std::vector<MatchFlag>{MatchFlag::kTruePositive});
  }

  SUBCASE("second detection on the same GT is an FP") {
    const auto flags = match_detections({det("i", 0, 0, 10, 10, 0.9, "c"),
                                         det("i", 1, 1, 10, 10, 0.8, "c")},
                                        gts, 0.5);
    CHECK(flags[0] == MatchFlag::kTruePositive);
    CHECK(flags[1] == MatchFlag::kFalsePositive);
  }

  SUBCASE("IoU below the threshold is an FP") {
    // iou([0,0,10,10],[0,0,10,4.5]) = 0.45
    const auto flags =
        match_detections({det("i", 0, 0, 10, 4.5, 0.9, "c")}, gts, 0.5);
    CHECK(flags[0] == MatchFlag::kFalsePositive);
  }

  SUBCASE("wrong category or image never matches") {
    CHECK(match_detections({det("i", 0, 0, 10, 10, 0.9, "other")}, gts,
                           0.5)[0] == MatchFlag::kFalsePositive);
    CHECK(match_detections({det("j", 0, 0, 10, 10, 0.9, "c")}, gts, 0.5)[0] ==
          MatchFlag::kFalsePositive);
  }

  SUBCASE("difficult GTs absorb matches without counting") {
    const std::vector<GroundTruthBox> hard = {
        gt("i", 0, 0, 10, 10, "c", true)};
    const auto flags =
        match_detections({det("i", 0, 0, 10, 10, 0.9, "c")}, hard, 0.5);
    CHECK(flags[0] == MatchFlag::kIgnored);
  }

  SUBCASE("the higher-IoU unmatched GT wins, not the first-found") {
    const std::vector<GroundTruthBox> two = {
        gt("i", 0, 0, 10, 10, "c"),
        gt("i", 2, 0, 12, 10, "c"),
    };
    const auto flags =
        match_detections({det("i", 2.5, 0, 12.5, 10, 0.9, "c"),
                          det("i", 2, 0, 12, 10, 0.8, "c")},
                         two, 0.5);
    // first det is closest to the second GT, so both dets land
    CHECK(flags[0] == MatchFlag::kTruePositive);
    CHECK(flags[1] == MatchFlag::kTruePositive);
  }
}

TEST_CASE("average_precision hand cases") {
  const auto tp = [](double s) {
    return ScoredFlag{s, MatchFlag::kTruePositive};
  };
  const auto fp = [](double s) {
    return ScoredFlag{s, MatchFlag::kFalsePositive};
  };

  SUBCASE("perfect detector") {
    CHECK(*average_precision({tp(0.9), tp(0.8)}, 2,
                             Interpolation::kAllPoint) == 1.0);
    CHECK(*average_precision({tp(0.9), tp(0.8)}, 2,
                             Interpolation::kElevenPoint) == 1.0);
  }
  SUBCASE("no true positives") {
    CHECK(*average_precision({fp(0.9), fp(0.8)}, 2,
                             Interpolation::kAllPoint) == 0.0);
    CHECK(*average_precision({fp(0.9)}, 3,
                             Interpolation::kElevenPoint) == 0.0);
    CHECK(*average_precision({}, 2, Interpolation::kAllPoint) == 0.0);
  }
  SUBCASE("one TP then one FP over two GTs is 0.5 all-point") {
    // envelope: precision 1 up to recall 0.5, nothing beyond
    CHECK(*average_precision({tp(0.9), fp(0.8)}, 2,
                             Interpolation::kAllPoint) == 0.5);
    // 11-point: recalls {0, .1, ..., .5} see precision 1 -> 6/11
    CHECK(*average_precision({tp(0.9), fp(0.8)}, 2,
                             Interpolation::kElevenPoint) ==
          doctest::Approx(6.0 / 11.0));
  }
  SUBCASE("ignored entries do not move the curve") {
    const ScoredFlag ig{0.85, MatchFlag::kIgnored};
    CHECK(*average_precision({tp(0.9), ig, fp(0.8)}, 2,
                             Interpolation::kAllPoint) == 0.5);
  }
  SUBCASE("no ground truth is absent, not zero") {
    CHECK(!average_precision({fp(0.9)}, 0, Interpolation::kAllPoint));
    CHECK_THROWS_AS(
        average_precision({}, -1, Interpolation::kAllPoint).has_value(),
        InvalidInputError);
  }
  SUBCASE("interpolated precision climbs back after an FP") {
    // TP FP TP over 2 GTs: all-point keeps precision 2/3 on [0, 1.0]
    const double ap =
        *average_precision({tp(0.9), fp(0.8), tp(0.7)}, 2,
                           Interpolation::kAllPoint);
    CHECK(ap == doctest::Approx(0.5 * 1.0 + 0.5 * (2.0 / 3.0)));
  }
}

TEST_CASE("average_precision monotonicity properties") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const int num_gt = 1 + static_cast<int>(rng.uniform_index(5));
    std::vector<ScoredFlag> flags;
    int tps = 0;
    const int n = 1 + static_cast<int>(rng.uniform_index(8));
    for (int i = 0; i < n; ++i) {
      const bool is_tp = tps < num_gt && rng.uniform() < 0.5;
      if (is_tp) ++tps;
      flags.push_back({1.0 - i * 0.01,
                       is_tp ? MatchFlag::kTruePositive
                             : MatchFlag::kFalsePositive});
    }
    const double base =
        *average_precision(flags, num_gt, Interpolation::kAllPoint);

    auto with_fp = flags;
    with_fp.push_back({0.0001, MatchFlag::kFalsePositive});
    CHECK(*average_precision(with_fp, num_gt, Interpolation::kAllPoint) <=
          base + 1e-12);

    if (tps < num_gt) {
      auto with_tp = flags;
      with_tp.push_back({2.0, MatchFlag::kTruePositive});
      CHECK(*average_precision(with_tp, num_gt, Interpolation::kAllPoint) >=
            base - 1e-12);
    }
  }
}

TEST_CASE("coco_summary perfect case and report schema") {
  std::vector<GroundTruthBox> gts = {
      gt("i", 0, 0, 50, 50, "a"),
      gt("i", 100, 100, 140, 160, "b"),
      gt("j", 10, 10, 200, 150, "a"),
  };
  std::vector<Detection> dets;
  for (const auto& g : gts) {
    dets.push_back({g.image_id, g.box, 1.0, g.category});
  }
  const EvalReport report = coco_summary(dets, gts);
  CHECK(*report.ap == 1.0);
  CHECK(*report.ap50 == 1.0);
  CHECK(*report.ap75 == 1.0);
  CHECK(*report.map == 1.0);
  CHECK(*report.ar100 == 1.0);

  const std::string kv = report_key_values(report, true);
  for (const char* key : {"AP ", "AP-.5 ", "AP-.75 ", "AP-S ", "AP-M ",
                          "AP-L ", "AR-1 ", "AR-10 ", "AR-100 ", "AR-S ",
                          "AR-M ", "AR-L "}) {
    CHECK(kv.find(key) != std::string::npos);
  }
  CHECK(std::count(kv.begin(), kv.end(), '\n') == 12);
  CHECK(kv.find("AP 100.0") != std::string::npos);
}

TEST_CASE("coco_summary size bands and absent metrics") {
  // one small (20x20 < 32^2) and one large (200x200 > 96^2) object
  std::vector<GroundTruthBox> gts = {
      gt("i", 0, 0, 20, 20, "a"),
      gt("i", 300, 300, 500, 500, "a"),
  };
  std::vector<Detection> dets = {
      det("i", 0, 0, 20, 20, 0.9, "a"),
      det("i", 300, 300, 500, 500, 0.8, "a"),
  };
  const EvalReport report = coco_summary(dets, gts);
  CHECK(*report.ap_small == 1.0);
  CHECK(*report.ap_large == 1.0);
  CHECK(!report.ap_medium.has_value());  // no medium GT anywhere
  CHECK(*report.ar_small == 1.0);
  CHECK(!report.ar_medium.has_value());

  SUBCASE("empty ground truth leaves everything absent") {
    const EvalReport empty = coco_summary(dets, {});
    CHECK(!empty.ap.has_value());
    CHECK(!empty.ar100.has_value());
    CHECK(report_key_values(empty, true).find("AP absent") !=
          std::string::npos);
  }
}

TEST_CASE("AR budgets are monotone and per image-category") {
  // two objects, two hits: budget 1 only rescues the higher-scored one
  std::vector<GroundTruthBox> gts = {
      gt("i", 0, 0, 50, 50, "a"),
      gt("i", 100, 0, 150, 50, "a"),
  };
  std::vector<Detection> dets = {
      det("i", 0, 0, 50, 50, 0.9, "a"),
      det("i", 100, 0, 150, 50, 0.8, "a"),
  };
  const EvalReport report = coco_summary(dets, gts);
  CHECK(*report.ar1 == 0.5);
  CHECK(*report.ar10 == 1.0);
  CHECK(*report.ar100 == 1.0);
}

TEST_CASE("coco_summary AP matches the assignment-enumeration oracle") {
  Rng rng(1789);
  int nonempty = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const testgen::TinyInstance inst = testgen::tiny_eval_instance(rng);
    const EvalReport report = coco_summary(inst.dets, inst.gts);
    const auto expected = oracle::enumerate_coco_ap(inst.dets, inst.gts);
    REQUIRE(report.ap.has_value() == expected.has_value());
    if (report.ap) {
      ++nonempty;
      CHECK(std::abs(*report.ap - *expected) < 1e-9);
      CHECK(*report.ar1 <= *report.ar10 + 1e-12);
      CHECK(*report.ar10 <= *report.ar100 + 1e-12);
    }
  }
  CHECK(nonempty > 50);  // the generator produces real work
}

TEST_CASE("coco_summary is invariant to input permutations") {
  Rng rng(33);
  const testgen::TinyInstance inst = testgen::tiny_eval_instance(rng);
  std::vector<Detection> shuffled = inst.dets;
  std::reverse(shuffled.begin(), shuffled.end());
  // distinct scores: order cannot matter at all
  for (std::size_t i = 0; i < shuffled.size(); ++i) {
    shuffled[i].score += 1e-6 * static_cast<double>(i);
  }
  std::vector<Detection> original = inst.dets;
  std::size_t j = shuffled.size();
  for (auto& d : original) d.score += 1e-6 * static_cast<double>(--j);

  const EvalReport a = coco_summary(original, inst.gts);
  const EvalReport b = coco_summary(shuffled, inst.gts);
  CHECK(a.ap.has_value() == b.ap.has_value());
  if (a.ap) CHECK(*a.ap == doctest::Approx(*b.ap).epsilon(1e-12));
}

TEST_CASE("voc_summary per-category AP and the interpolation flag") {
  std::vector<GroundTruthBox> gts = {
      gt("i", 0, 0, 10, 10, "cat"),
      gt("i", 50, 50, 70, 70, "cat"),
      gt("j", 0, 0, 30, 30, "dog"),
  };
  std::vector<Detection> dets = {
      det("i", 0, 0, 10, 10, 0.9, "cat"),   // TP
      det("i", 200, 200, 210, 210, 0.8, "cat"),  // FP
      det("j", 0, 0, 30, 30, 0.7, "dog"),    // TP
  };
  const EvalReport all_point =
      voc_summary(dets, gts, 0.5, Interpolation::kAllPoint);
  REQUIRE(all_point.categories.size() == 2);
  CHECK(*all_point.per_category_ap[0][0] == 0.5);  // cat: TP then FP, 2 GT
  CHECK(*all_point.per_category_ap[1][0] == 1.0);  // dog
  CHECK(*all_point.map == doctest::Approx(0.75));

  const EvalReport eleven =
      voc_summary(dets, gts, 0.5, Interpolation::kElevenPoint);
  CHECK(*eleven.per_category_ap[0][0] == doctest::Approx(6.0 / 11.0));

  const std::string kv = report_key_values(all_point, false);
  CHECK(kv.find("mAP 75.0") != std::string::npos);
  CHECK(kv.find("AP-cat 50.0") != std::string::npos);
  CHECK(kv.find("AP-dog 100.0") != std::string::npos);
}
