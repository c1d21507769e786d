// Copyright (C) 2026 RegionKit Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "regionkit/anchors.hpp"
#include "regionkit/eval.hpp"
#include "regionkit/pooling.hpp"
#include "regionkit/sampling.hpp"

namespace regionkit {

// Line-delimited record formats, one object per line, space-separated,
// UTF-8 with LF line endings:
//   proposals:  image_id x1 y1 x2 y2 score
//   detections: image_id x1 y1 x2 y2 score category
//   ground truth: image_id x1 y1 x2 y2 category difficult(0|1)
// Numbers round-trip exactly (shortest representation that parses back
// to the same value).

struct ImageProposals {
  std::string image_id;
  std::vector<ScoredProposal> proposals;
};

/// Proposals grouped by image in first-appearance order; source_index
/// is the line number within the file (0-based), so it is unique within
/// each image set.
std::vector<ImageProposals> read_proposals(std::istream& in);
std::vector<ImageProposals> read_proposals_file(const std::string& path);
void write_proposals(std::ostream& out,
                     const std::vector<ImageProposals>& images);

std::vector<Detection> read_detections(std::istream& in);
std::vector<Detection> read_detections_file(const std::string& path);
void write_detections(std::ostream& out, const std::vector<Detection>& dets);

std::vector<GroundTruthBox> read_ground_truth(std::istream& in);
std::vector<GroundTruthBox> read_ground_truth_file(const std::string& path);
void write_ground_truth(std::ostream& out,
                        const std::vector<GroundTruthBox>& gts);

// Ratio tables: one line per bucket, "scale value", values nonnegative.
struct RatioTable {
  std::vector<double> scales;
  std::vector<double> ratios;
};

RatioTable read_ratio_table(std::istream& in);
RatioTable read_ratio_table_file(const std::string& path);
void write_ratio_table(std::ostream& out, const std::vector<double>& scales,
                       const std::vector<double>& ratios);

// Feature maps: one text header line "C H W" followed by C*H*W
// little-endian 32-bit floats in channel-major order.
FeatureMapf read_feature_map(std::istream& in);
FeatureMapf read_feature_map_file(const std::string& path);
void write_feature_map(std::ostream& out, const FeatureMapf& fm);
void write_pooled_feature(std::ostream& out, const PooledFeaturef& pooled);

// Sampling configs: flat key=value text, keys matching the
// SamplingConfig field names; '#' starts a comment. Fields absent from
// the file keep the given base values, so a file can patch the stock
// defaults for a scheme.
SamplingConfig parse_sampling_config(std::istream& in,
                                     const SamplingConfig& base);
SamplingConfig read_sampling_config_file(const std::string& path,
                                         const SamplingConfig& base);

/// Canonical serialization of a config, one field per line. Inverse of
/// parse_sampling_config for every field.
std::string dump_sampling_config(const SamplingConfig& cfg);

/// Shortest round-trip decimal representation (used by every writer so
/// outputs are byte-reproducible).
std::string format_number(double value);

// key=value parsing shared by the config-style file formats.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
KeyValues read_key_values(std::istream& in);
double parse_number(const std::string& token);
long long parse_integer(const std::string& token);
std::vector<double> parse_number_list(const std::string& csv);
std::string join_number_list(const std::vector<double>& values);

}  // namespace regionkit
