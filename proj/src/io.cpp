// Copyright (C) 2026 RegionKit Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "regionkit/io.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "regionkit/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "feature map payloads are little-endian");

namespace regionkit {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) fields.push_back(tok);
  return fields;
}

double parse_double(const std::string& tok, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw InvalidInputError("line " + std::to_string(line_no + 1) +
                            ": bad number '" + tok + "'");
  }
  return v;
}

long long parse_int(const std::string& tok, std::size_t line_no) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw InvalidInputError("line " + std::to_string(line_no + 1) +
                            ": bad integer '" + tok + "'");
  }
  return v;
}

Boxd parse_box(const std::vector<std::string>& f, std::size_t line_no) {
  return Boxd(parse_double(f[1], line_no), parse_double(f[2], line_no),
              parse_double(f[3], line_no), parse_double(f[4], line_no));
}

template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) fn(line, line_no);
    ++line_no;
  }
}

std::ifstream open_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open " + path);
  return in;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw InvalidInputError("unformattable number");
  return std::string(buf, ptr);
}

std::vector<ImageProposals> read_proposals(std::istream& in) {
  std::vector<ImageProposals> images;
  std::map<std::string, std::size_t> slot;
  for_each_line(in, [&](const std::string& line, std::size_t line_no) {
    const auto f = split_fields(line);
    if (f.size() != 6) {
      throw InvalidInputError("line " + std::to_string(line_no + 1) +
                              ": proposal records have 6 fields");
    }
    auto [it, inserted] = slot.try_emplace(f[0], images.size());
    if (inserted) images.push_back({f[0], {}});
    ScoredProposal p;
    p.box = parse_box(f, line_no);
    p.score = parse_double(f[5], line_no);
    if (!std::isfinite(p.score)) {
      throw InvalidInputError("line " + std::to_string(line_no + 1) +
                              ": non-finite score");
    }
    p.source_index = static_cast<std::int64_t>(line_no);
    images[it->second].proposals.push_back(p);
  });
  return images;
}

std::vector<ImageProposals> read_proposals_file(const std::string& path) {
  auto in = open_file(path);
  return read_proposals(in);
}

void write_proposals(std::ostream& out,
                     const std::vector<ImageProposals>& images) {
  for (const auto& image : images) {
    for (const auto& p : image.proposals) {
      out << image.image_id << ' ' << format_number(p.box.x1) << ' '
          << format_number(p.box.y1) << ' ' << format_number(p.box.x2) << ' '
          << format_number(p.box.y2) << ' ' << format_number(p.score) << '\n';
    }
  }
}

std::vector<Detection> read_detections(std::istream& in) {
  std::vector<Detection> dets;
  for_each_line(in, [&](const std::string& line, std::size_t line_no) {
    const auto f = split_fields(line);
    if (f.size() != 7) {
      throw InvalidInputError("line " + std::to_string(line_no + 1) +
                              ": detection records have 7 fields");
    }
    Detection d;
    d.image_id = f[0];
    d.box = parse_box(f, line_no);
    d.score = parse_double(f[5], line_no);
    if (!std::isfinite(d.score)) {
      throw InvalidInputError("line " + std::to_string(line_no + 1) +
                              ": non-finite score");
    }
    d.category = f[6];
    dets.push_back(std::move(d));
  });
  return dets;
}

std::vector<Detection> read_detections_file(const std::string& path) {
  auto in = open_file(path);
  return read_detections(in);
}

void write_detections(std::ostream& out, const std::vector<Detection>& dets) {
  for (const auto& d : dets) {
    out << d.image_id << ' ' << format_number(d.box.x1) << ' '
        << format_number(d.box.y1) << ' ' << format_number(d.box.x2) << ' '
        << format_number(d.box.y2) << ' ' << format_number(d.score) << ' '
        << d.category << '\n';
  }
}

std::vector<GroundTruthBox> read_ground_truth(std::istream& in) {
  std::vector<GroundTruthBox> gts;
  for_each_line(in, [&](const std::string& line, std::size_t line_no) {
    const auto f = split_fields(line);
    if (f.size() != 7) {
      throw InvalidInputError("line " + std::to_string(line_no + 1) +
                              ": ground-truth records have 7 fields");
    }
    GroundTruthBox gt;
    gt.image_id = f[0];
    gt.box = parse_box(f, line_no);
    gt.category = f[5];
    if (f[6] == "0") {
      gt.difficult = false;
    } else if (f[6] == "1") {
      gt.difficult = true;
    } else {
      throw InvalidInputError("line " + std::to_string(line_no + 1) +
                              ": difficult flag must be 0 or 1");
    }
    gts.push_back(std::move(gt));
  });
  return gts;
}

std::vector<GroundTruthBox> read_ground_truth_file(const std::string& path) {
  auto in = open_file(path);
  return read_ground_truth(in);
}

void write_ground_truth(std::ostream& out,
                        const std::vector<GroundTruthBox>& gts) {
  for (const auto& gt : gts) {
    out << gt.image_id << ' ' << format_number(gt.box.x1) << ' '
        << format_number(gt.box.y1) << ' ' << format_number(gt.box.x2) << ' '
        << format_number(gt.box.y2) << ' ' << gt.category << ' '
        << (gt.difficult ? '1' : '0') << '\n';
  }
}

RatioTable read_ratio_table(std::istream& in) {
  RatioTable table;
  for_each_line(in, [&](const std::string& line, std::size_t line_no) {
    const auto f = split_fields(line);
    if (f.size() != 2) {
      throw InvalidInputError("line " + std::to_string(line_no + 1) +
                              ": ratio table lines are 'scale value'");
    }
    table.scales.push_back(parse_double(f[0], line_no));
    table.ratios.push_back(parse_double(f[1], line_no));
  });
  if (table.scales.empty()) {
    throw InvalidInputError("ratio table is empty");
  }
  return table;
}

RatioTable read_ratio_table_file(const std::string& path) {
  auto in = open_file(path);
  return read_ratio_table(in);
}

void write_ratio_table(std::ostream& out, const std::vector<double>& scales,
                       const std::vector<double>& ratios) {
  if (scales.size() != ratios.size()) {
    throw InvalidInputError("ratio table: scales/ratios size mismatch");
  }
  for (std::size_t i = 0; i < scales.size(); ++i) {
    out << format_number(scales[i]) << ' ' << format_number(ratios[i]) << '\n';
  }
}

FeatureMapf read_feature_map(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) {
    throw InvalidInputError("feature map: missing header line");
  }
  const auto f = split_fields(header);
  if (f.size() != 3) {
    throw InvalidInputError("feature map header must be 'C H W'");
  }
  const long long c = parse_int(f[0], 0);
  const long long h = parse_int(f[1], 0);
  const long long w = parse_int(f[2], 0);
  if (c < 1 || h < 1 || w < 1) {
    throw InvalidInputError("feature map dimensions must be positive");
  }
  FeatureMapf fm(static_cast<int>(c), static_cast<int>(h),
                 static_cast<int>(w));
  in.read(reinterpret_cast<char*>(fm.data.data()),
          static_cast<std::streamsize>(fm.data.size() * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) !=
      fm.data.size() * sizeof(float)) {
    throw InvalidInputError("feature map payload truncated");
  }
  for (float v : fm.data) {
    if (!std::isfinite(v)) {
      throw InvalidInputError("feature map contains non-finite values");
    }
  }
  return fm;
}

FeatureMapf read_feature_map_file(const std::string& path) {
  auto in = open_file(path);
  return read_feature_map(in);
}

void write_feature_map(std::ostream& out, const FeatureMapf& fm) {
  out << fm.channels << ' ' << fm.height << ' ' << fm.width << '\n';
  out.write(reinterpret_cast<const char*>(fm.data.data()),
            static_cast<std::streamsize>(fm.data.size() * sizeof(float)));
}

void write_pooled_feature(std::ostream& out, const PooledFeaturef& pooled) {
  out << pooled.channels << ' ' << pooled.size << ' ' << pooled.size << '\n';
  out.write(reinterpret_cast<const char*>(pooled.data.data()),
            static_cast<std::streamsize>(pooled.data.size() * sizeof(float)));
}

KeyValues read_key_values(std::istream& in) {
  KeyValues entries;
  for_each_line(in, [&](const std::string& raw, std::size_t line_no) {
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    if (line.find_first_not_of(" \t") == std::string::npos) return;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfigError("line " + std::to_string(line_no + 1) +
                               ": expected key=value");
    }
    auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    entries.emplace_back(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
  });
  return entries;
}

double parse_number(const std::string& token) {
  double v = 0.0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw InvalidInputError("bad number '" + token + "'");
  }
  return v;
}

long long parse_integer(const std::string& token) {
  long long v = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw InvalidInputError("bad integer '" + token + "'");
  }
  return v;
}

std::vector<double> parse_number_list(const std::string& csv) {
  std::vector<double> out;
  std::string item;
  std::istringstream ss(csv);
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_number(item));
  }
  return out;
}

std::string join_number_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_number(values[i]);
  }
  return out;
}

SamplingConfig parse_sampling_config(std::istream& in,
                                     const SamplingConfig& base) {
  SamplingConfig cfg = base;
  for (const auto& [key, value] : read_key_values(in)) {
    if (key == "scheme") {
      cfg.scheme = scheme_from_name(value);
    } else if (key == "K") {
      cfg.K = static_cast<int>(parse_integer(value));
    } else if (key == "k") {
      cfg.k = static_cast<int>(parse_integer(value));
    } else if (key == "nms_threshold") {
      cfg.nms_threshold = parse_number(value);
    } else if (key == "R") {
      cfg.R = static_cast<int>(parse_integer(value));
    } else if (key == "N") {
      cfg.N = static_cast<int>(parse_integer(value));
    } else if (key == "pos_fraction") {
      cfg.pos_fraction = parse_number(value);
    } else if (key == "gamma") {
      cfg.gamma = parse_number(value);
    } else if (key == "ratio_table") {
      cfg.ratio_table = parse_number_list(value);
    } else if (key == "bg_iou_range") {
      const auto range = parse_number_list(value);
      if (range.size() != 2) {
        throw InvalidConfigError("bg_iou_range needs two values");
      }
      cfg.bg_iou_lo = range[0];
      cfg.bg_iou_hi = range[1];
    } else if (key == "fg_iou_min") {
      cfg.fg_iou_min = parse_number(value);
    } else if (key == "min_size") {
      cfg.min_size = parse_number(value);
    } else if (key == "exclude_gt") {
      cfg.exclude_gt = parse_integer(value) != 0;
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_integer(value));
    } else {
      throw InvalidConfigError("unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

SamplingConfig read_sampling_config_file(const std::string& path,
                                         const SamplingConfig& base) {
  auto in = open_file(path);
  return parse_sampling_config(in, base);
}

std::string dump_sampling_config(const SamplingConfig& cfg) {
  std::ostringstream out;
  out << "scheme=" << scheme_name(cfg.scheme) << "\n";
  out << "K=" << cfg.K << "\n";
  out << "k=" << cfg.k << "\n";
  out << "nms_threshold=" << format_number(cfg.nms_threshold) << "\n";
  out << "R=" << cfg.R << "\n";
  out << "N=" << cfg.N << "\n";
  out << "pos_fraction=" << format_number(cfg.pos_fraction) << "\n";
  out << "gamma=" << format_number(cfg.gamma) << "\n";
  out << "ratio_table=" << join_number_list(cfg.ratio_table) << "\n";
  out << "fg_iou_min=" << format_number(cfg.fg_iou_min) << "\n";
  out << "bg_iou_range=" << format_number(cfg.bg_iou_lo) << ","
      << format_number(cfg.bg_iou_hi) << "\n";
  out << "min_size=" << format_number(cfg.min_size) << "\n";
  out << "exclude_gt=" << (cfg.exclude_gt ? 1 : 0) << "\n";
  out << "seed=" << cfg.seed << "\n";
  return out.str();
}

}  // namespace regionkit
