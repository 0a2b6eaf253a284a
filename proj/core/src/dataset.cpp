#include "enose/dataset.hpp"

#include "enose/csv.hpp"
#include "enose/parallel.hpp"
#include "enose/rng.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace enose {

namespace {

using nlohmann::json;

std::runtime_error file_error(const std::filesystem::path& path, const std::string& what) {
  return std::runtime_error(path.string() + ": " + what);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw file_error(path, "cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

struct ManifestRow {
  std::string id;
  GasLabel label;
  double h2_ppm;
  double co_ppm;
  std::string path;
};

std::vector<ManifestRow> read_manifest(const std::filesystem::path& manifest_path) {
  const std::string text = read_text_file(manifest_path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw file_error(manifest_path, "empty dataset");
  const auto header = split_csv_line(lines[0]);
  const std::array<std::string_view, 5> expected = {"id", "label", "h2_ppm", "co_ppm", "path"};
  if (header.size() != expected.size() ||
      !std::equal(header.begin(), header.end(), expected.begin())) {
    throw file_error(manifest_path, "bad header (expected id,label,h2_ppm,co_ppm,path)");
  }
  if (lines.size() == 1) throw file_error(manifest_path, "empty dataset");
  std::vector<ManifestRow> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string context = manifest_path.string() + ":" + std::to_string(i + 1);
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != 5) {
      throw std::runtime_error(context + ": expected 5 fields, got " +
                               std::to_string(fields.size()));
    }
    ManifestRow row;
    row.id = std::string(fields[0]);
    row.label = parse_gas_label(fields[1]);
    row.h2_ppm = parse_double(fields[2], context);
    row.co_ppm = parse_double(fields[3], context);
    row.path = std::string(fields[4]);
    rows.push_back(std::move(row));
  }
  return rows;
}

Sample read_sample_file(const std::filesystem::path& path, const ManifestRow& row,
                        std::vector<std::string>& channel_names_out) {
  const std::string text = read_text_file(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw file_error(path, "empty sample file");
  const auto header = split_csv_line(lines[0]);
  if (header.size() < 2 || header[0] != "t") {
    throw file_error(path, "bad header (expected t,<channel>[,<channel>])");
  }
  const int channels = static_cast<int>(header.size()) - 1;
  if (channels > 2) throw file_error(path, "more than 2 channels");
  channel_names_out.assign(header.begin() + 1, header.end());

  const auto data_rows = static_cast<int>(lines.size()) - 1;
  if (data_rows != kSampleRows) {
    throw file_error(path, "expected " + std::to_string(kSampleRows) + " data rows, found " +
                               std::to_string(data_rows));
  }
  Sample s;
  s.id = row.id;
  s.label = row.label;
  s.h2_ppm = row.h2_ppm;
  s.co_ppm = row.co_ppm;
  s.dt = kSampleDt;
  s.readings.resize(kSampleRows, channels);
  for (int t = 0; t < kSampleRows; ++t) {
    const std::string context = path.string() + ":" + std::to_string(t + 2);
    const auto fields = split_csv_line(lines[static_cast<std::size_t>(t) + 1]);
    if (static_cast<int>(fields.size()) != channels + 1) {
      throw std::runtime_error(context + ": expected " + std::to_string(channels + 1) +
                               " fields, got " + std::to_string(fields.size()));
    }
    const double tv = parse_double(fields[0], context);
    if (std::abs(tv - t * kSampleDt) > 1e-9) {
      throw std::runtime_error(context + ": time column expected " +
                               format_double(t * kSampleDt) + ", found " +
                               std::string(fields[0]));
    }
    for (int c = 0; c < channels; ++c) {
      s.readings(t, c) = parse_double(fields[static_cast<std::size_t>(c) + 1], context);
    }
  }
  return s;
}

std::array<std::vector<int>, kNumClasses> indices_by_class(const Dataset& ds) {
  std::array<std::vector<int>, kNumClasses> by_class;
  for (int i = 0; i < ds.size(); ++i) {
    by_class[static_cast<std::size_t>(class_index(ds.samples[static_cast<std::size_t>(i)].label))]
        .push_back(i);
  }
  return by_class;
}

}  // namespace

void validate_dataset(const Dataset& ds) {
  if (ds.samples.empty()) throw std::runtime_error("empty dataset");
  const auto& first = ds.samples.front();
  std::set<std::string> ids;
  for (const auto& s : ds.samples) {
    if (!ids.insert(s.id).second) {
      throw std::runtime_error("duplicate sample id '" + s.id + "'");
    }
    if (s.readings.rows() != first.readings.rows() || s.readings.cols() != first.readings.cols()) {
      throw std::runtime_error("sample '" + s.id + "' shape differs from first sample");
    }
    if (s.readings.cols() != ds.channels()) {
      throw std::runtime_error("sample '" + s.id + "' channel count does not match dataset");
    }
    if (s.dt != first.dt) throw std::runtime_error("sample '" + s.id + "' dt differs");
    if (!s.readings.allFinite()) {
      throw std::runtime_error("sample '" + s.id + "' contains non-finite readings");
    }
    if ((s.h2_ppm == 0.0) != (s.label == GasLabel::CO)) {
      throw std::runtime_error("sample '" + s.id + "': h2_ppm must be 0 iff label is CO");
    }
    if ((s.co_ppm == 0.0) != (s.label == GasLabel::H2)) {
      throw std::runtime_error("sample '" + s.id + "': co_ppm must be 0 iff label is H2");
    }
  }
}

Dataset load_dataset(const std::filesystem::path& root) {
  const auto manifest_path = root / "manifest.csv";
  const auto rows = read_manifest(manifest_path);

  Dataset ds;
  ds.samples.resize(rows.size());
  std::vector<std::vector<std::string>> channel_names(rows.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    ds.samples[i] = read_sample_file(root / rows[i].path, rows[i], channel_names[i]);
  });

  ds.channel_names = channel_names.front();
  for (std::size_t i = 1; i < channel_names.size(); ++i) {
    if (channel_names[i] != ds.channel_names) {
      throw std::runtime_error("sample '" + rows[i].id +
                               "' channel header differs from first sample");
    }
  }
  validate_dataset(ds);
  return ds;
}

SplitPlan stratified_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must be in (0,1)");
  }
  const auto by_class = indices_by_class(ds);
  SplitPlan plan;
  plan.seed = seed;
  std::vector<bool> in_test(static_cast<std::size_t>(ds.size()), false);
  for (int c = 0; c < kNumClasses; ++c) {
    auto ids = by_class[static_cast<std::size_t>(c)];
    if (ids.empty()) continue;
    if (ids.size() < 2) {
      throw std::runtime_error(std::string("class ") + to_string(label_from_index(c)) +
                               " has fewer than 2 samples");
    }
    // round-half-up; remainder stays in trainval
    const auto n_test =
        static_cast<std::size_t>(std::floor(static_cast<double>(ids.size()) * test_fraction + 0.5));
    if (n_test == 0) {
      throw std::runtime_error(std::string("class ") + to_string(label_from_index(c)) +
                               " too small for a nonempty test share");
    }
    Rng rng = derive_rng(seed, rng_tag::kSplit, static_cast<std::uint64_t>(c));
    rng.shuffle(ids);
    for (std::size_t i = 0; i < n_test; ++i) in_test[static_cast<std::size_t>(ids[i])] = true;
  }
  for (int i = 0; i < ds.size(); ++i) {
    auto& dst = in_test[static_cast<std::size_t>(i)] ? plan.test_ids : plan.trainval_ids;
    dst.push_back(ds.samples[static_cast<std::size_t>(i)].id);
  }
  return plan;
}

FoldPlan make_folds(const SplitPlan& split, const Dataset& ds, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("fold count must be >= 2");
  std::map<std::string, int> index_of;
  for (int i = 0; i < ds.size(); ++i) index_of[ds.samples[static_cast<std::size_t>(i)].id] = i;

  std::array<std::vector<int>, kNumClasses> by_class;
  for (const auto& id : split.trainval_ids) {
    const auto it = index_of.find(id);
    if (it == index_of.end()) throw std::runtime_error("split id '" + id + "' not in dataset");
    const auto& s = ds.samples[static_cast<std::size_t>(it->second)];
    by_class[static_cast<std::size_t>(class_index(s.label))].push_back(it->second);
  }

  std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
  for (int c = 0; c < kNumClasses; ++c) {
    auto ids = by_class[static_cast<std::size_t>(c)];
    if (ids.empty()) continue;
    if (static_cast<int>(ids.size()) < k) {
      throw std::runtime_error(std::string("class ") + to_string(label_from_index(c)) + " has " +
                               std::to_string(ids.size()) + " trainval samples, fewer than k=" +
                               std::to_string(k));
    }
    Rng rng = derive_rng(seed, rng_tag::kFolds, static_cast<std::uint64_t>(c));
    rng.shuffle(ids);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      folds[i % static_cast<std::size_t>(k)].push_back(ids[i]);
    }
  }

  FoldPlan plan;
  plan.seed = seed;
  plan.folds.resize(static_cast<std::size_t>(k));
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::sort(folds[f].begin(), folds[f].end());  // manifest order within a fold
    for (int idx : folds[f]) {
      plan.folds[f].push_back(ds.samples[static_cast<std::size_t>(idx)].id);
    }
  }
  return plan;
}

Dataset select_channels(const Dataset& ds, const std::vector<std::string>& names) {
  std::vector<int> cols;
  for (const auto& name : names) {
    const auto it = std::find(ds.channel_names.begin(), ds.channel_names.end(), name);
    if (it == ds.channel_names.end()) {
      std::string available;
      for (const auto& n : ds.channel_names) {
        if (!available.empty()) available += ", ";
        available += n;
      }
      throw std::runtime_error("unknown channel '" + name + "' (available: " + available + ")");
    }
    cols.push_back(static_cast<int>(it - ds.channel_names.begin()));
  }
  Dataset out;
  out.channel_names = names;
  out.samples.reserve(ds.samples.size());
  for (const auto& s : ds.samples) {
    Sample copy = s;
    copy.readings.resize(s.readings.rows(), static_cast<int>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      copy.readings.col(static_cast<int>(j)) = s.readings.col(cols[j]);
    }
    out.samples.push_back(std::move(copy));
  }
  return out;
}

void write_split_json(const std::filesystem::path& path, const SplitPlan& split,
                      const FoldPlan& folds) {
  json doc;
  doc["schema_version"] = 1;
  doc["split_seed"] = split.seed;
  doc["trainval_ids"] = split.trainval_ids;
  doc["test_ids"] = split.test_ids;
  doc["fold_seed"] = folds.seed;
  doc["folds"] = folds.folds;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw file_error(path, "cannot open for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw file_error(path, "write failed");
}

std::pair<SplitPlan, FoldPlan> read_split_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw file_error(path, "cannot open (run train first to create split.json)");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw file_error(path, std::string("parse error: ") + e.what());
  }
  try {
    SplitPlan split;
    split.seed = doc.at("split_seed").get<std::uint64_t>();
    split.trainval_ids = doc.at("trainval_ids").get<std::vector<std::string>>();
    split.test_ids = doc.at("test_ids").get<std::vector<std::string>>();
    FoldPlan folds;
    folds.seed = doc.at("fold_seed").get<std::uint64_t>();
    folds.folds = doc.at("folds").get<std::vector<std::vector<std::string>>>();
    return {std::move(split), std::move(folds)};
  } catch (const json::exception& e) {
    throw file_error(path, std::string("bad split.json: ") + e.what());
  }
}

}  // namespace enose
