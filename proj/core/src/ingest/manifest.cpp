// Copyright 2026 The mammodp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mammodp/ingest/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "mammodp/common/files.hpp"
#include "mammodp/common/rng.hpp"
#include "mammodp/ingest/geometry.hpp"

namespace mammodp::ingest {
namespace {

const std::vector<std::string> kManifestColumns = {"patient_id", "image_id", "view",  "x_min", "y_min",
                                                   "x_max",      "y_max",    "label", "source", "split"};

int ParseInt(std::string_view s, const std::string& what) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw IoError("invalid integer for " + what + ": '" + std::string(s) + "'");
  return v;
}

std::vector<std::string> Lines(std::string_view text) {
  std::vector<std::string> lines;
  std::string current;
  bool quoted = false;
  for (char c : text) {
    if (c == '"') quoted = !quoted;
    if (c == '\n' && !quoted) {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      if (!current.empty()) lines.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty() && current.back() == '\r') current.pop_back();
  if (!current.empty()) lines.push_back(std::move(current));
  return lines;
}

std::map<std::string, std::size_t> HeaderIndex(const std::vector<std::string>& header) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;
  return index;
}

std::vector<Point> ParseContour(std::string_view s) {
  std::vector<Point> points;
  std::stringstream ss{std::string(s)};
  std::string pair;
  while (std::getline(ss, pair, ';')) {
    std::stringstream ps(pair);
    double x = 0, y = 0;
    if (!(ps >> x >> y)) throw IoError("malformed contour point '" + pair + "'");
    points.push_back({static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))});
  }
  return points;
}

}  // namespace

std::vector<std::size_t> DatasetManifest::Indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (splits[i] == split) out.push_back(i);
  }
  return out;
}

DatasetManifest SplitPerPatient(std::vector<LesionRecord> records, double val_fraction, std::uint64_t seed) {
  if (records.empty()) throw EmptyInputError("cannot split an empty record list");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ContractViolation("val_fraction must lie in (0, 1)");
  std::set<std::string> test_patients, pool_patients;
  for (const auto& r : records) {
    (r.predefined_split == Split::kTest ? test_patients : pool_patients).insert(r.patient_id);
  }
  for (const auto& p : test_patients) {
    if (pool_patients.count(p)) throw ContractViolation("patient '" + p + "' appears in both test and train pools");
  }
  std::vector<std::string> pool(pool_patients.begin(), pool_patients.end());
  Rng rng = MakeRng(seed, {0x5B117ULL});
  std::shuffle(pool.begin(), pool.end(), rng);
  const auto n = static_cast<long>(pool.size());
  long n_val = std::lround(val_fraction * static_cast<double>(n));
  n_val = n >= 2 ? std::clamp(n_val, 1L, n - 1) : 0L;
  const std::set<std::string> val_patients(pool.begin(), pool.begin() + n_val);

  DatasetManifest manifest;
  manifest.seed = seed;
  manifest.splits.reserve(records.size());
  for (const auto& r : records) {
    if (r.predefined_split == Split::kTest) {
      manifest.splits.push_back(Split::kTest);
    } else {
      manifest.splits.push_back(val_patients.count(r.patient_id) ? Split::kVal : Split::kTrain);
    }
  }
  manifest.records = std::move(records);
  return manifest;
}

void CheckPatientDisjoint(const DatasetManifest& manifest) {
  std::map<std::string, Split> seen;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& pid = manifest.records[i].patient_id;
    if (pid.empty()) continue;
    auto [it, inserted] = seen.emplace(pid, manifest.splits[i]);
    if (!inserted && it->second != manifest.splits[i]) {
      throw ContractViolation("patient '" + pid + "' is assigned to more than one split");
    }
  }
}

std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  return fields;
}

std::string CsvEscape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string ManifestToCsv(const DatasetManifest& manifest) {
  std::ostringstream out;
  for (std::size_t i = 0; i < kManifestColumns.size(); ++i) out << (i ? "," : "") << kManifestColumns[i];
  out << '\n';
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& r = manifest.records[i];
    const BoundingBox box = RecordBox(r);
    out << CsvEscape(r.patient_id) << ',' << CsvEscape(r.image_id) << ',' << ToString(r.view) << ',' << box.x_min
        << ',' << box.y_min << ',' << box.x_max << ',' << box.y_max << ',' << ToString(r.label) << ','
        << ToString(r.source) << ',' << ToString(manifest.splits[i]) << '\n';
  }
  return out.str();
}

DatasetManifest ManifestFromCsv(std::string_view text) {
  const auto lines = Lines(text);
  if (lines.empty()) throw IoError("manifest is empty (header row is mandatory)");
  const auto header = SplitCsvLine(lines[0]);
  auto index = HeaderIndex(header);
  for (const auto& col : kManifestColumns) {
    if (!index.count(col)) throw IoError("manifest is missing column '" + col + "'");
  }
  DatasetManifest manifest;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto f = SplitCsvLine(lines[l]);
    if (f.size() != header.size()) throw IoError("manifest row " + std::to_string(l + 1) + " has the wrong width");
    auto get = [&](const char* col) -> const std::string& { return f[index.at(col)]; };
    try {
      LesionRecord r;
      r.patient_id = get("patient_id");
      r.image_id = get("image_id");
      r.view = ParseView(get("view"));
      r.box = BoundingBox{ParseInt(get("x_min"), "x_min"), ParseInt(get("y_min"), "y_min"),
                          ParseInt(get("x_max"), "x_max"), ParseInt(get("y_max"), "y_max")};
      r.label = ParseLabel(get("label"));
      r.source = ParseSource(get("source"));
      const Split split = ParseSplit(get("split"));
      if (split == Split::kTest) r.predefined_split = Split::kTest;
      manifest.records.push_back(std::move(r));
      manifest.splits.push_back(split);
    } catch (const ContractViolation& e) {
      throw IoError("manifest row " + std::to_string(l + 1) + ": " + e.what());
    }
  }
  return manifest;
}

void WriteManifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  WriteFileAtomic(path, ManifestToCsv(manifest));
}

DatasetManifest ReadManifest(const std::filesystem::path& path) { return ManifestFromCsv(ReadFile(path)); }

std::string PatchFileName(const LesionRecord& record) {
  const BoundingBox box = RecordBox(record);
  return record.image_id + "_" + std::to_string(box.x_min) + "_" + std::to_string(box.y_min) + ".png";
}

std::vector<LesionRecord> ReadAnnotations(const std::filesystem::path& path) {
  const auto lines = Lines(ReadFile(path));
  if (lines.empty()) throw IoError("annotation file is empty: " + path.string());
  const auto header = SplitCsvLine(lines[0]);
  auto index = HeaderIndex(header);
  for (const char* col : {"patient_id", "image_id", "view", "label", "source"}) {
    if (!index.count(col)) throw IoError(std::string("annotations are missing column '") + col + "'");
  }
  const bool has_contour = index.count("contour") > 0;
  const bool has_box = index.count("x_min") && index.count("y_min") && index.count("x_max") && index.count("y_max");
  if (!has_contour && !has_box) throw IoError("annotations need a contour column or x_min/y_min/x_max/y_max");
  std::vector<LesionRecord> records;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto f = SplitCsvLine(lines[l]);
    if (f.size() != header.size()) throw IoError("annotation row " + std::to_string(l + 1) + " has the wrong width");
    auto get = [&](const char* col) -> const std::string& { return f[index.at(col)]; };
    try {
      LesionRecord r;
      r.patient_id = get("patient_id");
      r.image_id = get("image_id");
      r.view = ParseView(get("view"));
      r.label = ParseLabel(get("label"));
      r.source = ParseSource(get("source"));
      if (index.count("split") && !get("split").empty()) {
        if (ParseSplit(get("split")) == Split::kTest) r.predefined_split = Split::kTest;
      }
      if (has_contour && !get("contour").empty()) {
        r.contour = ParseContour(get("contour"));
      } else if (has_box) {
        r.box = BoundingBox{ParseInt(get("x_min"), "x_min"), ParseInt(get("y_min"), "y_min"),
                            ParseInt(get("x_max"), "x_max"), ParseInt(get("y_max"), "y_max")};
      } else {
        throw IoError("row has neither contour nor box");
      }
      records.push_back(std::move(r));
    } catch (const Error& e) {
      throw IoError("annotation row " + std::to_string(l + 1) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace mammodp::ingest
