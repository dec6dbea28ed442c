// Copyright 2026 The cclbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ccl/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ccl {
namespace {

// Stream id reserved for split shuffles, independent of the caller's seed use.
constexpr std::uint64_t kSplitStream = 0x5711;

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> SplitCommas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(Trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

[[noreturn]] void CsvError(const std::filesystem::path& path, std::size_t row,
                           const std::string& what) {
  std::ostringstream msg;
  msg << path.string() << ": row " << row << ": " << what;
  throw std::runtime_error(msg.str());
}

}  // namespace

void Dataset::Validate(std::size_t min_rows) const {
  if (labels.size() != features.rows()) {
    throw std::invalid_argument("Dataset: label count does not match feature rows");
  }
  if (labels.size() < min_rows) {
    throw std::invalid_argument("Dataset: need at least " + std::to_string(min_rows) + " rows");
  }
  if (num_classes < 1) throw std::invalid_argument("Dataset: no classes");
  for (std::size_t y : labels) {
    if (y >= num_classes) throw std::invalid_argument("Dataset: label out of range");
  }
  RequireFinite(features.data(), "Dataset features");
}

Dataset Dataset::Subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.features = Mat(indices.size(), dim());
  out.labels.reserve(indices.size());
  out.num_classes = num_classes;
  out.name = name;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = features.row(indices[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.labels.push_back(labels.at(indices[i]));
  }
  return out;
}

Dataset SynthBlobs(std::size_t num_classes, std::size_t dim, std::size_t per_class,
                   double spread, std::uint64_t seed) {
  if (num_classes < 2) throw std::invalid_argument("SynthBlobs: need K >= 2");
  if (dim < 1) throw std::invalid_argument("SynthBlobs: need d >= 1");
  if (per_class < 1 || num_classes * per_class < 4) {
    throw std::invalid_argument("SynthBlobs: need at least 4 samples");
  }
  if (!(spread >= 0.0) || !std::isfinite(spread)) {
    throw std::invalid_argument("SynthBlobs: spread must be >= 0");
  }
  RngStream rng(seed, 1);
  Mat centres(num_classes, dim);
  for (double& c : centres.data()) c = rng.Normal();

  Dataset ds;
  ds.name = "blobs";
  ds.num_classes = num_classes;
  ds.features = Mat(num_classes * per_class, dim);
  ds.labels.reserve(num_classes * per_class);
  std::size_t row = 0;
  for (std::size_t k = 0; k < num_classes; ++k) {
    for (std::size_t n = 0; n < per_class; ++n, ++row) {
      for (std::size_t j = 0; j < dim; ++j) {
        ds.features(row, j) = centres(k, j) + spread * rng.Normal();
      }
      ds.labels.push_back(k);
    }
  }
  return ds;
}

Dataset SynthBinaryRecords(std::size_t num_classes, std::size_t dim,
                           std::size_t per_class, double flip_prob,
                           std::uint64_t seed) {
  if (num_classes < 2) throw std::invalid_argument("SynthBinaryRecords: need K >= 2");
  if (dim < 1) throw std::invalid_argument("SynthBinaryRecords: need d >= 1");
  if (per_class < 1 || num_classes * per_class < 4) {
    throw std::invalid_argument("SynthBinaryRecords: need at least 4 samples");
  }
  if (!(flip_prob >= 0.0 && flip_prob <= 0.5)) {
    throw std::invalid_argument("SynthBinaryRecords: flip_prob must lie in [0, 0.5]");
  }
  RngStream rng(seed, 1);
  Mat templates(num_classes, dim);
  for (double& t : templates.data()) t = rng.Bernoulli(0.5) ? 1.0 : 0.0;

  Dataset ds;
  ds.name = "binary_records";
  ds.num_classes = num_classes;
  ds.features = Mat(num_classes * per_class, dim);
  ds.labels.reserve(num_classes * per_class);
  std::size_t row = 0;
  for (std::size_t k = 0; k < num_classes; ++k) {
    for (std::size_t n = 0; n < per_class; ++n, ++row) {
      for (std::size_t j = 0; j < dim; ++j) {
        const bool flip = rng.Bernoulli(flip_prob);
        ds.features(row, j) = flip ? 1.0 - templates(k, j) : templates(k, j);
      }
      ds.labels.push_back(k);
    }
  }
  return ds;
}

Dataset LoadCsv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open file");

  std::vector<double> values;
  std::vector<std::size_t> labels;
  std::size_t dim = 0;
  std::size_t row = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++row;
    if (row == 1 && has_header) continue;
    if (row == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line.erase(0, 3);
    }
    if (Trim(line).empty()) continue;
    const auto cells = SplitCommas(line);
    if (cells.size() < 2) CsvError(path, row, "need at least one feature and a label");
    if (dim == 0) {
      dim = cells.size() - 1;
    } else if (cells.size() - 1 != dim) {
      CsvError(path, row, "expected " + std::to_string(dim + 1) + " columns, found " +
                              std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const std::string& cell = cells[j];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() ||
          !std::isfinite(v)) {
        CsvError(path, row, "non-numeric feature '" + cell + "' in column " +
                                std::to_string(j + 1));
      }
      values.push_back(v);
    }
    const std::string& label_cell = cells.back();
    long long label = 0;
    const auto [ptr, ec] =
        std::from_chars(label_cell.data(), label_cell.data() + label_cell.size(), label);
    if (ec != std::errc() || ptr != label_cell.data() + label_cell.size() ||
        label_cell.empty()) {
      CsvError(path, row, "label '" + label_cell + "' is not an integer");
    }
    if (label < 0) CsvError(path, row, "negative label " + label_cell);
    labels.push_back(static_cast<std::size_t>(label));
  }

  Dataset ds;
  ds.name = path.stem().string();
  ds.num_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  ds.features = Mat(labels.size(), dim, std::move(values));
  ds.labels = std::move(labels);
  if (ds.labels.empty()) throw std::runtime_error(path.string() + ": no data rows");
  ds.Validate(1);
  return ds;
}

void WriteCsv(const Dataset& ds, const std::filesystem::path& path, bool with_header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  if (with_header) {
    for (std::size_t j = 0; j < ds.dim(); ++j) out << "x" << j << ",";
    out << "label\n";
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.features.row(i)) out << v << ",";
    out << ds.labels[i] << "\n";
  }
}

SplitPlan Split4(std::size_t n, std::uint64_t seed) {
  if (n < 4) throw std::invalid_argument("Split4: need at least 4 samples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream rng(seed, kSplitStream);
  rng.Shuffle(std::span<std::size_t>(order));

  SplitPlan plan;
  plan.seed = seed;
  std::size_t offset = 0;
  for (std::size_t part = 0; part < 4; ++part) {
    const std::size_t size = n / 4 + (part < n % 4 ? 1 : 0);
    plan.parts[part].assign(order.begin() + offset, order.begin() + offset + size);
    offset += size;
  }
  return plan;
}

SplitPlan Split4(const Dataset& ds, std::uint64_t seed, bool stratify) {
  if (!stratify) return Split4(ds.size(), seed);
  if (ds.size() < 4) throw std::invalid_argument("Split4: need at least 4 samples");
  RngStream rng(seed, kSplitStream);
  std::vector<std::size_t> dealt;
  dealt.reserve(ds.size());
  for (std::size_t k = 0; k < ds.num_classes; ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.labels[i] == k) members.push_back(i);
    }
    rng.Shuffle(std::span<std::size_t>(members));
    dealt.insert(dealt.end(), members.begin(), members.end());
  }
  SplitPlan plan;
  plan.seed = seed;
  for (std::size_t i = 0; i < dealt.size(); ++i) plan.parts[i % 4].push_back(dealt[i]);
  return plan;
}

}  // namespace ccl
