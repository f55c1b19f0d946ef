// Copyright 2026 The TCT Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tct/data.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "tct/digest.hpp"

namespace tct {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

bool parse_number(const std::string& s, double* out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, *out);
  return ec == std::errc() && ptr == end;
}

// Canonical text of a double for hashing: shortest form that round-trips.
std::string canonical_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Dataset Dataset::from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("dataset: empty input, header row required");
  }
  Dataset ds(split_csv_line(line));
  if (ds.columns_.empty()) {
    throw std::invalid_argument("dataset: header row has no columns");
  }

  std::vector<std::vector<std::string>> raw;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != ds.columns_.size()) {
      throw std::invalid_argument("dataset: row " +
                                  std::to_string(raw.size() + 1) + " has " +
                                  std::to_string(fields.size()) +
                                  " fields, expected " +
                                  std::to_string(ds.columns_.size()));
    }
    raw.push_back(std::move(fields));
  }

  // Type inference per column: numeric iff all values parse.
  std::vector<bool> numeric_col(ds.columns_.size(), true);
  for (const auto& row : raw) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      double dummy;
      if (numeric_col[c] && !parse_number(row[c], &dummy)) {
        numeric_col[c] = false;
      }
    }
  }
  for (const auto& row : raw) {
    std::vector<CellValue> cells;
    cells.reserve(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (numeric_col[c]) {
        double v = 0.0;
        parse_number(row[c], &v);
        cells.emplace_back(v);
      } else {
        cells.emplace_back(row[c]);
      }
    }
    ds.rows_.push_back(std::move(cells));
  }
  return ds;
}

Dataset Dataset::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("dataset: cannot open " + path);
  }
  return from_csv(in);
}

std::size_t Dataset::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i] == name) return i;
  }
  throw std::invalid_argument("dataset: unknown column '" + std::string(name) +
                              "'");
}

double Dataset::numeric(std::size_t row, std::size_t col) const {
  const CellValue& v = rows_.at(row).at(col);
  if (const double* d = std::get_if<double>(&v)) return *d;
  throw std::invalid_argument("dataset: column '" + columns_[col] +
                              "' is not numeric");
}

const std::string& Dataset::text(std::size_t row, std::size_t col) const {
  const CellValue& v = rows_.at(row).at(col);
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  throw std::invalid_argument("dataset: column '" + columns_[col] +
                              "' is not text");
}

void Dataset::add_row(std::vector<CellValue> row) {
  if (row.size() != columns_.size()) {
    throw std::invalid_argument("dataset: row width mismatch");
  }
  rows_.push_back(std::move(row));
}

Dataset Dataset::with_row_added(std::vector<CellValue> row) const {
  Dataset copy = *this;
  copy.add_row(std::move(row));
  return copy;
}

Dataset Dataset::with_row_removed(std::size_t row) const {
  if (row >= rows_.size()) {
    throw std::invalid_argument("dataset: row index out of range");
  }
  Dataset copy = *this;
  copy.rows_.erase(copy.rows_.begin() + static_cast<std::ptrdiff_t>(row));
  return copy;
}

std::uint64_t Dataset::row_content_hash(std::size_t row) const {
  // Hash (column, value) pairs in column-name order so the identity does not
  // depend on column ordering in the source file.
  std::vector<std::size_t> order(columns_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    return columns_[a] < columns_[b];
  });
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t c : order) {
    h = fnv1a64(columns_[c], h);
    h = fnv1a64("=", h);
    const CellValue& v = rows_.at(row)[c];
    if (const double* d = std::get_if<double>(&v)) {
      h = fnv1a64(canonical_double(*d), h);
    } else {
      h = fnv1a64(std::get<std::string>(v), h);
    }
    h = fnv1a64("|", h);
  }
  return h;
}

}  // namespace tct
