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

#ifndef TCT_DATA_HPP_
#define TCT_DATA_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tct {

using CellValue = std::variant<double, std::string>;

// A multiset of records under the add/remove-one neighbor relation. Columns
// are typed by inference when loading delimited text: numeric if every value
// in the column parses as a number.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<std::string> columns)
      : columns_(std::move(columns)) {}

  static Dataset from_csv(std::istream& in);
  static Dataset from_csv_file(const std::string& path);

  std::size_t num_rows() const { return rows_.size(); }
  std::size_t num_columns() const { return columns_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }

  // Throws std::invalid_argument for an unknown column.
  std::size_t column_index(std::string_view name) const;

  const CellValue& cell(std::size_t row, std::size_t col) const {
    return rows_[row][col];
  }
  double numeric(std::size_t row, std::size_t col) const;
  const std::string& text(std::size_t row, std::size_t col) const;

  void add_row(std::vector<CellValue> row);
  Dataset with_row_added(std::vector<CellValue> row) const;
  Dataset with_row_removed(std::size_t row) const;

  // Position-independent content hash of a row: the identity SVT item
  // counters are keyed by. Identical content hashes identically, so
  // multiset semantics survive serialization.
  std::uint64_t row_content_hash(std::size_t row) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<CellValue>> rows_;
};

}  // namespace tct

#endif  // TCT_DATA_HPP_
