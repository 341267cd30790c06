// Copyright 2026 The splitglm Authors
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

#include "splitglm/cli/csv.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "splitglm/error.h"

namespace splitglm::cli {
namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool IsMissing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan";
}

// Splits one record; a quoted field may span lines, so `in` is passed along.
bool ReadRecord(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0;; ++i) {
    if (i == line.size()) {
      if (quoted) {
        std::string more;
        if (!std::getline(in, more)) {
          Fail(ErrorCode::kIoError, "unterminated quoted CSV field");
        }
        field += '\n';
        line = std::move(more);
        i = static_cast<std::size_t>(-1);
        continue;
      }
      break;
    }
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(Trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(Trim(field));
  return true;
}

std::string Quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::size_t CsvTable::ColumnIndex(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    Fail(ErrorCode::kUnknownColumn, "no column named '" + name + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable ParseCsv(std::istream& in) {
  CsvTable table;
  std::vector<std::string> fields;
  if (!ReadRecord(in, table.header) ||
      (table.header.size() == 1 && table.header[0].empty())) {
    Fail(ErrorCode::kEmptyData, "CSV has no header");
  }
  std::set<std::string> seen;
  for (const auto& name : table.header) {
    if (!seen.insert(name).second) {
      Fail(ErrorCode::kInvalidArgument, "duplicate CSV column '" + name + "'");
    }
  }
  std::size_t line = 1;
  while (ReadRecord(in, fields)) {
    ++line;
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != table.header.size()) {
      Fail(ErrorCode::kIoError, "CSV line " + std::to_string(line) + " has " +
                                    std::to_string(fields.size()) +
                                    " fields, header has " +
                                    std::to_string(table.header.size()));
    }
    table.rows.push_back(fields);
  }
  return table;
}

CsvTable ReadCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot open '" + path + "'");
  return ParseCsv(in);
}

std::optional<double> ParseNumber(const std::string& cell) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(end[-1]))) --end;
  if (begin == end) return std::nullopt;
  if (*begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

Ingested IngestCsv(const CsvTable& table, const IngestOptions& options) {
  if (table.rows.empty()) Fail(ErrorCode::kEmptyData, "CSV has no data rows");
  const std::size_t target = table.ColumnIndex(options.target_column);

  std::vector<std::size_t> features;
  if (options.feature_columns.empty()) {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (j != target) features.push_back(j);
    }
  } else {
    for (const auto& name : options.feature_columns) {
      const std::size_t j = table.ColumnIndex(name);
      if (j == target) {
        Fail(ErrorCode::kInvalidArgument,
             "target column '" + name + "' listed as a feature");
      }
      features.push_back(j);
    }
  }
  if (features.empty() && !options.add_intercept) {
    Fail(ErrorCode::kEmptyData, "no feature columns selected");
  }

  const std::size_t n = table.rows.size();
  auto cell = [&](std::size_t row, std::size_t col) -> const std::string& {
    const std::string& v = table.rows[row][col];
    if (IsMissing(v)) {
      Fail(ErrorCode::kMissingValue, "missing value at data row " +
                                         std::to_string(row + 1) + ", column '" +
                                         table.header[col] + "'");
    }
    return v;
  };

  Vector y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = ParseNumber(cell(i, target));
    if (!v) {
      Fail(ErrorCode::kInvalidArgument,
           "target '" + options.target_column + "' is not numeric at data row " +
               std::to_string(i + 1));
    }
    y[static_cast<Eigen::Index>(i)] = *v;
  }
  if (options.family.is_gaussian() && options.center_gaussian_target) {
    y.array() -= y.mean();
  }

  std::vector<Vector> columns;
  std::vector<std::string> names;
  std::vector<bool> continuous;
  for (std::size_t j : features) {
    std::vector<std::optional<double>> parsed(n);
    bool numeric = true;
    for (std::size_t i = 0; i < n; ++i) {
      parsed[i] = ParseNumber(cell(i, j));
      numeric = numeric && parsed[i].has_value();
    }
    if (numeric) {
      Vector col(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) col[static_cast<Eigen::Index>(i)] = *parsed[i];
      columns.push_back(std::move(col));
      names.push_back(table.header[j]);
      continuous.push_back(true);
      continue;
    }
    std::set<std::string> levels;
    for (std::size_t i = 0; i < n; ++i) levels.insert(table.rows[i][j]);
    for (auto level = std::next(levels.begin()); level != levels.end(); ++level) {
      Vector col(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        col[static_cast<Eigen::Index>(i)] = table.rows[i][j] == *level ? 1.0 : 0.0;
      }
      columns.push_back(std::move(col));
      names.push_back(table.header[j] + "=" + *level);
      continuous.push_back(false);
    }
  }

  const auto p = static_cast<Eigen::Index>(columns.size());
  Matrix values(static_cast<Eigen::Index>(n), p);
  Vector means(p);
  Vector scales = Vector::Ones(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    Vector col = columns[static_cast<std::size_t>(j)];
    means[j] = col.mean();
    col.array() -= means[j];
    if (options.standardize && continuous[static_cast<std::size_t>(j)]) {
      const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n - 1));
      if (!(sd > 1e-12 * std::max(1.0, std::abs(means[j])))) {
        Fail(ErrorCode::kConstantColumn,
             "column '" + names[static_cast<std::size_t>(j)] + "' has zero variance");
      }
      col /= sd;
      scales[j] = sd;
      col.array() -= col.mean();
    }
    values.col(j) = col;
  }

  std::optional<Vector> scale_field;
  if (options.standardize) scale_field = scales;
  DesignBlock block(std::move(values), std::move(names), true, std::move(means),
                    std::move(scale_field));
  if (options.add_intercept) block = WithIntercept(block);
  return {std::move(block), TargetVector(std::move(y), options.family)};
}

Ingested IngestCsv(const std::string& path, const IngestOptions& options) {
  return IngestCsv(ReadCsv(path), options);
}

void WriteMatrixCsv(std::ostream& out, const Matrix& m,
                    const std::vector<std::string>& header) {
  for (std::size_t j = 0; j < header.size(); ++j) {
    out << (j ? "," : "") << Quote(header[j]);
  }
  out << '\n';
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << (j ? "," : "") << m(i, j);
    }
    out << '\n';
  }
}

void WriteBlockCsv(std::ostream& out, const DesignBlock& block) {
  WriteMatrixCsv(out, block.values(), block.column_names());
}

Matrix ReadMatrixCsv(const std::string& path, std::vector<std::string>* header) {
  const CsvTable table = ReadCsv(path);
  Matrix m(static_cast<Eigen::Index>(table.rows.size()),
           static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      const auto v = ParseNumber(table.rows[i][j]);
      if (!v) {
        Fail(ErrorCode::kIoError, "non-numeric cell in '" + path + "' at row " +
                                      std::to_string(i + 1));
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *v;
    }
  }
  if (header) *header = table.header;
  return m;
}

}  // namespace splitglm::cli
