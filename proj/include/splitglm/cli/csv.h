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

#ifndef SPLITGLM_CLI_CSV_H_
#define SPLITGLM_CLI_CSV_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "splitglm/core/design_block.h"
#include "splitglm/core/family.h"

namespace splitglm::cli {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of `name` in the header; UnknownColumn when absent.
  std::size_t ColumnIndex(const std::string& name) const;
};

// Comma separated, optional double-quoted fields ("" escapes a quote),
// first line is the header. Blank trailing lines are ignored.
CsvTable ParseCsv(std::istream& in);
CsvTable ReadCsv(const std::string& path);

std::optional<double> ParseNumber(const std::string& cell);

struct IngestOptions {
  std::string target_column;
  std::vector<std::string> feature_columns;  // empty: all but the target
  FamilySpec family = FamilySpec::Gaussian();
  bool standardize = false;
  bool add_intercept = false;
  bool center_gaussian_target = true;
};

struct Ingested {
  DesignBlock block;
  TargetVector y;
};

// Numeric columns are centered (and standardized when asked). Any column
// with a non-numeric cell is categorical: levels in lexical order, first
// level dropped, one centered indicator per remaining level named
// "<column>=<level>". Empty and NA cells are rejected as MissingValue.
Ingested IngestCsv(const CsvTable& table, const IngestOptions& options);
Ingested IngestCsv(const std::string& path, const IngestOptions& options);

void WriteBlockCsv(std::ostream& out, const DesignBlock& block);
void WriteMatrixCsv(std::ostream& out, const Matrix& m,
                    const std::vector<std::string>& header);
// Numeric CSV with a header row; returns the values and the header.
Matrix ReadMatrixCsv(const std::string& path,
                     std::vector<std::string>* header = nullptr);

}  // namespace splitglm::cli

#endif  // SPLITGLM_CLI_CSV_H_
