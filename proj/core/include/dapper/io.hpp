// Copyright 2026 The Dapper Authors
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

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dapper {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of `name` in the header, or throws ValidationError.
  std::size_t column(std::string_view name) const;
};

// Minimal RFC 4180 reader: comma separator, double-quote quoting, header row
// required. Trailing CR is stripped. Throws ValidationError on an empty file or
// ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

std::string csv_field(std::string_view value);

// Shortest decimal text that round-trips the double exactly.
std::string format_double(double value);
// Fixed-point text with `digits` decimals.
std::string format_fixed(double value, int digits);

// Writes to a sibling temporary file and renames it into place, so readers
// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace dapper
