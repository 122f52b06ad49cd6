// Copyright 2026 The declab Authors. All Rights Reserved.
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

#ifndef DECLAB_TEXT_IO_HPP_
#define DECLAB_TEXT_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace declab {

// Shortest decimal text that round-trips to the same double.
std::string format_double(double x);

std::string_view trim(std::string_view s);

// Parses a full-token finite double; throws ParseError mentioning `line`.
double parse_double(std::string_view token, std::size_t line);

// Splits on commas and parses each field.
std::vector<double> parse_csv_row(std::string_view text, std::size_t line);

// A non-blank, non-comment line with its 1-based line number.
struct NumberedLine {
  std::size_t number;
  std::string text;
};

// Blank lines and lines starting with '#' are dropped.
std::vector<NumberedLine> content_lines(const std::string& text);

std::string read_file(const std::filesystem::path& path);

}  // namespace declab

#endif  // DECLAB_TEXT_IO_HPP_
