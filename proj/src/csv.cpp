// Copyright 2026 The bavae Authors
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

#include "bavae/csv.hpp"

#include <cstdlib>
#include <fstream>

#include "bavae/error.hpp"

namespace bavae::csv {

Table read_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kIo, "cannot open " + path);
  Table t;
  std::string line;
  if (!std::getline(is, line)) {
    throw Error(ErrorCode::kParse, path + ": empty file");
  }
  t.header = split(line);
  t.columns.resize(t.header.size());
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw Error(ErrorCode::kParse, path + ":" + std::to_string(lineno) +
                                         ": wrong number of fields");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      char* end = nullptr;
      const double v = std::strtod(cells[i].c_str(), &end);
      if (end == cells[i].c_str() || *end != '\0') {
        throw Error(ErrorCode::kParse, path + ":" + std::to_string(lineno) +
                                           ": not a number: " + cells[i]);
      }
      t.columns[i].push_back(v);
    }
  }
  return t;
}

}  // namespace bavae::csv
