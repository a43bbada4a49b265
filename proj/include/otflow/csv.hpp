// Copyright 2026 The otflow Authors
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

#pragma once

#include "otflow/sample.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace otflow {

//! Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

//! Column names y0..y{m-1}, x0..x{d-1}.
std::vector<std::string> sample_header(Index y_dim, Index x_dim);

//! A parsed CSV table of doubles with its header.
struct CsvTable
{
  std::vector<std::string> header;
  RowMatrix values;
};

void write_csv(std::ostream& out,
               const std::vector<std::string>& header,
               const Eigen::Ref<const RowMatrix>& values);
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const Eigen::Ref<const RowMatrix>& values);
CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

//! Writes `path` (CSV) and `path` + ".json" (metadata sidecar).
void write_batch(const std::string& path, const SampleBatch& batch, std::uint64_t seed);
void write_dataset(const std::string& path, const JointDataset& joint);

//! Reads a CSV whose header follows sample_header(); the sidecar is used for
//! marker_count and seed when present.
SampleBatch read_batch(const std::string& path);
JointDataset read_dataset(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace otflow
