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

#include "otflow/csv.hpp"

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace otflow {

std::string format_double(double value)
{
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::vector<std::string> sample_header(Index y_dim, Index x_dim)
{
  std::vector<std::string> header;
  for (Index i = 0; i < y_dim; ++i) {
    header.push_back("y" + std::to_string(i));
  }
  for (Index i = 0; i < x_dim; ++i) {
    header.push_back("x" + std::to_string(i));
  }
  return header;
}

void write_csv(std::ostream& out,
               const std::vector<std::string>& header,
               const Eigen::Ref<const RowMatrix>& values)
{
  if (static_cast<Index>(header.size()) != values.cols()) {
    throw InvalidArgument("write_csv: header size does not match columns");
  }
  for (std::size_t j = 0; j < header.size(); ++j) {
    out << (j ? "," : "") << header[j];
  }
  out << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      out << (j ? "," : "") << format_double(values(i, j));
    }
    out << '\n';
  }
}

void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const Eigen::Ref<const RowMatrix>& values)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  write_csv(out, header, values);
  if (!out) {
    throw IoError("write failed for '" + path + "'");
  }
}

namespace {

std::vector<std::string> split_line(const std::string& line)
{
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

void strip_cr(std::string& line)
{
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
}

} // namespace

CsvTable read_csv(std::istream& in)
{
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("CSV input is empty (missing header row)");
  }
  strip_cr(line);
  table.header = split_line(line);
  const auto cols = static_cast<Index>(table.header.size());
  std::vector<double> data;
  Index rows = 0;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) {
      continue;
    }
    const auto fields = split_line(line);
    if (static_cast<Index>(fields.size()) != cols) {
      throw IoError("CSV row " + std::to_string(rows + 1) + " has " +
                    std::to_string(fields.size()) + " fields, expected " +
                    std::to_string(cols));
    }
    for (const auto& f : fields) {
      double v = 0.0;
      auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw IoError("CSV row " + std::to_string(rows + 1) +
                      ": cannot parse '" + f + "' as a number");
      }
      data.push_back(v);
    }
    ++rows;
  }
  table.values = RowMatrix(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      table.values(i, j) = data[static_cast<std::size_t>(i * cols + j)];
    }
  }
  return table;
}

CsvTable read_csv(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  try {
    return read_csv(in);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::string read_text_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  out << text;
  if (!out) {
    throw IoError("write failed for '" + path + "'");
  }
}

namespace {

void write_sidecar(const std::string& path,
                   Index y_dim,
                   Index x_dim,
                   Index marker_count,
                   std::uint64_t seed)
{
  nlohmann::ordered_json meta;
  meta["y_dim"] = y_dim;
  meta["x_dim"] = x_dim;
  meta["marker_count"] = marker_count;
  meta["seed"] = seed;
  write_text_file(path + ".json", meta.dump(2) + "\n");
}

struct Dims
{
  Index y_dim = 0;
  Index x_dim = 0;
};

Dims dims_from_header(const std::vector<std::string>& header, const std::string& path)
{
  Dims dims;
  bool seen_x = false;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const auto& name = header[j];
    if (name.size() < 2 || (name[0] != 'y' && name[0] != 'x')) {
      throw IoError(path + ": unexpected column '" + name + "'");
    }
    const bool is_y = name[0] == 'y';
    if (is_y && seen_x) {
      throw IoError(path + ": y columns must precede x columns");
    }
    const Index expected = is_y ? dims.y_dim : dims.x_dim;
    if (name.substr(1) != std::to_string(expected)) {
      throw IoError(path + ": column '" + name + "' out of order");
    }
    if (is_y) {
      ++dims.y_dim;
    } else {
      seen_x = true;
      ++dims.x_dim;
    }
  }
  if (dims.x_dim < 1) {
    throw IoError(path + ": no x columns");
  }
  return dims;
}

} // namespace

void write_batch(const std::string& path, const SampleBatch& batch, std::uint64_t seed)
{
  write_csv(path, sample_header(batch.y_dim(), batch.x_dim()), batch.points());
  write_sidecar(path, batch.y_dim(), batch.x_dim(), batch.marker_count(), seed);
}

void write_dataset(const std::string& path, const JointDataset& joint)
{
  write_csv(path, sample_header(joint.y_dim, joint.x_dim), joint.pairs);
  write_sidecar(path, joint.y_dim, joint.x_dim, 0, joint.seed);
}

namespace {

nlohmann::json read_sidecar(const std::string& path)
{
  const std::string meta_path = path + ".json";
  if (!std::filesystem::exists(meta_path)) {
    return nlohmann::json::object();
  }
  try {
    return nlohmann::json::parse(read_text_file(meta_path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(meta_path + ": " + e.what());
  }
}

} // namespace

SampleBatch read_batch(const std::string& path)
{
  auto table = read_csv(path);
  const auto dims = dims_from_header(table.header, path);
  const auto meta = read_sidecar(path);
  const Index markers = meta.value("marker_count", Index{ 0 });
  return SampleBatch(std::move(table.values), dims.y_dim, dims.x_dim, markers);
}

JointDataset read_dataset(const std::string& path)
{
  auto table = read_csv(path);
  const auto dims = dims_from_header(table.header, path);
  const auto meta = read_sidecar(path);
  JointDataset joint{ std::move(table.values),
                      dims.y_dim,
                      dims.x_dim,
                      meta.value("seed", std::uint64_t{ 0 }) };
  joint.validate();
  return joint;
}

} // namespace otflow
