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

#include "otflow/model_io.hpp"

#include "otflow/csv.hpp"

#include <cmath>
#include <limits>

namespace otflow {

Json double_to_json(double v)
{
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  if (std::isnan(v)) {
    throw InvalidArgument("cannot serialize NaN");
  }
  return v;
}

double double_from_json(const Json& j, const std::string& key)
{
  if (j.is_number()) {
    return j.get<double>();
  }
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") {
      return std::numeric_limits<double>::infinity();
    }
    if (s == "-inf") {
      return -std::numeric_limits<double>::infinity();
    }
  }
  throw InvalidArgument(key + ": expected a number");
}

namespace {

Json vector_to_json(const Eigen::Ref<const Vector>& v)
{
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) {
    a.push_back(double_to_json(v(i)));
  }
  return a;
}

Vector vector_from_json(const Json& j, const std::string& key)
{
  if (!j.is_array()) {
    throw InvalidArgument(key + ": expected an array");
  }
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Index>(i)) = double_from_json(j[i], key);
  }
  return v;
}

const Json& member(const Json& j, const char* key, const std::string& where)
{
  if (!j.is_object() || !j.contains(key)) {
    throw InvalidArgument(where + ": missing key '" + key + "'");
  }
  return j.at(key);
}

template <typename T>
T typed(const Json& j, const std::string& key)
{
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument(key + ": value has the wrong type");
  }
}

} // namespace

Json to_json(const FeatureSet& features)
{
  Json a = Json::array();
  for (const Feature& f : features) {
    Json r;
    r["kind"] = to_string(f.kind);
    r["center"] = vector_to_json(f.center);
    r["bandwidth"] = double_to_json(f.bandwidth);
    a.push_back(std::move(r));
  }
  return a;
}

FeatureSet feature_set_from_json(const Json& j)
{
  if (!j.is_array()) {
    throw InvalidArgument("features: expected an array");
  }
  std::vector<Feature> out;
  for (const Json& r : j) {
    Feature f;
    f.kind = feature_kind_from_string(typed<std::string>(member(r, "kind", "feature"), "kind"));
    f.center = vector_from_json(member(r, "center", "feature"), "center");
    f.bandwidth = double_from_json(member(r, "bandwidth", "feature"), "bandwidth");
    out.push_back(std::move(f));
  }
  return FeatureSet(std::move(out));
}

Json to_json(const ColumnTransform& transform)
{
  Json j;
  Json logs = Json::array();
  for (bool b : transform.log_columns()) {
    logs.push_back(b);
  }
  j["log_columns"] = std::move(logs);
  j["shift"] = vector_to_json(transform.shift());
  j["scale"] = vector_to_json(transform.scale());
  return j;
}

ColumnTransform column_transform_from_json(const Json& j)
{
  const Json& logs = member(j, "log_columns", "transform");
  std::vector<bool> log_columns;
  for (const Json& b : logs) {
    log_columns.push_back(typed<bool>(b, "transform.log_columns"));
  }
  return ColumnTransform(std::move(log_columns),
                         vector_from_json(member(j, "shift", "transform"), "transform.shift"),
                         vector_from_json(member(j, "scale", "transform"), "transform.scale"));
}

Json to_json(const FlowConfig& c)
{
  Json j;
  j["epsilon"] = double_to_json(c.epsilon);
  j["t_max"] = c.t_max;
  j["p"] = c.p;
  j["n_p"] = double_to_json(c.n_p);
  j["m0"] = double_to_json(c.m0);
  j["sigma"] = double_to_json(c.sigma);
  j["kde_refresh_interval"] = c.kde_refresh_interval;
  j["kde_max_support"] = c.kde_max_support;
  j["ridge"] = double_to_json(c.ridge);
  j["damping"] = double_to_json(c.damping);
  j["lambda"] = double_to_json(c.lambda);
  j["locality_weight"] = double_to_json(c.locality_weight);
  j["jitter_factor"] = double_to_json(c.jitter_factor);
  j["reference_share"] = double_to_json(c.reference_share);
  j["bandwidth_dim"] = double_to_json(c.bandwidth_dim);
  j["feature_kind"] = to_string(c.feature_kind);
  j["reference_source"] = to_string(c.reference_source);
  j["target_fraction"] = double_to_json(c.target_fraction);
  j["reference_size"] = c.reference_size;
  j["reference_mode"] = to_string(c.reference_mode);
  j["marker_count"] = c.marker_count;
  j["preprocess"] = to_string(c.preprocess);
  j["seed"] = c.seed;
  return j;
}

FlowConfig flow_config_from_json(const Json& j, const FlowConfig& base, const std::string& prefix)
{
  if (!j.is_object()) {
    throw InvalidArgument(prefix + ": expected an object");
  }
  FlowConfig c = base;
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix + key;
    auto real = [&] { return double_from_json(value, name); };
    auto count = [&] { return typed<Index>(value, name); };
    auto text = [&] { return typed<std::string>(value, name); };
    try {
      if (key == "epsilon") c.epsilon = real();
      else if (key == "t_max") c.t_max = count();
      else if (key == "p") c.p = count();
      else if (key == "n_p") c.n_p = real();
      else if (key == "m0") c.m0 = real();
      else if (key == "sigma") c.sigma = real();
      else if (key == "kde_refresh_interval") c.kde_refresh_interval = count();
      else if (key == "kde_max_support") c.kde_max_support = count();
      else if (key == "ridge") c.ridge = real();
      else if (key == "damping") c.damping = real();
      else if (key == "lambda") c.lambda = real();
      else if (key == "locality_weight") c.locality_weight = real();
      else if (key == "jitter_factor") c.jitter_factor = real();
      else if (key == "reference_share") c.reference_share = real();
      else if (key == "bandwidth_dim") c.bandwidth_dim = real();
      else if (key == "feature_kind") c.feature_kind = feature_kind_from_string(text());
      else if (key == "reference_source") c.reference_source = reference_source_from_string(text());
      else if (key == "target_fraction") c.target_fraction = real();
      else if (key == "reference_size") c.reference_size = count();
      else if (key == "reference_mode") c.reference_mode = product_mode_from_string(text());
      else if (key == "marker_count") c.marker_count = count();
      else if (key == "preprocess") c.preprocess = preprocess_from_string(text());
      else if (key == "seed") c.seed = typed<std::uint64_t>(value, name);
      else throw InvalidArgument("unknown key '" + name + "'");
    } catch (const InvalidArgument& e) {
      const std::string what = e.what();
      if (what.rfind(name, 0) == 0 || what.rfind("unknown key", 0) == 0) {
        throw;
      }
      throw InvalidArgument(name + ": " + what);
    }
  }
  return c;
}

Json to_json(const FlowModel& model)
{
  Json j;
  j["format"] = "otflow-model";
  j["version"] = 1;
  j["y_dim"] = model.y_dim;
  j["x_dim"] = model.x_dim;
  j["config"] = to_json(model.config);
  j["transform"] = to_json(model.transform);
  j["terminated_by"] = to_string(model.terminated_by);
  Json steps = Json::array();
  for (const ElementaryMap& s : model.steps) {
    Json r;
    r["lambda"] = double_to_json(s.lambda.value());
    r["beta"] = vector_to_json(s.beta);
    r["features"] = to_json(s.features);
    steps.push_back(std::move(r));
  }
  j["steps"] = std::move(steps);
  Json disp = Json::array();
  Json grad = Json::array();
  Json count = Json::array();
  Json band = Json::array();
  for (const StepDiagnostics& d : model.diagnostics) {
    disp.push_back(double_to_json(d.max_displacement));
    grad.push_back(double_to_json(d.gradient_norm));
    count.push_back(d.feature_count);
    band.push_back(double_to_json(d.median_bandwidth));
  }
  j["diagnostics"] = { { "max_displacement", disp },
                       { "gradient_norm", grad },
                       { "feature_count", count },
                       { "median_bandwidth", band } };
  return j;
}

FlowModel flow_model_from_json(const Json& j)
{
  const std::string where = "model";
  if (!j.is_object() || j.value("format", "") != "otflow-model") {
    throw InvalidArgument("not an otflow model document");
  }
  FlowModel model;
  model.y_dim = typed<Index>(member(j, "y_dim", where), "y_dim");
  model.x_dim = typed<Index>(member(j, "x_dim", where), "x_dim");
  model.config = flow_config_from_json(member(j, "config", where));
  model.transform = column_transform_from_json(member(j, "transform", where));
  model.terminated_by =
    termination_from_string(typed<std::string>(member(j, "terminated_by", where), "terminated_by"));
  for (const Json& r : member(j, "steps", where)) {
    ElementaryMap s{ feature_set_from_json(member(r, "features", "step")),
                     vector_from_json(member(r, "beta", "step"), "beta"),
                     Penalty(double_from_json(member(r, "lambda", "step"), "lambda")) };
    s.validate();
    if (s.features.dim() != model.y_dim + model.x_dim) {
      throw InvalidArgument("model: step dimension does not match y_dim + x_dim");
    }
    model.steps.push_back(std::move(s));
  }
  const Json& d = member(j, "diagnostics", where);
  const Json& disp = member(d, "max_displacement", "diagnostics");
  const Json& grad = member(d, "gradient_norm", "diagnostics");
  const Json& count = member(d, "feature_count", "diagnostics");
  const Json& band = member(d, "median_bandwidth", "diagnostics");
  if (grad.size() != disp.size() || count.size() != disp.size() || band.size() != disp.size()) {
    throw InvalidArgument("diagnostics arrays differ in length");
  }
  for (std::size_t i = 0; i < disp.size(); ++i) {
    StepDiagnostics s;
    s.max_displacement = double_from_json(disp[i], "max_displacement");
    s.gradient_norm = double_from_json(grad[i], "gradient_norm");
    s.feature_count = typed<Index>(count[i], "feature_count");
    s.median_bandwidth = double_from_json(band[i], "median_bandwidth");
    model.diagnostics.push_back(s);
  }
  return model;
}

void save_model(const std::string& path, const FlowModel& model)
{
  write_text_file(path, to_json(model).dump(1) + "\n");
}

FlowModel load_model(const std::string& path)
{
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return flow_model_from_json(j);
}

} // namespace otflow
