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

#include "otflow/flow.hpp"

#include <json.hpp>

#include <string>

namespace otflow {

using Json = nlohmann::ordered_json;

//! Doubles are written in shortest round-trip form; +-inf as "inf"/"-inf".
Json double_to_json(double v);
double double_from_json(const Json& j, const std::string& key);

Json to_json(const FeatureSet& features);
FeatureSet feature_set_from_json(const Json& j);

Json to_json(const ColumnTransform& transform);
ColumnTransform column_transform_from_json(const Json& j);

Json to_json(const FlowConfig& config);
//! Overrides fields of `base` with the keys present in `j`. Unknown keys and
//! ill-typed values throw InvalidArgument naming `prefix` + key.
FlowConfig flow_config_from_json(const Json& j,
                                 const FlowConfig& base = {},
                                 const std::string& prefix = "flow.");

//! Model document: config echo, steps, diagnostics. Wall times are not stored
//! so that identical fits give identical files.
Json to_json(const FlowModel& model);
FlowModel flow_model_from_json(const Json& j);

void save_model(const std::string& path, const FlowModel& model);
FlowModel load_model(const std::string& path);

} // namespace otflow
