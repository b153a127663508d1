#pragma once

#include <string>
#include <vector>

#include "imcmap/graph.hpp"

namespace imcmap {

/// Built-in benchmark graphs: "resnet8", "resnet18", "yolov8n_subset".
std::vector<std::string> builtin_model_names();
bool is_builtin_model(const std::string& name);

/// Deterministic generator for one of the built-in models; throws
/// ConfigError for an unknown name.
ModelGraph builtin_model(const std::string& name);

}  // namespace imcmap
