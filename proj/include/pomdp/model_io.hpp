#pragma once

#include <string>
#include <variant>

#include "pomdp/model.hpp"

namespace pomdp {

// Instance file format: one UTF-8 JSON document, format_version 1,
// kind "pomdp" or "decomposable". See README for the field layout.
using LoadedInstance = std::variant<PomdpInstance, DecomposablePomdp>;

LoadedInstance load_instance_file(const std::string& path);
std::string instance_to_json(const PomdpInstance& inst);
std::string instance_to_json(const DecomposablePomdp& dec);

// Writes via a temporary file and rename, so failures never leave a
// partial file behind.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace pomdp
