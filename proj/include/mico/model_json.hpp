#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mico/model.hpp"
#include "mico/status.hpp"

namespace mico {

// JSON text form of a Model, one-to-one with the in-memory structure.
// Field names follow the type fields; byte blobs are base64 strings.

nlohmann::json model_to_json(const Model& model);
Result<Model> model_from_json(const nlohmann::json& j);

std::string base64_encode(std::span<const uint8_t> bytes);
Result<std::vector<uint8_t>> base64_decode(const std::string& text);

}  // namespace mico
