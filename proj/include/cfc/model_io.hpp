// Versioned, checksummed text serialization of trained models.

#pragma once

#include <string>

#include "cfc/cfc.hpp"

namespace cfc {

inline constexpr const char* kModelFormatName = "cfc-model";
inline constexpr const char* kModelFormatVersion = "v1";

/// Serialize to the model format. The output is byte-deterministic: equal
/// models produce equal strings.
std::string save_model_string(const CfcModel& model);

/// Parse a model. Throws ModelFormatError on a bad magic line, an unsupported
/// version, a checksum mismatch, or structural problems.
CfcModel load_model_string(const std::string& text);

void save_model(const CfcModel& model, const std::string& path);
CfcModel load_model(const std::string& path);

} // namespace cfc
