#pragma once

#include "xdr/core/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace xdr {

inline constexpr const char* kToolVersion = "0.1.0";

/// Label of the active loss-component row, e.g. "OD+PA1+PA2" or "PA1+PA2".
std::string ablation_row(const AblationFlags& flags);

/// Resolved config, seeds, ablation row and the defaults adopted where the
/// method leaves a value unspecified.
nlohmann::json make_manifest(const Config& config, const std::string& command);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace xdr
