#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace sprint::manifest {

inline constexpr const char* kToolName = "sprint";
inline constexpr const char* kToolVersion = "0.1.0";

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// "<artifact>.manifest.json"
std::filesystem::path manifest_path(const std::filesystem::path& artifact);

/// Records the artifact's hash, every input's hash, the command and its
/// configuration.
void write_manifest(const std::filesystem::path& artifact, const std::string& command,
                    const std::vector<std::filesystem::path>& inputs, const nlohmann::json& config);

/// Throws ConfigError if `input` is missing, or if it has a manifest whose
/// recorded hash differs from its current contents.
void verify_input(const std::filesystem::path& input);

}  // namespace sprint::manifest
