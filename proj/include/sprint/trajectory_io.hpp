#pragma once

#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "sprint/ks.hpp"

namespace sprint::io {

inline constexpr std::string_view kTrajectoryMagic = "SPRNTTR1";

nlohmann::json sim_config_to_json(const ks::SimConfig& config);
ks::SimConfig sim_config_from_json(const nlohmann::json& j);

/// Framed binary: header {config, nt, nx, x, t, noise?}; payload rows are
/// time samples.
void write_trajectory(const std::filesystem::path& path, const ks::TrajectoryRecord& traj);
ks::TrajectoryRecord read_trajectory(const std::filesystem::path& path);

}  // namespace sprint::io
