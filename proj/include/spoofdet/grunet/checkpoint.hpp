#pragma once

#include <filesystem>

#include <json.hpp>

#include "spoofdet/grunet/model.hpp"

namespace spoofdet::grunet {

// Layout: 8-byte magic "SPDGRU\0\1", u64 LE header length, JSON header
// (format version, shapes, block table, hyperparameters, normalization
// stats, seed), then every parameter block as LE f64 in header order,
// followed by the normalization mean and std blocks.
inline constexpr char kCheckpointMagic[8] = {'S', 'P', 'D', 'G', 'R', 'U', '\0', '\1'};
inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const GruModel& model,
                     const nlohmann::json& extra = nlohmann::json::object());

struct LoadedCheckpoint {
  GruModel model;
  nlohmann::json header;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace spoofdet::grunet
