#pragma once

#include "xdr/core/config.hpp"
#include "xdr/trainer/trainer.hpp"

#include <filesystem>
#include <string>

namespace xdr::trainer {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Config config;
  TrainState state;
};

/// Binary container, see docs/checkpoint-format.md. Written to a temporary
/// file and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const TrainState& state, const Config& config);
std::string checkpoint_bytes(const TrainState& state, const Config& config);

/// Throws IoError when unreadable and CorruptArtifact on a bad magic, version,
/// checksum or inconsistent content.
Checkpoint load_checkpoint(const std::filesystem::path& path);
Checkpoint parse_checkpoint(const std::string& bytes);

}  // namespace xdr::trainer
