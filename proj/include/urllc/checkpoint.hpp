#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include "urllc/dqn.hpp"

namespace urllc::dqn {

// Describes the discrete action space a network was trained for, so a
// policy can refuse checkpoints from a different topology or codec.
struct ActionSpaceDescriptor {
    std::uint32_t num_aps = 0;
    std::uint32_t num_subbands = 0;
    std::uint32_t max_aps = 0;  // 1 = single connectivity, 2 = dual
    std::vector<double> power_levels_dbm;

    friend bool operator==(const ActionSpaceDescriptor&, const ActionSpaceDescriptor&) = default;
};

struct Checkpoint {
    QNetwork network;
    ObservationTransform transform;
    ActionSpaceDescriptor actions;
    std::uint64_t training_episodes = 0;
    std::uint64_t config_hash = 0;
};

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Little-endian binary layout:
//   "URLLCQN\0", u32 version,
//   u32 layer count L, u32 dims[L],
//   u32 num_aps, u32 num_subbands, u32 max_aps, u32 P, f64 power_levels[P],
//   u32 F, f64 offset[F], f64 scale[F],
//   u64 training_episodes, u64 config_hash,
//   per layer: f64 W (row-major, out x in), f64 b[out],
//   u64 FNV-1a checksum of everything before it.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

// Throws CheckpointError on I/O failure, bad magic, version mismatch,
// checksum mismatch, truncation, or dims differing from expected_dims.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<std::vector<int>>& expected_dims = std::nullopt);

}  // namespace urllc::dqn
