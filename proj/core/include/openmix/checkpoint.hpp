#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "openmix/mlp.hpp"

namespace openmix {

// Binary layout, all integers and floats little-endian:
//   "OMCK" | u32 version (1) | u32 dim count L | L × u32 layer dims |
//   per layer: weights (fan_in × fan_out, row-major f64) then bias (fan_out × f64)

inline constexpr char kCheckpointMagic[4] = {'O', 'M', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const MlpModel& model);
/// Throws FormatError on bad magic, unknown version, truncation, or trailing bytes.
MlpModel decode_checkpoint(std::string_view bytes);
/// Layer dims from the header only.
std::vector<std::size_t> decode_checkpoint_dims(std::string_view bytes);

void save_checkpoint(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_checkpoint(const std::filesystem::path& path);

}  // namespace openmix
