#pragma once

#include "spv/luma_frame.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace spv {

/// Loads any image OpenCV can decode as 8-bit grayscale scaled to [0,1].
/// Throws IngestionError when the file is missing or undecodable.
LumaFrame read_luma(const std::filesystem::path& path);

/// Loads a 0/255 mask; pixels >= 128 become 1, the rest 0.
LumaFrame read_mask(const std::filesystem::path& path);

/// 8-bit grayscale PNG encoding, value = round(v * 255).
std::vector<std::uint8_t> encode_png(const LumaFrame& frame);

/// Writes through a sibling temp file and renames, so readers never observe a
/// partially written image.
void write_png(const std::filesystem::path& path, const LumaFrame& frame);

/// Same temp-then-rename promotion for arbitrary bytes.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

} // namespace spv
