#pragma once

#include "spv/phosphene.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace spv {

/// Everything needed to rebuild a session's phosphene grid, including the
/// dropout draw. Serialized as plain `key = value` lines:
///
///     rows = 32
///     cols = 32
///     canvas = 512          (or 640x480)
///     levels = 8
///     sigma_ratio = 6.4
///     cutoff_ratio = 2
///     dropout_rate = 0.1
///     seed = 7
struct GridConfig {
    int rows = 32;
    int cols = 32;
    int canvas_width = 512;
    int canvas_height = 512;
    int levels = 8;
    double sigma_ratio = kDefaultSigmaRatio;
    double cutoff_ratio = kDefaultCutoffRatio;
    double dropout_rate = 0.10;
    std::uint64_t seed = 0;

    friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

std::string to_text(const GridConfig& config);

/// Unknown keys and malformed values raise ConfigError. Keys absent from the
/// text keep the values already in `base`.
GridConfig parse_grid_config(const std::string& text, GridConfig base = {});
GridConfig load_grid_config(const std::filesystem::path& path, GridConfig base = {});

/// Checks the numeric fields against the phosphene-core preconditions
/// (throws ConfigError) without building anything.
void validate(const GridConfig& config);

/// build_grid followed by apply_dropout; the mask is fixed for everything
/// rendered with the returned grid.
PhospheneGrid make_session_grid(const GridConfig& config);

} // namespace spv
