#pragma once

#include "spv/luma_frame.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace spv {

/// The eight object categories subjects are asked about.
enum class ObjectClass {
    Sink,
    Refrigerator,
    OvenMicrowave,
    Table,
    Chair,
    TvLaptop,
    Bed,
    Couch,
};

inline constexpr std::array kAllObjectClasses{
    ObjectClass::Sink,  ObjectClass::Refrigerator, ObjectClass::OvenMicrowave,
    ObjectClass::Table, ObjectClass::Chair,        ObjectClass::TvLaptop,
    ObjectClass::Bed,   ObjectClass::Couch,
};

std::string_view to_string(ObjectClass c);

/// Accepts the canonical names ("sink", "oven_microwave", ...) and the usual
/// COCO detector labels that fold into them ("oven", "microwave", "tv",
/// "laptop", "dining table", "refrigerator"...). Case-insensitive.
std::optional<ObjectClass> parse_object_class(std::string_view label);

struct ObjectInstance {
    ObjectClass object_class;
    std::string label;   // as emitted by the detector
    LumaFrame mask;      // binary, source resolution
    double score = 0.0;
};

struct EdgeMap {
    LumaFrame values;    // soft edge probability
    double threshold = 0.5;
};

struct SaliencyOverlay {
    int width = 0;
    int height = 0;
    std::vector<ObjectInstance> objects;
    std::optional<EdgeMap> edges;
    int frame_index = 0;
};

struct OverlayConfig {
    std::set<ObjectClass> allowed{kAllObjectClasses.begin(), kAllObjectClasses.end()};
    double min_score = 0.7;
    double edge_threshold = 0.5;
};

/// Path of the manifest for frame `frame_index` inside `mask_dir`
/// (`overlay_000012.json`).
std::filesystem::path overlay_manifest_path(const std::filesystem::path& mask_dir, int frame_index);

/// Reads one overlay manifest:
///
///     { "width": 640, "height": 480,
///       "objects": [ {"class": "bed", "score": 0.98, "mask_file": "bed0.png"} ],
///       "edge_file": "edges.png" }
///
/// Raster paths resolve relative to the manifest. Instances outside the
/// allow-list or under the score floor are dropped. Missing manifest ->
/// IngestionError; raster size differing from width/height -> FormatError.
SaliencyOverlay load_overlay_manifest(const std::filesystem::path& manifest,
                                      const OverlayConfig& config = {}, int frame_index = 0);

SaliencyOverlay load_overlay(const std::filesystem::path& mask_dir, int frame_index,
                             const OverlayConfig& config = {});

/// Union of the instance silhouettes; background is 0.
LumaFrame compose_om(const SaliencyOverlay& overlay);

/// OM union OR (edge >= threshold). PreconditionError without an edge map.
LumaFrame compose_sie_om(const SaliencyOverlay& overlay);

/// Demo substitute for a learned edge map: central-difference gradient
/// magnitude scaled so the strongest response is 1. Borders replicate.
EdgeMap fallback_edges(const LumaFrame& frame, double threshold = 0.5);

} // namespace spv
