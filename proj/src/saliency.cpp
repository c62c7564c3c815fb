#include "spv/saliency.hpp"

#include "spv/error.hpp"
#include "spv/image_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace spv {
namespace {

using json = nlohmann::json;

void check_raster(const LumaFrame& raster, const SaliencyOverlay& overlay,
                  const std::filesystem::path& file)
{
    if (raster.width() != overlay.width || raster.height() != overlay.height)
        throw FormatError(file.string() + " is " + std::to_string(raster.width()) + "x" +
                          std::to_string(raster.height()) + ", source frame is " +
                          std::to_string(overlay.width) + "x" + std::to_string(overlay.height));
}

} // namespace

std::string_view to_string(ObjectClass c)
{
    switch (c) {
    case ObjectClass::Sink: return "sink";
    case ObjectClass::Refrigerator: return "refrigerator";
    case ObjectClass::OvenMicrowave: return "oven_microwave";
    case ObjectClass::Table: return "table";
    case ObjectClass::Chair: return "chair";
    case ObjectClass::TvLaptop: return "tv_laptop";
    case ObjectClass::Bed: return "bed";
    case ObjectClass::Couch: return "couch";
    }
    return "unknown";
}

std::optional<ObjectClass> parse_object_class(std::string_view label)
{
    static const std::map<std::string, ObjectClass, std::less<>> names{
        {"sink", ObjectClass::Sink},
        {"refrigerator", ObjectClass::Refrigerator},
        {"fridge", ObjectClass::Refrigerator},
        {"oven_microwave", ObjectClass::OvenMicrowave},
        {"oven", ObjectClass::OvenMicrowave},
        {"microwave", ObjectClass::OvenMicrowave},
        {"table", ObjectClass::Table},
        {"dining table", ObjectClass::Table},
        {"dining_table", ObjectClass::Table},
        {"chair", ObjectClass::Chair},
        {"tv_laptop", ObjectClass::TvLaptop},
        {"tv", ObjectClass::TvLaptop},
        {"tvmonitor", ObjectClass::TvLaptop},
        {"laptop", ObjectClass::TvLaptop},
        {"bed", ObjectClass::Bed},
        {"couch", ObjectClass::Couch},
        {"sofa", ObjectClass::Couch},
    };
    std::string lower(label);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (auto it = names.find(lower); it != names.end())
        return it->second;
    return std::nullopt;
}

std::filesystem::path overlay_manifest_path(const std::filesystem::path& mask_dir, int frame_index)
{
    char name[32];
    std::snprintf(name, sizeof name, "overlay_%06d.json", frame_index);
    return mask_dir / name;
}

SaliencyOverlay load_overlay_manifest(const std::filesystem::path& manifest,
                                      const OverlayConfig& config, int frame_index)
{
    std::ifstream in(manifest);
    if (!in)
        throw IngestionError("overlay manifest not found: " + manifest.string());

    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw IngestionError("malformed overlay manifest " + manifest.string() + ": " + e.what());
    }

    SaliencyOverlay overlay;
    overlay.frame_index = frame_index;
    const auto base = manifest.parent_path();
    try {
        overlay.width = doc.at("width").get<int>();
        overlay.height = doc.at("height").get<int>();
        if (overlay.width <= 0 || overlay.height <= 0)
            throw FormatError("overlay manifest " + manifest.string() + " has non-positive size");

        for (const auto& entry : doc.value("objects", json::array())) {
            const auto label = entry.at("class").get<std::string>();
            const double score = entry.at("score").get<double>();
            const auto cls = parse_object_class(label);
            if (!cls || !config.allowed.contains(*cls) || score < config.min_score)
                continue;
            const auto file = base / entry.at("mask_file").get<std::string>();
            auto mask = read_mask(file);
            check_raster(mask, overlay, file);
            overlay.objects.push_back({*cls, label, std::move(mask), score});
        }

        if (doc.contains("edge_file") && !doc["edge_file"].is_null()) {
            const auto file = base / doc["edge_file"].get<std::string>();
            auto values = read_luma(file);
            check_raster(values, overlay, file);
            overlay.edges = EdgeMap{std::move(values), config.edge_threshold};
        }
    } catch (const json::exception& e) {
        throw IngestionError("overlay manifest " + manifest.string() + ": " + e.what());
    }
    return overlay;
}

SaliencyOverlay load_overlay(const std::filesystem::path& mask_dir, int frame_index,
                             const OverlayConfig& config)
{
    return load_overlay_manifest(overlay_manifest_path(mask_dir, frame_index), config, frame_index);
}

LumaFrame compose_om(const SaliencyOverlay& overlay)
{
    LumaFrame out(overlay.width, overlay.height);
    auto dst = out.pixels();
    for (const auto& obj : overlay.objects) {
        auto src = obj.mask.pixels();
        for (std::size_t i = 0; i < dst.size(); ++i)
            if (src[i] >= 0.5f)
                dst[i] = 1.0f;
    }
    return out;
}

LumaFrame compose_sie_om(const SaliencyOverlay& overlay)
{
    if (!overlay.edges)
        throw PreconditionError("SIE-OM needs an edge map for frame " +
                                std::to_string(overlay.frame_index));
    LumaFrame out = compose_om(overlay);
    auto dst = out.pixels();
    auto edges = overlay.edges->values.pixels();
    const auto threshold = static_cast<float>(overlay.edges->threshold);
    for (std::size_t i = 0; i < dst.size(); ++i)
        if (edges[i] >= threshold)
            dst[i] = 1.0f;
    return out;
}

EdgeMap fallback_edges(const LumaFrame& frame, double threshold)
{
    const int w = frame.width();
    const int h = frame.height();
    std::vector<double> mag(frame.size(), 0.0);
    double peak = 0.0;
    for (int y = 0; y < h; ++y) {
        const int ym = std::max(y - 1, 0);
        const int yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            const int xm = std::max(x - 1, 0);
            const int xp = std::min(x + 1, w - 1);
            const double gx = (static_cast<double>(frame.at(xp, y)) - frame.at(xm, y)) / 2.0;
            const double gy = (static_cast<double>(frame.at(x, yp)) - frame.at(x, ym)) / 2.0;
            const double m = std::hypot(gx, gy);
            mag[static_cast<std::size_t>(y) * w + x] = m;
            peak = std::max(peak, m);
        }
    }
    LumaFrame values(w, h);
    if (peak > 0.0) {
        auto dst = values.pixels();
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] = static_cast<float>(mag[i] / peak);
    }
    return {std::move(values), threshold};
}

} // namespace spv
