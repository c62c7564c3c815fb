#pragma once

#include "spv/image_io.hpp"
#include "spv/study.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace spv::testing {

/// Writes a catalog of four image scenes (two Cent, two Rand) and four videos,
/// each rendered with both methods, plus placeholder media. Returns the
/// catalog path.
inline std::filesystem::path write_study_catalog(const std::filesystem::path& dir, double time_limit = 30.0)
{
    using nlohmann::json;
    namespace fs = std::filesystem;
    fs::create_directories(dir / "img");

    struct Scene {
        const char* id;
        const char* room;
        std::vector<std::string> objects;
    };
    const std::vector<Scene> scenes{
        {"bedroom-a", "bedroom", {"bed", "chair"}},
        {"kitchen-a", "kitchen", {"sink", "refrigerator", "oven_microwave"}},
        {"dining-a", "dining room", {"table", "chair"}},
        {"living-a", "living room", {"couch", "tv_laptop", "table"}},
    };

    json images = json::array();
    json videos = json::array();
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        const auto& s = scenes[i];
        const std::string view = i % 2 == 0 ? "cent" : "rand";
        json media = json::object();
        json vmedia = json::object();
        for (const std::string method : {"om", "sie-om"}) {
            const auto img = "img/" + std::string(s.id) + "_" + method + ".png";
            write_png(dir / img, LumaFrame(16, 16, method == "om" ? 0.25f : 0.75f));
            media[method] = img;

            const auto vdir = "vid/" + std::string(s.id) + "_" + method;
            fs::create_directories(dir / vdir);
            json frames = json::array();
            for (int k = 0; k < 3; ++k) {
                const auto name = "frame_00000" + std::to_string(k) + ".png";
                write_png(dir / vdir / name, LumaFrame(16, 16, k / 3.0f));
                frames.push_back(name);
            }
            std::ofstream(dir / vdir / "sequence.json")
                << json{{"fps", 20.0}, {"frame_count", 3}, {"method", method}, {"frames", frames}}.dump();
            vmedia[method] = vdir + "/sequence.json";
        }
        images.push_back({{"id", std::string(s.id) + "-" + view},
                          {"view", view},
                          {"room", s.room},
                          {"objects", s.objects},
                          {"media", media}});
        videos.push_back({{"id", std::string(s.id) + "-vid"},
                          {"room", s.room},
                          {"objects", s.objects},
                          {"media", vmedia}});
    }

    const auto path = dir / "catalog.json";
    std::ofstream(path) << json{{"time_limit", time_limit}, {"images", images}, {"videos", videos}}.dump(2);
    return path;
}

/// Every key in a JSON document, recursively, plus every string value.
inline void collect_keys_and_strings(const nlohmann::json& doc, std::vector<std::string>& keys,
                                     std::vector<std::string>& strings)
{
    if (doc.is_object()) {
        for (const auto& [k, v] : doc.items()) {
            keys.push_back(k);
            collect_keys_and_strings(v, keys, strings);
        }
    } else if (doc.is_array()) {
        for (const auto& v : doc)
            collect_keys_and_strings(v, keys, strings);
    } else if (doc.is_string()) {
        strings.push_back(doc.get<std::string>());
    }
}

/// True when a descriptor exposes neither ground-truth fields nor the
/// stimulus identity (as a key or embedded in any string value).
inline bool is_blind(const nlohmann::json& descriptor, const std::string& stimulus_id)
{
    static const std::vector<std::string> forbidden{"ground_truth", "truth", "room", "objects", "stimulus_id",
                                                    "stimulus", "answer"};
    std::vector<std::string> keys, strings;
    collect_keys_and_strings(descriptor, keys, strings);
    for (const auto& k : keys)
        for (const auto& f : forbidden)
            if (k == f)
                return false;
    for (const auto& s : strings)
        if (!stimulus_id.empty() && s.find(stimulus_id) != std::string::npos)
            return false;
    return true;
}

} // namespace spv::testing
