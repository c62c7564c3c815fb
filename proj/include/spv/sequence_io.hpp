#pragma once

#include "spv/grid_config.hpp"
#include "spv/saliency.hpp"
#include "spv/video.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace spv {

/// PNG files in `dir`, ordered by the number embedded in their names
/// (frame_2.png before frame_10.png), ties broken by name.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);

/// Name of output frame i (`frame_000012.png`).
std::string output_frame_name(int index);

struct VideoJob {
    std::filesystem::path frames_dir;
    std::optional<std::filesystem::path> overlays_dir;
    std::filesystem::path output_dir;
    GridConfig grid;
    PipelineOptions pipeline;
    OverlayConfig overlay;
    double fps = kDisplayFps;
    unsigned workers = 0;  // 0 = hardware concurrency
};

struct VideoResult {
    int input_frames = 0;
    int output_frames = 0;
    double seconds = 0.0;
    /// Input frames consumed per wall-clock second, I/O included.
    double throughput_fps = 0.0;
};

/// Reads a numbered frame directory (plus overlay manifests for OM/SIE-OM),
/// renders every frame on one dropout-fixed grid, median-filters, and writes
/// `frame_NNNNNN.png` files with a `sequence.json` manifest. The directory is
/// assembled under a temporary name and renamed into place when complete.
/// Missing overlays raise PipelineError naming the frame before any work.
VideoResult run_video(const VideoJob& job);

struct RenderJob {
    std::filesystem::path image;
    std::optional<std::filesystem::path> overlay_manifest;
    std::filesystem::path output;
    GridConfig grid;
    PipelineOptions pipeline;
    OverlayConfig overlay;
    bool debug = false;
};

/// Still-image path. With `debug`, the PNG is a strip of
/// source | composed | rendered, each scaled to the canvas height.
void run_render(const RenderJob& job);

/// Loads a `sequence.json` written by run_video; used by the study service to
/// hand frame lists to clients.
struct SequenceManifest {
    double fps = kDisplayFps;
    int frame_count = 0;
    std::string method;
    std::vector<std::string> frames;
};
SequenceManifest load_sequence_manifest(const std::filesystem::path& path);

} // namespace spv
