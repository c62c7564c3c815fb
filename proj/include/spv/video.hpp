#pragma once

#include "spv/luma_frame.hpp"
#include "spv/phosphene.hpp"
#include "spv/saliency.hpp"

#include <deque>
#include <optional>
#include <string_view>
#include <vector>

namespace spv {

inline constexpr double kDisplayFps = 20.0;
inline constexpr int kMedianWindow = 5;

struct FrameSequence {
    std::vector<LumaFrame> frames;
    double fps = kDisplayFps;
};

/// Throws DimensionError on mixed frame sizes, PreconditionError on fps <= 0.
void validate(const FrameSequence& seq);

struct FovSpec {
    double source_hfov = 20.0;
    double target_hfov = 20.0;
};

/// Throws FovError unless 0 < target <= source <= 180.
void validate(const FovSpec& fov);

/// Central crop under a pinhole camera: both sides scale by
/// tan(target/2) / tan(source/2), rounded to whole pixels.
LumaFrame crop_fov(const LumaFrame& frame, const FovSpec& fov);

enum class Method { Direct, Om, SieOm };

std::string_view to_string(Method m);
/// "direct", "om", "sie-om" (case-insensitive). Throws ConfigError.
Method parse_method(std::string_view name);

/// Sliding per-pixel median over the last `window` frames. push() returns a
/// frame once the window is full, i.e. from the window-th frame on.
class TemporalMedian {
public:
    explicit TemporalMedian(int window = kMedianWindow);

    std::optional<LumaFrame> push(LumaFrame frame);
    int window() const noexcept { return window_; }

private:
    LumaFrame median() const;

    int window_;
    std::deque<LumaFrame> history_;
};

/// Batch form of TemporalMedian: output length = input length - window + 1.
/// Throws LengthError for short sequences; window must be odd and >= 3.
FrameSequence temporal_median(const FrameSequence& seq, int window = kMedianWindow);

struct PipelineOptions {
    Method method = Method::Direct;
    int levels = 8;
    std::optional<FovSpec> fov;
    int median_window = kMedianWindow;
};

/// Iconic representation of one source frame before downsampling:
/// the raw frame for Direct, compose_om / compose_sie_om otherwise,
/// then the FOV crop when one is configured.
LumaFrame compose_frame(const LumaFrame& source, const SaliencyOverlay* overlay,
                        const PipelineOptions& options);

/// compose -> downsample -> quantize -> render on the fixed grid.
LumaFrame render_source_frame(const LumaFrame& source, const SaliencyOverlay* overlay,
                              const PhospheneGrid& grid, const PipelineOptions& options);

/// Whole-sequence pipeline. `overlays` needs one entry per frame for OM and
/// SIE-OM and is ignored for Direct. Output runs at 20 fps.
FrameSequence process_sequence(const FrameSequence& seq,
                               const std::vector<SaliencyOverlay>& overlays,
                               const PhospheneGrid& grid, const PipelineOptions& options);

} // namespace spv
