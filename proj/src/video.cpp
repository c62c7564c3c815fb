#include "spv/video.hpp"

#include "spv/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

namespace spv {
namespace {

inline void sort2(float& a, float& b)
{
    const float lo = std::min(a, b);
    b = std::max(a, b);
    a = lo;
}

// Median of five via a partial sorting network (7 compare-exchanges).
inline float median5(float a, float b, float c, float d, float e)
{
    sort2(a, b);
    sort2(d, e);
    sort2(a, d);  // a = min of four, discard
    sort2(b, e);  // e = max of four, discard
    sort2(b, c);
    sort2(c, d);
    sort2(b, c);
    return c;
}

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

} // namespace

void validate(const FrameSequence& seq)
{
    if (!(seq.fps > 0.0))
        throw PreconditionError("fps must be positive");
    for (const auto& f : seq.frames)
        if (!f.same_shape(seq.frames.front()))
            throw DimensionError("frame sequence mixes frame sizes");
}

void validate(const FovSpec& fov)
{
    if (!(fov.target_hfov > 0.0) || !(fov.target_hfov <= fov.source_hfov) ||
        !(fov.source_hfov <= 180.0))
        throw FovError("field of view must satisfy 0 < target (" + std::to_string(fov.target_hfov) +
                       ") <= source (" + std::to_string(fov.source_hfov) + ") <= 180");
}

LumaFrame crop_fov(const LumaFrame& frame, const FovSpec& fov)
{
    validate(fov);
    const double ratio = std::tan(deg2rad(fov.target_hfov) / 2.0) /
                         std::tan(deg2rad(fov.source_hfov) / 2.0);
    const int w = static_cast<int>(std::lround(frame.width() * ratio));
    const int h = static_cast<int>(std::lround(frame.height() * ratio));
    if (w <= 0 || h <= 0)
        throw FovError("field of view crop leaves no pixels");
    if (w == frame.width() && h == frame.height())
        return frame;

    const int x0 = (frame.width() - w) / 2;
    const int y0 = (frame.height() - h) / 2;
    LumaFrame out(w, h);
    for (int y = 0; y < h; ++y) {
        auto src = frame.row(y0 + y).subspan(static_cast<std::size_t>(x0), static_cast<std::size_t>(w));
        std::copy(src.begin(), src.end(), out.row(y).begin());
    }
    return out;
}

std::string_view to_string(Method m)
{
    switch (m) {
    case Method::Direct: return "direct";
    case Method::Om: return "om";
    case Method::SieOm: return "sie-om";
    }
    return "unknown";
}

Method parse_method(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (lower == "direct")
        return Method::Direct;
    if (lower == "om")
        return Method::Om;
    if (lower == "sie-om" || lower == "sie_om" || lower == "sieom")
        return Method::SieOm;
    throw ConfigError("unknown method '" + std::string(name) + "' (expected direct, om, sie-om)");
}

TemporalMedian::TemporalMedian(int window)
    : window_(window)
{
    if (window < 3 || window % 2 == 0)
        throw PreconditionError("median window must be odd and at least 3");
}

std::optional<LumaFrame> TemporalMedian::push(LumaFrame frame)
{
    if (!history_.empty() && !frame.same_shape(history_.front()))
        throw DimensionError("temporal median received frames of different sizes");
    history_.push_back(std::move(frame));
    if (static_cast<int>(history_.size()) > window_)
        history_.pop_front();
    if (static_cast<int>(history_.size()) < window_)
        return std::nullopt;
    return median();
}

LumaFrame TemporalMedian::median() const
{
    const auto& first = history_.front();
    LumaFrame out(first.width(), first.height());
    auto dst = out.pixels();
    const std::size_t n = dst.size();

    if (window_ == 5) {
        auto p0 = history_[0].pixels();
        auto p1 = history_[1].pixels();
        auto p2 = history_[2].pixels();
        auto p3 = history_[3].pixels();
        auto p4 = history_[4].pixels();
        for (std::size_t i = 0; i < n; ++i)
            dst[i] = median5(p0[i], p1[i], p2[i], p3[i], p4[i]);
        return out;
    }

    std::vector<float> samples(static_cast<std::size_t>(window_));
    const auto mid = samples.begin() + window_ / 2;
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < window_; ++k)
            samples[k] = history_[k].pixels()[i];
        std::nth_element(samples.begin(), mid, samples.end());
        dst[i] = *mid;
    }
    return out;
}

FrameSequence temporal_median(const FrameSequence& seq, int window)
{
    validate(seq);
    TemporalMedian filter(window);
    if (static_cast<int>(seq.frames.size()) < window)
        throw LengthError("sequence of " + std::to_string(seq.frames.size()) +
                          " frames is shorter than the median window of " + std::to_string(window));
    FrameSequence out;
    out.fps = seq.fps;
    out.frames.reserve(seq.frames.size() - window + 1);
    for (const auto& f : seq.frames)
        if (auto m = filter.push(f))
            out.frames.push_back(std::move(*m));
    return out;
}

LumaFrame compose_frame(const LumaFrame& source, const SaliencyOverlay* overlay,
                        const PipelineOptions& options)
{
    LumaFrame composed;
    switch (options.method) {
    case Method::Direct:
        composed = source;
        break;
    case Method::Om:
    case Method::SieOm:
        if (overlay == nullptr)
            throw PipelineError("method " + std::string(to_string(options.method)) +
                                " needs an overlay");
        if (overlay->width != source.width() || overlay->height != source.height())
            throw PipelineError("overlay for frame " + std::to_string(overlay->frame_index) +
                                " does not match the source frame size");
        composed = options.method == Method::Om ? compose_om(*overlay) : compose_sie_om(*overlay);
        break;
    }
    if (options.fov)
        composed = crop_fov(composed, *options.fov);
    return composed;
}

LumaFrame render_source_frame(const LumaFrame& source, const SaliencyOverlay* overlay,
                              const PhospheneGrid& grid, const PipelineOptions& options)
{
    return render_frame(compose_frame(source, overlay, options), grid, options.levels);
}

FrameSequence process_sequence(const FrameSequence& seq,
                               const std::vector<SaliencyOverlay>& overlays,
                               const PhospheneGrid& grid, const PipelineOptions& options)
{
    validate(seq);
    const bool needs_overlays = options.method != Method::Direct;
    if (needs_overlays && overlays.size() != seq.frames.size())
        throw PipelineError("got " + std::to_string(overlays.size()) + " overlays for " +
                            std::to_string(seq.frames.size()) + " frames");
    if (static_cast<int>(seq.frames.size()) < options.median_window)
        throw LengthError("sequence of " + std::to_string(seq.frames.size()) +
                          " frames is shorter than the median window");

    TemporalMedian filter(options.median_window);
    FrameSequence out;
    out.fps = kDisplayFps;
    out.frames.reserve(seq.frames.size() - options.median_window + 1);
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        const SaliencyOverlay* overlay = needs_overlays ? &overlays[i] : nullptr;
        if (auto m = filter.push(render_source_frame(seq.frames[i], overlay, grid, options)))
            out.frames.push_back(std::move(*m));
    }
    return out;
}

} // namespace spv
